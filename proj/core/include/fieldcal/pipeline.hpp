#pragma once

#include "fieldcal/types.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace fieldcal {

struct CalibrationResult {
    ErrorEstimate estimate;
    Eigen::VectorXd f_hat; // f_c - v_hat
    CalibrationParams params_used;
    double lambda = 0.0;
    SolverKind solver_used = SolverKind::dense;

    const Eigen::VectorXd& v_hat() const { return estimate.v_hat; }
};

struct SensorError {
    std::size_t sensor_id = 0; // position in the holdout list
    double error_before = 0.0; // f_c - s
    double error_after = 0.0;  // f_hat - s
};

struct EvaluationReport {
    double rmse_before = 0.0;
    double rmse_after = 0.0;
    double improvement = 0.0; // fraction; 0 when rmse_before is 0
    std::vector<SensorError> per_sensor;
};

/// (before - after) / before; 0 when before is 0.
double improvement(double rmse_before, double rmse_after);

/// Runs the solver selected in params and applies the correction
/// f_hat = f_c - v_hat. Solver errors propagate unchanged.
CalibrationResult calibrate(const CalibrationProblem& problem, const CalibrationParams& params);

/// Scores a calibration against observations that were not fed to the
/// solver. Throws DomainError on an empty holdout or out-of-range index.
EvaluationReport evaluate(const CalibrationProblem& problem, const CalibrationResult& result,
                          std::span<const SensorObservation> holdout);

enum class SweepAxis { alpha, sigma_m, sigma_d };

struct SweepEntry {
    double value = 0.0;
    EvaluationReport report;
    double max_abs_v = 0.0;
    double support_area_fraction = 0.0;
};

/// Share of points whose |v_hat_i| exceeds 5% of max |v_hat|.
inline constexpr double kSupportThreshold = 0.05;
double support_area_fraction(const Eigen::VectorXd& v_hat);

/// One calibration per value with the axis parameter substituted into base.
/// Entries come back in input order.
std::vector<SweepEntry> sweep(const CalibrationProblem& problem, const CalibrationParams& base,
                              SweepAxis axis, std::span<const double> values,
                              std::span<const SensorObservation> holdout);

} // namespace fieldcal
