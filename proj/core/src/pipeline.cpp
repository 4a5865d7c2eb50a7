#include "fieldcal/pipeline.hpp"

#include "fieldcal/dense_solver.hpp"
#include "fieldcal/errors.hpp"
#include "fieldcal/kernel.hpp"
#include "fieldcal/lowrank_solver.hpp"

#include <cmath>
#include <string>

namespace fieldcal {

double improvement(double rmse_before, double rmse_after) {
    if (rmse_before <= 0.0) {
        return 0.0;
    }
    return (rmse_before - rmse_after) / rmse_before;
}

CalibrationResult calibrate(const CalibrationProblem& problem, const CalibrationParams& params) {
    params.validate(problem.size());
    CalibrationResult result;
    result.params_used = params;
    result.solver_used = params.solver;
    result.lambda = lambda_from_alpha(params.alpha, problem.sensor_count(), problem.size());
    if (params.solver == SolverKind::dense) {
        result.estimate = solve_dense(assemble_dense(problem, params));
    } else {
        result.estimate = solve_lowrank(problem, params);
    }
    result.f_hat = problem.values() - result.estimate.v_hat;
    return result;
}

EvaluationReport evaluate(const CalibrationProblem& problem, const CalibrationResult& result,
                          std::span<const SensorObservation> holdout) {
    if (holdout.empty()) {
        throw DomainError("holdout set is empty");
    }
    EvaluationReport report;
    report.per_sensor.reserve(holdout.size());
    double sum_before = 0.0;
    double sum_after = 0.0;
    for (std::size_t k = 0; k < holdout.size(); ++k) {
        const auto idx = holdout[k].mesh_index;
        if (idx >= problem.size()) {
            throw DomainError("holdout mesh index " + std::to_string(idx) + " out of range");
        }
        const double before = problem.point(idx).value - holdout[k].observed;
        const double after = result.f_hat[static_cast<Eigen::Index>(idx)] - holdout[k].observed;
        sum_before += before * before;
        sum_after += after * after;
        report.per_sensor.push_back({k, before, after});
    }
    const auto count = static_cast<double>(holdout.size());
    report.rmse_before = std::sqrt(sum_before / count);
    report.rmse_after = std::sqrt(sum_after / count);
    report.improvement = improvement(report.rmse_before, report.rmse_after);
    return report;
}

double support_area_fraction(const Eigen::VectorXd& v_hat) {
    if (v_hat.size() == 0) {
        return 0.0;
    }
    const double peak = v_hat.cwiseAbs().maxCoeff();
    if (peak == 0.0) {
        return 0.0;
    }
    const auto above = (v_hat.array().abs() > kSupportThreshold * peak).count();
    return static_cast<double>(above) / static_cast<double>(v_hat.size());
}

std::vector<SweepEntry> sweep(const CalibrationProblem& problem, const CalibrationParams& base,
                              SweepAxis axis, std::span<const double> values,
                              std::span<const SensorObservation> holdout) {
    if (values.empty()) {
        throw DomainError("sweep needs at least one value");
    }
    for (const double v : values) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw DomainError("sweep values must be positive and finite, got " + std::to_string(v));
        }
        if (axis == SweepAxis::alpha && v > 1.0) {
            throw DomainError("alpha sweep values must not exceed 1, got " + std::to_string(v));
        }
    }

    std::vector<SweepEntry> entries;
    entries.reserve(values.size());
    for (const double v : values) {
        CalibrationParams params = base;
        switch (axis) {
        case SweepAxis::alpha: params.alpha = v; break;
        case SweepAxis::sigma_m: params.sigma_m = v; break;
        case SweepAxis::sigma_d: params.sigma_d = v; break;
        }
        const auto result = calibrate(problem, params);
        SweepEntry entry;
        entry.value = v;
        entry.report = evaluate(problem, result, holdout);
        entry.max_abs_v = result.v_hat().cwiseAbs().maxCoeff();
        entry.support_area_fraction = support_area_fraction(result.v_hat());
        entries.push_back(std::move(entry));
    }
    return entries;
}

} // namespace fieldcal
