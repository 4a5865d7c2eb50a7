#pragma once

#include "fieldcal/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace fieldcal {

// Seeded stand-in for a measured room: a ground-truth plane, a simulated
// field that carries a smooth injected error, and two disjoint sensor sets
// whose observations equal the ground truth.
struct SyntheticCase {
    std::uint64_t seed = 0;
    GridLayout grid;
    Eigen::VectorXd ground_truth;
    Eigen::VectorXd injected_error;
    CalibrationProblem problem; // values = ground_truth + injected_error, calib sensors
    std::vector<SensorObservation> calib_sensors;
    std::vector<SensorObservation> holdout_sensors;
};

struct SynthOptions {
    double base_value = 24.0;
    // Multiplies every injected error bump; 0 gives a perfect simulation.
    double error_scale = 1.0;
};

/// Deterministic for a given (seed, shape, options). Ground truth is
/// base_value plus 3-6 Gaussian bumps (amplitude 1-4, width 0.3-1.5 m); the
/// injected error is 2-4 broader bumps of the same sign (amplitude 0.5-2,
/// width 1-3 m). Calibration sensors sit near distinct error bumps; holdout
/// sensors are drawn one per vertical strip.
///
/// Throws DomainError for nx or ny below 4, n_calib of 0, non-positive
/// spacing, or more sensors than points.
SyntheticCase make_case(std::uint64_t seed, std::size_t nx, std::size_t ny, double spacing,
                        std::size_t n_calib, std::size_t n_holdout, const SynthOptions& options = {});

/// Root mean square of (a_i - b_i) over the listed indexes.
double rmse(std::span<const double> a, std::span<const double> b, std::span<const std::size_t> at);

} // namespace fieldcal
