#include "fieldcal/synth.hpp"

#include "fieldcal/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace fieldcal {

namespace {

// Distributions built directly on the engine's bit stream so cases are
// identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::size_t index(std::size_t count) {
        return std::min(count - 1, static_cast<std::size_t>(uniform() * static_cast<double>(count)));
    }

private:
    std::mt19937_64 engine_;
};

struct Bump {
    double cx, cy, amplitude, width;

    double at(double x, double y) const {
        const double dx = x - cx;
        const double dy = y - cy;
        return amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
    }
};

std::size_t snap(const GridLayout& grid, double x, double y) {
    auto clamp_index = [](double t, std::size_t n) {
        const double r = std::clamp(std::round(t), 0.0, static_cast<double>(n - 1));
        return static_cast<std::size_t>(r);
    };
    return clamp_index((y - grid.y0) / grid.dy, grid.ny) * grid.nx +
           clamp_index((x - grid.x0) / grid.dx, grid.nx);
}

} // namespace

SyntheticCase make_case(std::uint64_t seed, std::size_t nx, std::size_t ny, double spacing,
                        std::size_t n_calib, std::size_t n_holdout, const SynthOptions& options) {
    if (nx < 4 || ny < 4) {
        throw DomainError("synthetic grid must be at least 4x4");
    }
    if (!(spacing > 0.0) || !std::isfinite(spacing)) {
        throw DomainError("spacing must be positive and finite");
    }
    if (n_calib == 0) {
        throw DomainError("need at least one calibration sensor");
    }
    const GridLayout grid{nx, ny, spacing, spacing, 0.0, 0.0};
    if (n_calib + n_holdout > grid.size()) {
        throw DomainError("sensor counts oversubscribe the " + std::to_string(grid.size()) +
                          "-point grid");
    }

    Rng rng(seed);
    const double width_x = spacing * static_cast<double>(nx - 1);
    const double width_y = spacing * static_cast<double>(ny - 1);
    auto random_bump = [&](double amp_lo, double amp_hi, double w_lo, double w_hi) {
        Bump b{};
        b.cx = rng.uniform(0.0, width_x);
        b.cy = rng.uniform(0.0, width_y);
        b.amplitude = rng.uniform(amp_lo, amp_hi);
        b.width = rng.uniform(w_lo, w_hi);
        return b;
    };

    std::vector<Bump> plumes(3 + rng.index(4));
    for (auto& b : plumes) b = random_bump(1.0, 4.0, 0.3, 1.5);
    std::vector<Bump> errors(2 + rng.index(3));
    for (auto& b : errors) b = random_bump(0.5, 2.0, 1.0, 3.0);

    const auto n = static_cast<Eigen::Index>(grid.size());
    SyntheticCase out{seed, grid, Eigen::VectorXd(n), Eigen::VectorXd(n),
                      CalibrationProblem({MeshPoint{}}, {SensorObservation{}}), {}, {}};
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto p = grid.position_of(static_cast<std::size_t>(k));
        double truth = options.base_value;
        for (const auto& b : plumes) truth += b.at(p[0], p[1]);
        double err = 0.0;
        for (const auto& b : errors) err += b.at(p[0], p[1]);
        out.ground_truth[k] = truth;
        out.injected_error[k] = options.error_scale * err;
    }

    std::vector<bool> taken(grid.size(), false);
    auto claim = [&](std::size_t idx) {
        taken[idx] = true;
        return SensorObservation{idx, out.ground_truth[static_cast<Eigen::Index>(idx)]};
    };
    auto first_free_after = [&](std::size_t idx) {
        while (taken[idx]) idx = (idx + 1) % grid.size();
        return idx;
    };

    // Calibration sensors: within half a width of an error bump center,
    // cycling through the bumps.
    for (std::size_t k = 0; k < n_calib; ++k) {
        const auto& bump = errors[k % errors.size()];
        std::size_t idx = grid.size();
        for (int attempt = 0; attempt < 32 && idx == grid.size(); ++attempt) {
            const double r = 0.5 * bump.width * std::sqrt(rng.uniform());
            const double theta = rng.uniform(0.0, 2.0 * M_PI);
            const auto candidate = snap(grid, bump.cx + r * std::cos(theta), bump.cy + r * std::sin(theta));
            if (!taken[candidate]) idx = candidate;
        }
        if (idx == grid.size()) idx = first_free_after(rng.index(grid.size()));
        out.calib_sensors.push_back(claim(idx));
    }

    // Holdout sensors: one uniform draw per vertical strip.
    for (std::size_t k = 0; k < n_holdout; ++k) {
        const double strip = width_x / static_cast<double>(n_holdout);
        std::size_t idx = grid.size();
        for (int attempt = 0; attempt < 32 && idx == grid.size(); ++attempt) {
            const double x = (static_cast<double>(k) + rng.uniform()) * strip;
            const auto candidate = snap(grid, x, rng.uniform(0.0, width_y));
            if (!taken[candidate]) idx = candidate;
        }
        if (idx == grid.size()) idx = first_free_after(rng.index(grid.size()));
        out.holdout_sensors.push_back(claim(idx));
    }

    const Eigen::VectorXd simulated = out.ground_truth + out.injected_error;
    // Recomputed from the rounded sum so that field minus truth reproduces it bit for bit.
    out.injected_error = simulated - out.ground_truth;
    out.problem = CalibrationProblem::on_grid(
        grid, std::span<const double>(simulated.data(), static_cast<std::size_t>(simulated.size())),
        out.calib_sensors);
    return out;
}

double rmse(std::span<const double> a, std::span<const double> b, std::span<const std::size_t> at) {
    if (a.size() != b.size()) {
        throw DomainError("rmse inputs differ in length");
    }
    if (at.empty()) {
        throw DomainError("rmse needs at least one index");
    }
    double sum = 0.0;
    for (const auto i : at) {
        if (i >= a.size()) {
            throw DomainError("rmse index " + std::to_string(i) + " out of range");
        }
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(at.size()));
}

} // namespace fieldcal
