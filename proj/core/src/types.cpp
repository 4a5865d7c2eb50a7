#include "fieldcal/types.hpp"

#include "fieldcal/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <unordered_set>

namespace fieldcal {

Position GridLayout::position_of(std::size_t index) const {
    const auto col = index % nx;
    const auto row = index / nx;
    return {x0 + static_cast<double>(col) * dx, y0 + static_cast<double>(row) * dy, 0.0};
}

namespace {

bool finite(const Position& p) {
    return std::all_of(p.begin(), p.end(), [](double c) { return std::isfinite(c); });
}

void validate_grid(const GridLayout& grid, const std::vector<MeshPoint>& points) {
    if (grid.nx == 0 || grid.ny == 0) {
        throw DomainError("grid dimensions must be positive");
    }
    if (!(grid.dx > 0.0) || !(grid.dy > 0.0) || !std::isfinite(grid.dx) || !std::isfinite(grid.dy)) {
        throw DomainError("grid spacing must be positive and finite");
    }
    if (grid.size() != points.size()) {
        std::ostringstream os;
        os << "grid " << grid.nx << "x" << grid.ny << " does not match " << points.size()
           << " points";
        throw DomainError(os.str());
    }
    const double scale = std::max({std::abs(grid.x0), std::abs(grid.y0),
                                   grid.dx * static_cast<double>(grid.nx),
                                   grid.dy * static_cast<double>(grid.ny), 1.0});
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto expected = grid.position_of(k);
        for (int c = 0; c < 3; ++c) {
            if (std::abs(points[k].position[c] - expected[c]) > 1e-9 * scale) {
                throw DomainError("point " + std::to_string(k) + " is off the declared grid");
            }
        }
    }
}

} // namespace

CalibrationProblem::CalibrationProblem(std::vector<MeshPoint> points,
                                       std::vector<SensorObservation> sensors,
                                       std::optional<GridLayout> grid)
    : points_(std::move(points)), sensors_(std::move(sensors)), grid_(std::move(grid)) {
    if (points_.empty()) {
        throw DomainError("problem needs at least one mesh point");
    }
    if (sensors_.empty()) {
        throw DomainError("problem needs at least one sensor");
    }
    if (sensors_.size() > points_.size()) {
        throw DomainError("more sensors than mesh points");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!finite(points_[i].position) || !std::isfinite(points_[i].value)) {
            throw DomainError("mesh point " + std::to_string(i) + " is not finite");
        }
    }
    std::unordered_set<std::size_t> seen;
    for (const auto& s : sensors_) {
        if (s.mesh_index >= points_.size()) {
            throw DomainError("sensor mesh index " + std::to_string(s.mesh_index) +
                              " out of range");
        }
        if (!std::isfinite(s.observed)) {
            throw DomainError("sensor at mesh index " + std::to_string(s.mesh_index) +
                              " has a non-finite observation");
        }
        if (!seen.insert(s.mesh_index).second) {
            throw DomainError("duplicate sensor at mesh index " + std::to_string(s.mesh_index));
        }
    }
    if (grid_) {
        validate_grid(*grid_, points_);
    }
}

CalibrationProblem CalibrationProblem::on_grid(const GridLayout& grid,
                                               std::span<const double> values,
                                               std::vector<SensorObservation> sensors) {
    if (values.size() != grid.size()) {
        throw DomainError("value count does not match grid size");
    }
    std::vector<MeshPoint> points(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
        points[k] = {grid.position_of(k), values[k]};
    }
    return CalibrationProblem(std::move(points), std::move(sensors), grid);
}

Eigen::VectorXd CalibrationProblem::values() const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(points_.size()));
    for (std::size_t i = 0; i < points_.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] = points_[i].value;
    }
    return out;
}

CalibrationProblem CalibrationProblem::with_sensors(std::vector<SensorObservation> sensors) const {
    return CalibrationProblem(points_, std::move(sensors), grid_);
}

std::string_view to_string(RowSumMode mode) {
    return mode == RowSumMode::exact ? "exact" : "lowrank";
}

std::string_view to_string(SolverKind kind) {
    return kind == SolverKind::dense ? "dense" : "lowrank";
}

void CalibrationParams::validate(std::size_t problem_size) const {
    if (!(sigma_m > 0.0) || !std::isfinite(sigma_m)) {
        throw DomainError("sigma_m must be positive and finite");
    }
    if (!(sigma_d > 0.0) || !std::isfinite(sigma_d)) {
        throw DomainError("sigma_d must be positive and finite");
    }
    if (!(alpha > 0.0) || !(alpha <= 1.0)) {
        throw DomainError("alpha must lie in (0, 1]");
    }
    if (n_samples && (*n_samples == 0 || *n_samples > problem_size)) {
        throw DomainError("n_samples must lie in [1, " + std::to_string(problem_size) + "]");
    }
}

std::size_t CalibrationParams::sample_count(std::size_t problem_size) const {
    return n_samples.value_or(std::min(kDefaultSampleCount, problem_size));
}

} // namespace fieldcal
