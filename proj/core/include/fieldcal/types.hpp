#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace fieldcal {

// Coordinates in meters. 2D problems leave the third component at zero.
using Position = std::array<double, 3>;

struct MeshPoint {
    Position position{};
    double value = 0.0; // simulated field value at this point
};

// Regular 2D grid, row-major: point k sits at
// (x0 + (k mod nx)*dx, y0 + (k div nx)*dy).
struct GridLayout {
    std::size_t nx = 0;
    std::size_t ny = 0;
    double dx = 1.0;
    double dy = 1.0;
    double x0 = 0.0;
    double y0 = 0.0;

    std::size_t size() const { return nx * ny; }
    Position position_of(std::size_t index) const;
    bool operator==(const GridLayout&) const = default;
};

struct SensorObservation {
    std::size_t mesh_index = 0;
    double observed = 0.0;

    bool operator==(const SensorObservation&) const = default;
};

// Mesh points carrying the simulated field plus the trusted observations
// used for calibration. Construction validates every invariant; an instance
// is always well formed.
class CalibrationProblem {
public:
    CalibrationProblem(std::vector<MeshPoint> points,
                       std::vector<SensorObservation> sensors,
                       std::optional<GridLayout> grid = std::nullopt);

    static CalibrationProblem on_grid(const GridLayout& grid,
                                      std::span<const double> values,
                                      std::vector<SensorObservation> sensors);

    std::size_t size() const { return points_.size(); }
    std::size_t sensor_count() const { return sensors_.size(); }

    const std::vector<MeshPoint>& points() const { return points_; }
    const MeshPoint& point(std::size_t i) const { return points_[i]; }
    const std::vector<SensorObservation>& sensors() const { return sensors_; }
    const std::optional<GridLayout>& grid() const { return grid_; }

    Eigen::VectorXd values() const;

    // Same mesh, different observation set.
    CalibrationProblem with_sensors(std::vector<SensorObservation> sensors) const;

private:
    std::vector<MeshPoint> points_;
    std::vector<SensorObservation> sensors_;
    std::optional<GridLayout> grid_;
};

enum class RowSumMode { exact, lowrank };
enum class SolverKind { dense, lowrank };

std::string_view to_string(RowSumMode mode);
std::string_view to_string(SolverKind kind);

inline constexpr std::size_t kDefaultSampleCount = 100;
inline constexpr std::size_t kDefaultDenseSizeCap = 5000;
inline constexpr std::size_t kDefaultExactRowSumCap = 20000;

struct CalibrationParams {
    double sigma_m = 1000.0; // squared field units
    double sigma_d = 1.0;    // squared meters
    double alpha = 0.01;     // in (0, 1]
    // Nystrom sample count; unset means min(kDefaultSampleCount, N).
    std::optional<std::size_t> n_samples;
    RowSumMode rowsum_mode = RowSumMode::lowrank;
    SolverKind solver = SolverKind::dense;
    std::size_t dense_size_cap = kDefaultDenseSizeCap;
    std::size_t exact_rowsum_cap = kDefaultExactRowSumCap;

    // Throws DomainError. problem_size is N, used for the n_samples range.
    void validate(std::size_t problem_size) const;
    std::size_t sample_count(std::size_t problem_size) const;
};

struct ErrorEstimate {
    Eigen::VectorXd v_hat;
};

} // namespace fieldcal
