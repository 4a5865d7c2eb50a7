#include "fieldcal/kernel.hpp"

#include "fieldcal/errors.hpp"

#include <cmath>

namespace fieldcal {

double affinity(const MeshPoint& p, const MeshPoint& q, double sigma_m, double sigma_d) {
    const double dv = p.value - q.value;
    double dist2 = 0.0;
    for (int c = 0; c < 3; ++c) {
        const double d = p.position[c] - q.position[c];
        dist2 += d * d;
    }
    return std::exp(-(dv * dv) / sigma_m - dist2 / sigma_d);
}

Eigen::VectorXd sensor_residuals(const CalibrationProblem& problem) {
    const auto& sensors = problem.sensors();
    Eigen::VectorXd e(static_cast<Eigen::Index>(sensors.size()));
    for (std::size_t k = 0; k < sensors.size(); ++k) {
        e[static_cast<Eigen::Index>(k)] =
            problem.point(sensors[k].mesh_index).value - sensors[k].observed;
    }
    return e;
}

double lambda_from_alpha(double alpha, std::size_t sensor_count, std::size_t problem_size) {
    if (!(alpha > 0.0) || !(alpha <= 1.0)) {
        throw DomainError("alpha must lie in (0, 1]");
    }
    if (sensor_count == 0 || sensor_count > problem_size) {
        throw DomainError("sensor count must lie in [1, N]");
    }
    return alpha * static_cast<double>(sensor_count) / static_cast<double>(problem_size);
}

Eigen::MatrixXd sensor_affinity_columns(const CalibrationProblem& problem,
                                        const CalibrationParams& params) {
    const auto n = static_cast<Eigen::Index>(problem.size());
    const auto& sensors = problem.sensors();
    Eigen::MatrixXd cols(n, static_cast<Eigen::Index>(sensors.size()));
    for (std::size_t k = 0; k < sensors.size(); ++k) {
        const auto& anchor = problem.point(sensors[k].mesh_index);
        for (Eigen::Index i = 0; i < n; ++i) {
            cols(i, static_cast<Eigen::Index>(k)) =
                affinity(problem.point(static_cast<std::size_t>(i)), anchor, params);
        }
    }
    return cols;
}

Eigen::VectorXd row_sums_exact(const CalibrationProblem& problem, const CalibrationParams& params) {
    const std::size_t n = problem.size();
    Eigen::VectorXd sums(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto& pi = problem.point(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            acc += affinity(pi, problem.point(j), params);
        }
        sums[static_cast<Eigen::Index>(i)] = acc;
    }
    return sums;
}

} // namespace fieldcal
