#pragma once

// Brute-force references used by the unit and acceptance suites. Nothing in
// here calls into the solver paths it is used to check: weights are
// recomputed from the two-Gaussian product form, the system is assembled
// from the fully materialized affinity matrix, and minimization is plain
// gradient descent on the double-sum objective.

#include "fieldcal/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace fieldcal::oracle {

inline double weight(const MeshPoint& p, const MeshPoint& q, double sigma_m, double sigma_d) {
    const double dv = p.value - q.value;
    const double dx = p.position[0] - q.position[0];
    const double dy = p.position[1] - q.position[1];
    const double dz = p.position[2] - q.position[2];
    return std::exp(-(dv * dv) / sigma_m) * std::exp(-(dx * dx + dy * dy + dz * dz) / sigma_d);
}

inline Eigen::MatrixXd affinity_matrix(const CalibrationProblem& problem, const CalibrationParams& params) {
    const auto n = static_cast<Eigen::Index>(problem.size());
    Eigen::MatrixXd W(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            W(i, j) = weight(problem.point(static_cast<std::size_t>(i)),
                             problem.point(static_cast<std::size_t>(j)), params.sigma_m, params.sigma_d);
        }
    }
    return W;
}

inline std::vector<double> residuals(const CalibrationProblem& problem) {
    std::vector<double> e;
    for (const auto& s : problem.sensors()) e.push_back(problem.point(s.mesh_index).value - s.observed);
    return e;
}

inline double lambda(const CalibrationProblem& problem, const CalibrationParams& params) {
    return params.alpha * static_cast<double>(problem.sensor_count()) / static_cast<double>(problem.size());
}

struct ReferenceSystem {
    Eigen::MatrixXd H;
    Eigen::VectorXd b;
};

// H = (1/lambda) sum_k diag(w_{l_k}) + diag(2 W 1) - 2 W ; b = (1/lambda) sum_k e_k w_{l_k}
inline ReferenceSystem reference_system(const CalibrationProblem& problem, const CalibrationParams& params) {
    const Eigen::MatrixXd W = affinity_matrix(problem, params);
    const double inv_lambda = 1.0 / lambda(problem, params);
    const auto e = residuals(problem);
    const auto n = W.rows();
    ReferenceSystem sys{Eigen::MatrixXd(-2.0 * W), Eigen::VectorXd::Zero(n)};
    sys.H.diagonal() += 2.0 * W.rowwise().sum();
    for (std::size_t k = 0; k < problem.sensor_count(); ++k) {
        const auto col = W.col(static_cast<Eigen::Index>(problem.sensors()[k].mesh_index));
        sys.H.diagonal() += inv_lambda * col;
        sys.b += inv_lambda * e[k] * col;
    }
    return sys;
}

// Solved with full-pivot LU rather than a symmetric factorization.
inline Eigen::VectorXd reference_solve(const CalibrationProblem& problem, const CalibrationParams& params) {
    const auto sys = reference_system(problem, params);
    return sys.H.fullPivLu().solve(sys.b);
}

// (1/lambda) sum_i sum_k w_{i,l_k} (v_i - e_k)^2 + sum_i sum_j w_ij (v_i - v_j)^2
inline double objective(const CalibrationProblem& problem, const CalibrationParams& params,
                        const Eigen::VectorXd& v) {
    const auto e = residuals(problem);
    const double inv_lambda = 1.0 / lambda(problem, params);
    double total = 0.0;
    for (std::size_t i = 0; i < problem.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        for (std::size_t k = 0; k < problem.sensor_count(); ++k) {
            const double w = weight(problem.point(i), problem.point(problem.sensors()[k].mesh_index),
                                    params.sigma_m, params.sigma_d);
            total += inv_lambda * w * (v[ii] - e[k]) * (v[ii] - e[k]);
        }
        for (std::size_t j = 0; j < problem.size(); ++j) {
            const double d = v[ii] - v[static_cast<Eigen::Index>(j)];
            total += weight(problem.point(i), problem.point(j), params.sigma_m, params.sigma_d) * d * d;
        }
    }
    return total;
}

inline Eigen::VectorXd objective_gradient(const CalibrationProblem& problem, const CalibrationParams& params,
                                          const Eigen::VectorXd& v) {
    const auto e = residuals(problem);
    const double inv_lambda = 1.0 / lambda(problem, params);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(v.size());
    for (std::size_t i = 0; i < problem.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        for (std::size_t k = 0; k < problem.sensor_count(); ++k) {
            const double w = weight(problem.point(i), problem.point(problem.sensors()[k].mesh_index),
                                    params.sigma_m, params.sigma_d);
            g[ii] += 2.0 * inv_lambda * w * (v[ii] - e[k]);
        }
        for (std::size_t j = 0; j < problem.size(); ++j) {
            // Both (i, j) and (j, i) terms of the symmetric double sum.
            g[ii] += 4.0 * weight(problem.point(i), problem.point(j), params.sigma_m, params.sigma_d) *
                     (v[ii] - v[static_cast<Eigen::Index>(j)]);
        }
    }
    return g;
}

// Gradient descent with a Gershgorin bound on the Hessian for the step.
inline Eigen::VectorXd gradient_descent(const CalibrationProblem& problem, const CalibrationParams& params,
                                        Eigen::VectorXd v, int iterations) {
    const double inv_lambda = 1.0 / lambda(problem, params);
    double bound = 0.0;
    for (std::size_t i = 0; i < problem.size(); ++i) {
        double row = 0.0;
        for (const auto& s : problem.sensors()) {
            row += 2.0 * inv_lambda *
                   weight(problem.point(i), problem.point(s.mesh_index), params.sigma_m, params.sigma_d);
        }
        for (std::size_t j = 0; j < problem.size(); ++j) {
            row += 8.0 * weight(problem.point(i), problem.point(j), params.sigma_m, params.sigma_d);
        }
        bound = std::max(bound, row);
    }
    const double step = 1.0 / bound;
    for (int it = 0; it < iterations; ++it) {
        v -= step * objective_gradient(problem, params, v);
    }
    return v;
}

// Random scattered 2D instance: points in a [0, extent]^2 box carrying a
// smooth field plus noise, distinct random sensor locations.
struct RandomInstance {
    CalibrationProblem problem;
    CalibrationParams params;
};

inline RandomInstance random_instance(std::mt19937_64& rng, std::size_t n, std::size_t m) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double extent = 1.0 + 2.0 * unit(rng);
    std::vector<MeshPoint> points(n);
    for (auto& p : points) {
        p.position = {extent * unit(rng), extent * unit(rng), 0.0};
        p.value = 24.0 + 2.0 * std::sin(p.position[0]) * std::cos(p.position[1]) + 0.3 * unit(rng);
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<SensorObservation> sensors;
    for (std::size_t k = 0; k < m; ++k) {
        sensors.push_back({order[k], points[order[k]].value - 2.0 + 4.0 * unit(rng)});
    }
    CalibrationParams params;
    params.sigma_m = std::pow(10.0, -0.5 + 3.5 * unit(rng)); // 0.3 .. 1000
    params.sigma_d = extent * extent * (0.05 + 0.5 * unit(rng));
    params.alpha = std::pow(10.0, -2.0 + 2.0 * unit(rng)); // 0.01 .. 1
    return {CalibrationProblem(std::move(points), std::move(sensors)), params};
}

} // namespace fieldcal::oracle
