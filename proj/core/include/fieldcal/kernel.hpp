#pragma once

#include "fieldcal/types.hpp"

#include <Eigen/Core>

#include <cstddef>

namespace fieldcal {

/// Affinity between two mesh points: a Gaussian in simulated-value difference
/// (variance sigma_m) times a Gaussian in distance (variance sigma_d).
/// Symmetric, in (0, 1] up to underflow, and 1 exactly when both points
/// coincide in position and value.
double affinity(const MeshPoint& p, const MeshPoint& q, double sigma_m, double sigma_d);

inline double affinity(const MeshPoint& p, const MeshPoint& q, const CalibrationParams& params) {
    return affinity(p, q, params.sigma_m, params.sigma_d);
}

/// e_k = f_c(x_k) - s_k, in sensor order.
Eigen::VectorXd sensor_residuals(const CalibrationProblem& problem);

/// Balance factor lambda = alpha * m / N. Throws DomainError outside
/// 0 < alpha <= 1, 1 <= m <= N.
double lambda_from_alpha(double alpha, std::size_t sensor_count, std::size_t problem_size);

/// N x m matrix whose column k holds w(y_i, y_{l_k}) for every mesh point i.
Eigen::MatrixXd sensor_affinity_columns(const CalibrationProblem& problem,
                                        const CalibrationParams& params);

/// r_i = sum_j w_ij over all j, self term included. O(N^2) kernel
/// evaluations but O(N) memory; rows are summed in index order.
Eigen::VectorXd row_sums_exact(const CalibrationProblem& problem, const CalibrationParams& params);

} // namespace fieldcal
