#pragma once

#include "fieldcal/types.hpp"

#include <Eigen/Core>

namespace fieldcal {

// Fully materialized normal equations H v = b with H = diag(D) - W_s and
// W_s = 2W. The constant term of the objective is not stored; it does not
// move the minimizer.
struct DenseSystem {
    Eigen::MatrixXd H;
    Eigen::VectorXd D;
    Eigen::VectorXd b;
    double lambda = 0.0;
};

/// Builds H, D and b. Throws SizeCapExceeded when N is above
/// params.dense_size_cap and AssemblyError if any entry comes out non-finite.
DenseSystem assemble_dense(const CalibrationProblem& problem, const CalibrationParams& params);

/// Cholesky solve of the assembled system. Throws FactorizationError if H
/// turns out not to be positive definite.
ErrorEstimate solve_dense(const DenseSystem& system);

/// The objective minimized by both solvers, evaluated directly from its
/// double-sum definition (scaled by 1/lambda):
///   (1/lambda) sum_i sum_k w_{i,l_k} (v_i - e_k)^2 + sum_i sum_j w_ij (v_i - v_j)^2.
/// O(N^2); meant for diagnostics and small problems.
double objective(const CalibrationProblem& problem, const CalibrationParams& params,
                 const Eigen::VectorXd& v);

} // namespace fieldcal
