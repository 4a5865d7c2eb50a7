#pragma once

#include "fieldcal/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace fieldcal {

// Column-sampled (Nystrom) factors of W_s = 2W:  W_s ~ Z A^{-1} Z^T.
//
// Z holds the sampled columns of W_s for every mesh point and A the sampled
// rows of those columns, so A is bit-identical to Z restricted to the sample
// rows. Every use of A^{-1} goes through A_factor, the Cholesky factor of
// A + ridge*I. The ridge is 0 when A factors as is; otherwise it starts at
// 1e-8 * trace(A)/n and grows x10 (up to 1e-2 * trace(A)/n) until the
// factorization succeeds. Nothing N x N is ever formed.
struct LowRankFactors {
    std::vector<std::size_t> samples;
    Eigen::MatrixXd Z;  // N x n
    Eigen::MatrixXd A;  // n x n, without ridge
    double ridge = 0.0;
    Eigen::LLT<Eigen::MatrixXd> A_factor;

    std::size_t rank() const { return samples.size(); }
    Eigen::MatrixXd regularized_A() const;
};

/// Picks n distinct, spatially spread mesh indexes (ascending).
///
/// Grid problems get a near-uniform coarse sub-grid of cell centers; other
/// problems get uniform strides over the point list. When n >= m each sensor
/// then replaces its nearest not-yet-replaced stratified sample, so sensor
/// indexes are always included and n == m yields exactly the sensors.
/// Throws DomainError unless 1 <= n <= N.
std::vector<std::size_t> select_samples(const CalibrationProblem& problem, std::size_t n);

/// Evaluates Z and A for the given samples and factors A. Throws
/// DomainError for bad sample lists and RankDeficiencyError when A cannot be
/// factored even at the largest ridge.
LowRankFactors build_factors(const CalibrationProblem& problem,
                             const std::vector<std::size_t>& samples,
                             const CalibrationParams& params);

/// Row sums of the approximated W_s, Z (A^{-1} (Z^T 1)), clamped below at
/// kMinRowSum. These are on the W_s scale, i.e. comparable to
/// 2 * row_sums_exact.
Eigen::VectorXd row_sums_lowrank(const LowRankFactors& factors);

inline constexpr double kMinRowSum = 1e-12;

/// Woodbury solve of (D - Z A^{-1} Z^T) v = b. The sensor part of D is
/// always exact; the row-sum part follows params.rowsum_mode. Peak memory is
/// O(N n).
ErrorEstimate solve_lowrank(const CalibrationProblem& problem, const CalibrationParams& params);

} // namespace fieldcal
