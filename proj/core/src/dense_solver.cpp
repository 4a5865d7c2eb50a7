#include "fieldcal/dense_solver.hpp"

#include "fieldcal/errors.hpp"
#include "fieldcal/kernel.hpp"

#include <Eigen/Cholesky>

#include <string>

namespace fieldcal {

DenseSystem assemble_dense(const CalibrationProblem& problem, const CalibrationParams& params) {
    const std::size_t n = problem.size();
    params.validate(n);
    if (n > params.dense_size_cap) {
        throw SizeCapExceeded("problem has " + std::to_string(n) +
                              " points, above the dense cap of " +
                              std::to_string(params.dense_size_cap) + "; use lowrank solver");
    }

    DenseSystem sys;
    sys.lambda = lambda_from_alpha(params.alpha, problem.sensor_count(), n);
    const double inv_lambda = 1.0 / sys.lambda;
    const auto ni = static_cast<Eigen::Index>(n);

    // Off-diagonal: -2 w_ij, evaluated once per pair so H is exactly symmetric.
    sys.H.resize(ni, ni);
    for (Eigen::Index j = 0; j < ni; ++j) {
        const auto& pj = problem.point(static_cast<std::size_t>(j));
        for (Eigen::Index i = j + 1; i < ni; ++i) {
            const double w = affinity(problem.point(static_cast<std::size_t>(i)), pj, params);
            sys.H(i, j) = -2.0 * w;
            sys.H(j, i) = -2.0 * w;
        }
    }

    const Eigen::MatrixXd sensor_cols = sensor_affinity_columns(problem, params);
    const Eigen::VectorXd residuals = sensor_residuals(problem);

    // Row sums in index order, self term (w_ii = 1) included.
    sys.D.resize(ni);
    for (Eigen::Index i = 0; i < ni; ++i) {
        double row = 0.0;
        for (Eigen::Index j = 0; j < ni; ++j) {
            row += (i == j) ? 1.0 : -0.5 * sys.H(i, j);
        }
        sys.D[i] = inv_lambda * sensor_cols.row(i).sum() + 2.0 * row;
        sys.H(i, i) = sys.D[i] - 2.0;
    }
    sys.b = inv_lambda * (sensor_cols * residuals);

    if (!sys.H.allFinite() || !sys.b.allFinite()) {
        throw AssemblyError("dense assembly produced non-finite entries");
    }
    return sys;
}

ErrorEstimate solve_dense(const DenseSystem& system) {
    Eigen::LLT<Eigen::MatrixXd> llt(system.H);
    if (llt.info() != Eigen::Success) {
        throw FactorizationError("Cholesky factorization failed: system is not positive definite");
    }
    return ErrorEstimate{llt.solve(system.b)};
}

double objective(const CalibrationProblem& problem, const CalibrationParams& params,
                 const Eigen::VectorXd& v) {
    const std::size_t n = problem.size();
    const double lambda = lambda_from_alpha(params.alpha, problem.sensor_count(), n);
    const Eigen::VectorXd e = sensor_residuals(problem);
    double data = 0.0;
    double smooth = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        for (std::size_t k = 0; k < problem.sensor_count(); ++k) {
            const double w = affinity(problem.point(i),
                                      problem.point(problem.sensors()[k].mesh_index), params);
            const double d = v[ii] - e[static_cast<Eigen::Index>(k)];
            data += w * d * d;
        }
        for (std::size_t j = 0; j < n; ++j) {
            const double d = v[ii] - v[static_cast<Eigen::Index>(j)];
            smooth += affinity(problem.point(i), problem.point(j), params) * d * d;
        }
    }
    return data / lambda + smooth;
}

} // namespace fieldcal
