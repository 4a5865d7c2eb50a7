#include "fieldcal/lowrank_solver.hpp"

#include "fieldcal/errors.hpp"
#include "fieldcal/kernel.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

namespace fieldcal {

namespace {

constexpr double kInitialRidge = 1e-8;
constexpr double kMaxRidge = 1e-2;

std::vector<std::size_t> strided(std::size_t total, std::size_t count) {
    std::vector<std::size_t> out;
    out.reserve(count);
    for (std::size_t c = 0; c < count; ++c) {
        out.push_back(((2 * c + 1) * total) / (2 * count));
    }
    return out;
}

std::vector<std::size_t> grid_stratified(const GridLayout& grid, std::size_t n) {
    const double aspect = static_cast<double>(grid.nx) / static_cast<double>(grid.ny);
    auto kx = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(n) * aspect)));
    kx = std::clamp<std::size_t>(kx, 1, std::min(n, grid.nx));
    const std::size_t ky = std::clamp<std::size_t>(n / kx, 1, grid.ny);

    std::vector<std::size_t> out;
    out.reserve(n);
    const auto cols = strided(grid.nx, kx);
    for (const auto row : strided(grid.ny, ky)) {
        for (const auto col : cols) {
            out.push_back(row * grid.nx + col);
        }
    }

    // Leftovers (n not a product kx*ky) go on uniform strides over the
    // point list, stepping past anything already taken.
    std::vector<bool> used(grid.size(), false);
    for (const auto idx : out) used[idx] = true;
    for (auto idx : strided(grid.size(), n - out.size())) {
        while (used[idx]) idx = (idx + 1) % grid.size();
        used[idx] = true;
        out.push_back(idx);
    }
    return out;
}

double squared_distance(const Position& a, const Position& b) {
    double d2 = 0.0;
    for (int c = 0; c < 3; ++c) {
        const double d = a[c] - b[c];
        d2 += d * d;
    }
    return d2;
}

std::string describe(const std::vector<std::size_t>& samples) {
    std::ostringstream os;
    os << "{";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (i == 8 && samples.size() > 10) {
            os << ", ... (" << samples.size() << " total)";
            break;
        }
        os << (i ? ", " : "") << samples[i];
    }
    os << "}";
    return os.str();
}

// Applies (D - Z A^{-1} Z^T)^{-1} through the Woodbury identity with the
// n x n capacitance matrix P = A - Z^T D^{-1} Z. P is positive definite
// whenever the approximated system is; otherwise an LU fallback is used.
class WoodburySolver {
public:
    WoodburySolver(const LowRankFactors& factors, const Eigen::VectorXd& diag)
        : factors_(factors), diag_(diag), inv_diag_(diag.cwiseInverse()) {
        const Eigen::Index rank = factors.Z.cols();
        Eigen::MatrixXd capacitance = factors.regularized_A();
        {
            const Eigen::MatrixXd scaled = inv_diag_.cwiseSqrt().asDiagonal() * factors.Z;
            capacitance.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose(), -1.0);
        }
        capacitance.triangularView<Eigen::StrictlyUpper>() =
            capacitance.triangularView<Eigen::StrictlyLower>().transpose();

        llt_.compute(capacitance);
        if (llt_.info() == Eigen::Success) {
            return;
        }
        use_lu_ = true;
        lu_.compute(capacitance);
        const double rcond = lu_.rcond();
        if (!(rcond > static_cast<double>(rank) * std::numeric_limits<double>::epsilon())) {
            throw RankDeficiencyError("Woodbury capacitance matrix is singular (rcond " +
                                      std::to_string(rcond) + ") for samples " +
                                      describe(factors.samples));
        }
    }

    Eigen::VectorXd apply(const Eigen::VectorXd& rhs) const {
        const Eigen::VectorXd scaled = inv_diag_.cwiseProduct(rhs);
        const Eigen::VectorXd projected = factors_.Z.transpose() * scaled;
        const Eigen::VectorXd inner = use_lu_ ? Eigen::VectorXd(lu_.solve(projected))
                                              : Eigen::VectorXd(llt_.solve(projected));
        return scaled + inv_diag_.cwiseProduct(factors_.Z * inner);
    }

    // (D - Z A^{-1} Z^T) x without forming the matrix.
    Eigen::VectorXd multiply(const Eigen::VectorXd& x) const {
        const Eigen::VectorXd projected = factors_.Z.transpose() * x;
        return diag_.cwiseProduct(x) -
               factors_.Z * factors_.A_factor.solve(projected);
    }

private:
    const LowRankFactors& factors_;
    Eigen::VectorXd diag_;
    Eigen::VectorXd inv_diag_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    bool use_lu_ = false;
};

} // namespace

Eigen::MatrixXd LowRankFactors::regularized_A() const {
    Eigen::MatrixXd out = A;
    out.diagonal().array() += ridge;
    return out;
}

std::vector<std::size_t> select_samples(const CalibrationProblem& problem, std::size_t n) {
    const std::size_t total = problem.size();
    if (n == 0 || n > total) {
        throw DomainError("sample count " + std::to_string(n) + " outside [1, " +
                          std::to_string(total) + "]");
    }
    std::vector<std::size_t> samples;
    if (n == total) {
        samples.resize(total);
        std::iota(samples.begin(), samples.end(), std::size_t{0});
        return samples;
    }
    samples = problem.grid() ? grid_stratified(*problem.grid(), n) : strided(total, n);

    const auto& sensors = problem.sensors();
    if (n >= sensors.size()) {
        std::vector<bool> replaced(samples.size(), false);
        // A sensor that already is a sample claims that slot first.
        std::vector<bool> placed(sensors.size(), false);
        for (std::size_t k = 0; k < sensors.size(); ++k) {
            const auto it = std::find(samples.begin(), samples.end(), sensors[k].mesh_index);
            if (it != samples.end()) {
                replaced[static_cast<std::size_t>(it - samples.begin())] = true;
                placed[k] = true;
            }
        }
        for (std::size_t k = 0; k < sensors.size(); ++k) {
            if (placed[k]) continue;
            const auto& where = problem.point(sensors[k].mesh_index).position;
            std::size_t best = samples.size();
            double best_d2 = std::numeric_limits<double>::infinity();
            for (std::size_t s = 0; s < samples.size(); ++s) {
                if (replaced[s]) continue;
                const double d2 = squared_distance(where, problem.point(samples[s]).position);
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = s;
                }
            }
            samples[best] = sensors[k].mesh_index;
            replaced[best] = true;
        }
    }
    std::sort(samples.begin(), samples.end());
    return samples;
}

LowRankFactors build_factors(const CalibrationProblem& problem,
                             const std::vector<std::size_t>& samples,
                             const CalibrationParams& params) {
    if (samples.empty()) {
        throw DomainError("sample list is empty");
    }
    {
        auto sorted = samples;
        std::sort(sorted.begin(), sorted.end());
        if (sorted.back() >= problem.size()) {
            throw DomainError("sample index " + std::to_string(sorted.back()) + " out of range");
        }
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw DomainError("sample list contains duplicates");
        }
    }

    LowRankFactors f;
    f.samples = samples;
    const auto n = static_cast<Eigen::Index>(problem.size());
    const auto rank = static_cast<Eigen::Index>(samples.size());
    f.Z.resize(n, rank);
    for (Eigen::Index c = 0; c < rank; ++c) {
        const auto& anchor = problem.point(samples[static_cast<std::size_t>(c)]);
        for (Eigen::Index i = 0; i < n; ++i) {
            f.Z(i, c) = 2.0 * affinity(problem.point(static_cast<std::size_t>(i)), anchor, params);
        }
    }
    f.A.resize(rank, rank);
    for (Eigen::Index r = 0; r < rank; ++r) {
        f.A.row(r) = f.Z.row(static_cast<Eigen::Index>(samples[static_cast<std::size_t>(r)]));
    }

    // Plain Cholesky first; only a pivot block that fails to factor gets the
    // ridge, starting at kInitialRidge * trace(A)/n.
    const double mean_diag = f.A.trace() / static_cast<double>(rank);
    f.ridge = 0.0;
    f.A_factor.compute(f.A);
    if (f.A_factor.info() == Eigen::Success) {
        return f;
    }
    for (double scale = kInitialRidge; scale <= kMaxRidge * (1.0 + 1e-9); scale *= 10.0) {
        f.ridge = scale * mean_diag;
        f.A_factor.compute(f.regularized_A());
        if (f.A_factor.info() == Eigen::Success) {
            return f;
        }
    }
    throw RankDeficiencyError("pivot block cannot be factored even with ridge " +
                              std::to_string(f.ridge) + " for samples " + describe(samples));
}

Eigen::VectorXd row_sums_lowrank(const LowRankFactors& factors) {
    const Eigen::VectorXd projected = factors.Z.transpose() * Eigen::VectorXd::Ones(factors.Z.rows());
    Eigen::VectorXd sums = factors.Z * factors.A_factor.solve(projected);
    return sums.cwiseMax(kMinRowSum);
}

ErrorEstimate solve_lowrank(const CalibrationProblem& problem, const CalibrationParams& params) {
    const std::size_t n = problem.size();
    params.validate(n);
    if (params.rowsum_mode == RowSumMode::exact && n > params.exact_rowsum_cap) {
        throw DomainError("exact row sums are limited to " +
                          std::to_string(params.exact_rowsum_cap) + " points; problem has " +
                          std::to_string(n));
    }
    const double lambda = lambda_from_alpha(params.alpha, problem.sensor_count(), n);

    const Eigen::MatrixXd sensor_cols = sensor_affinity_columns(problem, params);
    const Eigen::VectorXd b = (sensor_cols * sensor_residuals(problem)) / lambda;
    Eigen::VectorXd diag = sensor_cols.rowwise().sum() / lambda;

    const auto factors = build_factors(problem, select_samples(problem, params.sample_count(n)), params);
    if (params.rowsum_mode == RowSumMode::exact) {
        diag += 2.0 * row_sums_exact(problem, params);
    } else {
        diag += row_sums_lowrank(factors);
    }
    if (!diag.allFinite() || diag.minCoeff() <= 0.0) {
        throw InvariantViolation("diagonal of the low-rank system is not strictly positive");
    }

    const WoodburySolver solver(factors, diag);
    Eigen::VectorXd v = solver.apply(b);
    // One step of iterative refinement against the approximated operator.
    v += solver.apply(b - solver.multiply(v));
    if (!v.allFinite()) {
        throw RankDeficiencyError("low-rank solve produced non-finite values for samples " +
                                  describe(factors.samples));
    }
    return ErrorEstimate{std::move(v)};
}

} // namespace fieldcal
