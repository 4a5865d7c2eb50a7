#include "fieldcal/dense_solver.hpp"
#include "fieldcal/errors.hpp"
#include "fieldcal/kernel.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace fieldcal;

namespace {

MeshPoint at(double x, double y, double value) { return {{x, y, 0.0}, value}; }

CalibrationProblem with_residuals(const CalibrationProblem& base, const std::vector<double>& e) {
    std::vector<SensorObservation> sensors = base.sensors();
    for (std::size_t k = 0; k < sensors.size(); ++k) {
        sensors[k].observed = base.point(sensors[k].mesh_index).value - e[k];
    }
    return base.with_sensors(std::move(sensors));
}

} // namespace

TEST(AssembleDense, SinglePoint) {
    for (const double alpha : {0.01, 0.3, 1.0}) {
        const CalibrationProblem p({at(0, 0, 23.0)}, {{0, 21.0}});
        CalibrationParams params;
        params.alpha = alpha;
        const auto sys = assemble_dense(p, params);
        EXPECT_EQ(sys.lambda, alpha);
        EXPECT_NEAR(sys.H(0, 0), 1.0 / alpha, 1e-12 / alpha);
        EXPECT_NEAR(sys.b[0], 2.0 / alpha, 1e-12 / alpha);
        EXPECT_EQ(solve_dense(sys).v_hat[0], 2.0);
    }
}

TEST(AssembleDense, TwoPointHandAssembly) {
    // Value gap 1 with sigma_m 2, distance 0.5 with sigma_d 1: w = e^-0.75.
    // alpha 1, m 1, N 2 gives lambda 0.5; the residual is 0.5.
    const CalibrationProblem p({at(0, 0, 25.0), at(0.5, 0, 26.0)}, {{0, 24.5}});
    CalibrationParams params;
    params.sigma_m = 2.0;
    params.sigma_d = 1.0;
    params.alpha = 1.0;
    const auto sys = assemble_dense(p, params);
    const double w = std::exp(-0.75);
    EXPECT_EQ(sys.lambda, 0.5);
    EXPECT_NEAR(sys.H(0, 0), 2.0 + 2.0 * w, 1e-14);
    EXPECT_NEAR(sys.H(0, 1), -2.0 * w, 1e-14);
    EXPECT_NEAR(sys.H(1, 0), -2.0 * w, 1e-14);
    EXPECT_NEAR(sys.H(1, 1), 4.0 * w, 1e-14);
    EXPECT_NEAR(sys.b[0], 1.0, 1e-14);
    EXPECT_NEAR(sys.b[1], w, 1e-14);
    EXPECT_NEAR(sys.D[0], 4.0 + 2.0 * w, 1e-14);
    EXPECT_NEAR(sys.D[1], 2.0 + 4.0 * w, 1e-14);

    const auto v = solve_dense(sys).v_hat;
    EXPECT_NEAR(v[0], 0.5, 1e-14);
    EXPECT_NEAR(v[1], 0.5, 1e-14);
}

TEST(AssembleDense, MatchesMaterializedReference) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 15; ++trial) {
        const auto inst = oracle::random_instance(rng, 5 + 17 * static_cast<std::size_t>(trial), 1 + trial % 6);
        const auto sys = assemble_dense(inst.problem, inst.params);
        const auto ref = oracle::reference_system(inst.problem, inst.params);
        const double scale = ref.H.cwiseAbs().maxCoeff();
        EXPECT_LE((sys.H - ref.H).cwiseAbs().maxCoeff(), 1e-12 * scale);
        EXPECT_LE((sys.b - ref.b).norm(), 1e-12 * (1.0 + ref.b.norm()));
        EXPECT_EQ((sys.H - sys.H.transpose()).cwiseAbs().maxCoeff(), 0.0);
        EXPECT_GT(sys.D.minCoeff(), 0.0);
    }
}

TEST(SolveDense, MatchesLuReferenceAndSmallResidual) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const auto inst = oracle::random_instance(rng, 10 + 14 * static_cast<std::size_t>(trial), 1 + trial % 5);
        const auto sys = assemble_dense(inst.problem, inst.params);
        const auto v = solve_dense(sys).v_hat;
        const auto ref = oracle::reference_solve(inst.problem, inst.params);
        EXPECT_LE((v - ref).norm(), 1e-8 * ref.norm());
        EXPECT_LE((sys.H * v - sys.b).norm(), 1e-10 * sys.b.norm());
    }
}

TEST(SolveDense, ConstantResidualIsReproduced) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const auto inst = oracle::random_instance(rng, 60, 4);
        const double c = -1.75 + 0.5 * trial;
        const auto p = with_residuals(inst.problem, std::vector<double>(4, c));
        const auto v = solve_dense(assemble_dense(p, inst.params)).v_hat;
        EXPECT_LE((v.array() - c).abs().maxCoeff(), 1e-10);
    }
}

TEST(SolveDense, ZeroResidualGivesZero) {
    std::mt19937_64 rng(9);
    const auto inst = oracle::random_instance(rng, 50, 3);
    const auto p = with_residuals(inst.problem, {0.0, 0.0, 0.0});
    EXPECT_TRUE(solve_dense(assemble_dense(p, inst.params)).v_hat.isZero(0.0));
}

TEST(SolveDense, TwoSensorMaximumPrinciple) {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 10; ++trial) {
        const auto inst = oracle::random_instance(rng, 120, 2);
        const auto p = with_residuals(inst.problem, {0.0, 1.0});
        const auto v = solve_dense(assemble_dense(p, inst.params)).v_hat;
        EXPECT_GE(v.minCoeff(), -1e-10);
        EXPECT_LE(v.maxCoeff(), 1.0 + 1e-10);
        const auto ref = oracle::reference_solve(p, inst.params);
        EXPECT_GE(ref.minCoeff(), -1e-10);
        EXPECT_LE(ref.maxCoeff(), 1.0 + 1e-10);
    }
}

TEST(SolveDense, PermutationEquivariant) {
    std::mt19937_64 rng(12);
    const auto inst = oracle::random_instance(rng, 70, 3);
    std::vector<std::size_t> perm(inst.problem.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<MeshPoint> points(perm.size());
    std::vector<std::size_t> inverse(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        points[i] = inst.problem.point(perm[i]);
        inverse[perm[i]] = i;
    }
    std::vector<SensorObservation> sensors;
    for (const auto& s : inst.problem.sensors()) sensors.push_back({inverse[s.mesh_index], s.observed});
    const CalibrationProblem permuted(points, sensors);

    const auto v = solve_dense(assemble_dense(inst.problem, inst.params)).v_hat;
    const auto vp = solve_dense(assemble_dense(permuted, inst.params)).v_hat;
    for (std::size_t i = 0; i < perm.size(); ++i) {
        EXPECT_NEAR(vp[static_cast<Eigen::Index>(i)], v[static_cast<Eigen::Index>(perm[i])], 1e-9);
    }
}

TEST(SolveDense, ShiftEquivariant) {
    std::mt19937_64 rng(13);
    const auto inst = oracle::random_instance(rng, 60, 3);
    const auto v = solve_dense(assemble_dense(inst.problem, inst.params)).v_hat;
    const auto e = sensor_residuals(inst.problem);
    const double shift = 0.8;
    const auto p = with_residuals(inst.problem, {e[0] + shift, e[1] + shift, e[2] + shift});
    const auto vs = solve_dense(assemble_dense(p, inst.params)).v_hat;
    EXPECT_LE(((vs - v).array() - shift).abs().maxCoeff(), 1e-9);
}

TEST(Objective, MatchesOracleAndIsMinimizedBySolution) {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 5; ++trial) {
        const auto inst = oracle::random_instance(rng, 25, 3);
        const auto v = solve_dense(assemble_dense(inst.problem, inst.params)).v_hat;
        const double j = objective(inst.problem, inst.params, v);
        EXPECT_NEAR(j, oracle::objective(inst.problem, inst.params, v), 1e-9 * (1.0 + std::abs(j)));
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            Eigen::VectorXd moved = v;
            moved[i] += 1e-3;
            EXPECT_GE(objective(inst.problem, inst.params, moved), j);
        }
        EXPECT_LE(oracle::objective_gradient(inst.problem, inst.params, v).norm(),
                  1e-6 * (1.0 + oracle::objective_gradient(inst.problem, inst.params,
                                                           Eigen::VectorXd::Zero(v.size()))
                                    .norm()));
    }
}

TEST(AssembleDense, SizeCapIsEnforced) {
    std::vector<MeshPoint> points;
    for (int i = 0; i < 12; ++i) points.push_back(at(i, 0, 20.0));
    const CalibrationProblem p(points, {{0, 19.0}});
    CalibrationParams params;
    params.dense_size_cap = 11;
    try {
        assemble_dense(p, params);
        FAIL() << "expected SizeCapExceeded";
    } catch (const SizeCapExceeded& e) {
        EXPECT_NE(std::string(e.what()).find("lowrank"), std::string::npos);
    }
    params.dense_size_cap = 12;
    EXPECT_NO_THROW(assemble_dense(p, params));
}

TEST(AssembleDense, NonFiniteEntriesAreRejected) {
    // The residual itself overflows.
    const CalibrationProblem p({at(0, 0, 1.5e308), at(1, 0, 0.0)}, {{0, -1.5e308}});
    EXPECT_THROW(assemble_dense(p, CalibrationParams{}), AssemblyError);
}

TEST(AssembleDense, PositiveDefiniteOnRandomProblems) {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<std::size_t> size(1, 64);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = size(rng);
        const auto inst = oracle::random_instance(rng, n, 1 + static_cast<std::size_t>(trial) % std::min<std::size_t>(n, 4));
        const auto system = assemble_dense(inst.problem, inst.params);
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(system.H);
        ASSERT_EQ(ldlt.info(), Eigen::Success) << "trial " << trial;
        EXPECT_GT(ldlt.vectorD().minCoeff(), 0.0) << "trial " << trial;
        EXPECT_NO_THROW(solve_dense(system)) << "trial " << trial;
    }
}
