#include "femu/modal.hpp"
#include "femu/scenario.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace femu;
namespace o = femu::oracle;

namespace {

SystemMatrices pencil(const Eigen::MatrixXd& k, const Eigen::MatrixXd& m) {
    SystemMatrices s;
    s.stiffness = k;
    s.mass = m;
    s.dof_count = static_cast<std::size_t>(k.rows());
    for (std::size_t i = 0; i < s.dof_count; ++i) s.free_dofs.push_back(i);
    return s;
}

ModalData modes_from(const Eigen::VectorXd& w, const Eigen::MatrixXd& shapes) {
    ModalData d;
    d.frequencies = w;
    d.shapes = shapes;
    d.damping_ratios = Eigen::VectorXd::Zero(w.size());
    for (Eigen::Index r = 0; r < shapes.rows(); ++r) d.coordinates.push_back(static_cast<std::size_t>(r));
    d.rigid_body.assign(static_cast<std::size_t>(w.size()), false);
    return d;
}

} // namespace

TEST(SolveModes, TwoByTwoMatchesCharacteristicPolynomial) {
    Eigen::MatrixXd k(2, 2);
    k << 2, -1, -1, 1;
    const ModalData m = solve_modes(pencil(k, Eigen::MatrixXd::Identity(2, 2)), 2);
    EXPECT_NEAR(m.frequencies[0] * m.frequencies[0], (3 - std::sqrt(5.0)) / 2, 1e-12);
    EXPECT_NEAR(m.frequencies[1] * m.frequencies[1], (3 + std::sqrt(5.0)) / 2, 1e-12);
    const auto roots = o::determinant_roots(k, Eigen::MatrixXd::Identity(2, 2), 4.0);
    ASSERT_EQ(roots.size(), 2u);
    EXPECT_NEAR(roots[0], 0.381966011250105, 1e-9);
    EXPECT_NEAR(roots[1], 2.618033988749895, 1e-9);
}

TEST(SolveModes, IdentityPencilGivesUnitEigenvalues) {
    std::mt19937_64 rng(11);
    const Eigen::MatrixXd m = o::random_spd(5, rng);
    const ModalData d = solve_modes(pencil(m, m), 5);
    for (double w : d.frequencies) EXPECT_NEAR(w * w, 1.0, 1e-10);
}

TEST(SolveModes, MatchesIndependentOraclesOnRandomPencils) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 30; ++trial) {
        const Eigen::Index n = 2 + trial % 5;
        const Eigen::MatrixXd k = o::random_spd(n, rng);
        const Eigen::MatrixXd m = o::random_spd(n, rng, 1.0);
        const ModalData d = solve_modes(pencil(k, m), static_cast<std::size_t>(n));
        const o::OraclePairs ref = o::general_solver_oracle(k, m);
        for (Eigen::Index i = 0; i < n; ++i) {
            EXPECT_NEAR(d.frequencies[i] * d.frequencies[i], ref.lambda[i], 1e-8 * ref.lambda[i]);
            EXPECT_NEAR(o::mac_of(d.shapes.col(i), ref.vectors.col(i)), 1.0, 1e-8);
        }
        if (n <= 3) {
            const auto roots = o::determinant_roots(k, m, 1.05 * ref.lambda[n - 1], 50000);
            ASSERT_EQ(static_cast<Eigen::Index>(roots.size()), n);
            for (Eigen::Index i = 0; i < n; ++i)
                EXPECT_NEAR(d.frequencies[i] * d.frequencies[i], roots[static_cast<std::size_t>(i)], 1e-8 * roots[static_cast<std::size_t>(i)]);
        }
    }
}

TEST(SolveModes, ResidualMassNormalisationAndOrthogonality) {
    const BeamStructure s = h_frame({}, 7e10);
    const SystemMatrices sys = assemble(s, s.nominal_moduli());
    const ModalData d = solve_modes(sys, sys.dof_count);
    d.validate();
    const Eigen::MatrixXd g = d.shapes.transpose() * sys.mass * d.shapes;
    EXPECT_LT((g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff(), 1e-8);
    for (Eigen::Index i = 0; i < d.frequencies.size(); ++i) {
        if (d.rigid_body[static_cast<std::size_t>(i)]) continue;
        const Eigen::VectorXd phi = d.shapes.col(i);
        const Eigen::VectorXd kphi = sys.stiffness * phi;
        const double lambda = d.frequencies[i] * d.frequencies[i];
        EXPECT_LT((kphi - lambda * sys.mass * phi).norm() / kphi.norm(), 1e-8);
    }
}

TEST(SolveModes, RejectsIndefiniteMassAndBadCounts) {
    Eigen::MatrixXd m(2, 2);
    m << 1, 0, 0, -1;
    EXPECT_THROW(solve_modes(pencil(Eigen::MatrixXd::Identity(2, 2), m), 2), ModalError);
    EXPECT_THROW(solve_modes(pencil(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)), 3),
                 ModalError);
    EXPECT_THROW(solve_modes(pencil(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)), 0),
                 ModalError);
}

TEST(SolveModes, ConvergenceErrorCarriesCapAndResidual) {
    const EigenConvergenceError e(90, 0.25);
    EXPECT_EQ(e.iteration_cap, 90u);
    EXPECT_EQ(e.residual, 0.25);
    EXPECT_NE(std::string(e.what()).find("90"), std::string::npos);
}

TEST(Mac, IdentityForOrthonormalColumns) {
    std::mt19937_64 rng(5);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(o::random_spd(4, rng)).householderQ();
    const Eigen::MatrixXd m = mac(q, q);
    EXPECT_LT((m - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Mac, ScaleInvarianceAndHandValues) {
    Eigen::VectorXd a(3);
    a << 0.3, -1.2, 2.0;
    EXPECT_NEAR(mac(a, Eigen::VectorXd(-3.7 * a))(0, 0), 1.0, 1e-15);
    Eigen::VectorXd x(2), y(2);
    x << 1, 0;
    y << 1, 1;
    EXPECT_NEAR(mac(x, y)(0, 0), 0.5, 1e-15);

    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0, 1);
    Eigen::MatrixXd p(6, 3), q(6, 3);
    for (auto& v : p.reshaped()) v = n(rng);
    for (auto& v : q.reshaped()) v = n(rng);
    const Eigen::MatrixXd base = mac(p, q);
    Eigen::MatrixXd ps = p, qs = q;
    ps.col(0) *= -4.0;
    qs.col(2) *= 1e-3;
    EXPECT_LT((mac(ps, qs) - base).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_GE(base.minCoeff(), 0.0);
    EXPECT_LE(base.maxCoeff(), 1.0);
    for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < 3; ++j)
            EXPECT_NEAR(base(i, j), o::mac_of(p.col(i), q.col(j)), 1e-12);
    EXPECT_NEAR(mac(p, p).diagonal().minCoeff(), 1.0, 1e-12);
}

TEST(Mac, RejectsZeroShapesAndRowMismatch) {
    EXPECT_THROW(mac(Eigen::MatrixXd::Zero(3, 1), Eigen::MatrixXd::Ones(3, 1)), ModalError);
    EXPECT_THROW(mac(Eigen::MatrixXd::Ones(3, 1), Eigen::MatrixXd::Ones(4, 1)), ModalError);
}

TEST(Cost, HandValues) {
    const ModalData meas = modes_from(Eigen::VectorXd::Constant(1, 100.0), Eigen::MatrixXd::Ones(2, 1));
    const ModalData calc = modes_from(Eigen::VectorXd::Constant(1, 90.0), Eigen::MatrixXd::Ones(2, 1));
    EXPECT_NEAR(cost(calc, meas, {Eigen::VectorXd::Ones(1), 0.0}), 0.01, 1e-15);
    EXPECT_EQ(cost(meas, meas, {Eigen::VectorXd::Ones(1), 0.75}), 0.0);
    EXPECT_EQ(cost(calc, modes_from(Eigen::VectorXd::Constant(1, 90.0), Eigen::MatrixXd::Ones(2, 1)),
                   {Eigen::VectorXd::Zero(1), 0.75}),
              0.0);
}

TEST(Cost, ShapeScaleInvariantAndMonotoneInFrequencyError) {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n(0, 1);
    Eigen::MatrixXd s(5, 3), t(5, 3);
    for (auto& v : s.reshaped()) v = n(rng);
    for (auto& v : t.reshaped()) v = n(rng);
    Eigen::Vector3d wm(10, 20, 30);
    const ModalData meas = modes_from(wm, s);
    const CostWeights w{Eigen::Vector3d(0.5, 1.0, 2.0), 0.75};
    Eigen::MatrixXd ts = t;
    ts.col(1) *= -8.0;
    const ModalData c1 = modes_from(Eigen::Vector3d(11, 19, 33), t);
    const ModalData c2 = modes_from(Eigen::Vector3d(11, 19, 33), ts);
    EXPECT_NEAR(cost(c1, meas, w), cost(c2, meas, w), 1e-12);
    double prev = -1.0;
    for (double gap : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        const double e = cost(modes_from(Eigen::Vector3d(10, 20 + gap, 30), s), meas, w);
        EXPECT_GT(e, prev);
        prev = e;
    }
    EXPECT_GE(cost(c1, meas, w), 0.0);
}

TEST(Cost, RejectsZeroMeasuredFrequencyAndCountMismatch) {
    const ModalData zero = modes_from(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Ones(2, 1));
    EXPECT_THROW(cost(zero, zero, {Eigen::VectorXd::Ones(1), 0.0}), ModalError);
    const ModalData two = modes_from(Eigen::Vector2d(1, 2), Eigen::MatrixXd::Identity(2, 2));
    const ModalData one = modes_from(Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Ones(2, 1));
    EXPECT_THROW(cost(two, one, {Eigen::VectorXd::Ones(1), 0.0}), ModalError);
}

TEST(PairModes, IdentityAndUnswap) {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> n(0, 1);
    Eigen::MatrixXd s(6, 3);
    for (auto& v : s.reshaped()) v = n(rng);
    const ModalData meas = modes_from(Eigen::Vector3d(1, 2, 3), s);
    EXPECT_EQ(pair_modes(meas, meas).calc_index, (std::vector<std::size_t>{0, 1, 2}));
    Eigen::MatrixXd swapped = s;
    swapped.col(0).swap(swapped.col(2));
    const ModalData calc = modes_from(Eigen::Vector3d(1, 2, 3), swapped);
    EXPECT_EQ(pair_modes(calc, meas).calc_index, (std::vector<std::size_t>{2, 1, 0}));
}

TEST(PairModes, DrawsOnlyFromElasticModes) {
    const BeamStructure st = h_frame({}, 7e10);
    const SystemMatrices sys = assemble(st, st.nominal_moduli());
    const ModalData all = solve_modes(sys, 8);
    ASSERT_EQ(all.mode_count() - all.elastic_count(), 3u);
    const ModalData meas = all.elastic().select({0, 1, 2, 3, 4});
    const Pairing p = pair_modes(all, meas);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_FALSE(all.rigid_body[p.calc_index[i]]);
        EXPECT_EQ(p.calc_index[i], i + 3);
        EXPECT_NEAR(p.mac[i], 1.0, 1e-12);
    }
    EXPECT_TRUE(p.diagnostics.empty());
}

TEST(PairModes, LowMacProducesDiagnostic) {
    Eigen::MatrixXd a(2, 1), b(2, 1);
    a << 1, 0;
    b << 0.2, 1;
    const Pairing p = pair_modes(modes_from(Eigen::VectorXd::Ones(1), a), modes_from(Eigen::VectorXd::Ones(1), b));
    EXPECT_FALSE(p.diagnostics.empty());
}

TEST(Frf, HandValuesAndZeroFrequency) {
    const ModalData one = modes_from(Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Ones(1, 1));
    const FrfResult r = frf_inertance(one, 0, 0, {0.0, std::sqrt(2.0)});
    EXPECT_EQ(r.values[0], std::complex<double>(0.0, 0.0));
    EXPECT_NEAR(r.values[1].real(), 2.0, 1e-12);
    EXPECT_NEAR(r.values[1].imag(), 0.0, 1e-12);
}

TEST(Frf, UndampedResonanceIsReportedAsSingular) {
    const ModalData one = modes_from(Eigen::VectorXd::Constant(1, 3.0), Eigen::MatrixXd::Ones(1, 1));
    const FrfResult r = frf_inertance(one, 0, 0, {1.0, 3.0, 5.0});
    EXPECT_EQ(r.singular_points, (std::vector<std::size_t>{1}));
    EXPECT_TRUE(std::isnan(r.values[1].real()));
    EXPECT_TRUE(std::isfinite(r.values[0].real()));
}

TEST(Frf, DampedPeakSitsAtTheNaturalFrequency) {
    ModalData one = modes_from(Eigen::VectorXd::Constant(1, 40.0), Eigen::MatrixXd::Ones(1, 1));
    one.damping_ratios[0] = 0.01;
    std::vector<double> grid;
    for (int i = 0; i <= 4000; ++i) grid.push_back(20.0 + 40.0 * i / 4000.0);
    const FrfResult r = frf_inertance(one, 0, 0, grid);
    EXPECT_TRUE(r.singular_points.empty());
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        ASSERT_TRUE(std::isfinite(std::abs(r.values[i])));
        if (std::abs(r.values[i]) > std::abs(r.values[best])) best = i;
    }
    EXPECT_NEAR(grid[best] / 40.0, 1.0, 0.02);
}

TEST(Frf, ReciprocityAndModalSum) {
    const BeamStructure st = h_frame({}, 7e10);
    ModalData d = solve_modes(assemble(st, st.nominal_moduli()), 10).elastic();
    d.damping_ratios = Eigen::VectorXd::Constant(d.frequencies.size(), 0.02);
    const std::vector<double> grid{100.0, 500.0, 1200.0};
    const FrfResult a = frf_inertance(d, 3, 17, grid);
    const FrfResult b = frf_inertance(d, 17, 3, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_NEAR(std::abs(a.values[i] - b.values[i]), 0.0, 1e-12 * std::abs(a.values[i]));
        std::complex<double> sum = 0;
        const double w = grid[i];
        for (Eigen::Index m = 0; m < d.frequencies.size(); ++m) {
            const double wi = d.frequencies[m];
            sum += -w * w * d.shapes(3, m) * d.shapes(17, m) /
                   std::complex<double>(wi * wi - w * w, 2.0 * 0.02 * wi * w);
        }
        EXPECT_NEAR(std::abs(sum - a.values[i]), 0.0, 1e-10 * std::abs(sum));
    }
}
