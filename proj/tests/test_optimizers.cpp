#include "femu/optimizers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace femu;

namespace {

Bounds unit_box(Eigen::Index d) { return {Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d)}; }

// Counts calls and records whether every candidate stayed inside the box.
struct Probe {
    Bounds box;
    std::function<double(const Eigen::VectorXd&)> f;
    std::size_t calls = 0;
    bool outside = false;
    Objective objective() {
        return [this](const Eigen::VectorXd& x) {
            ++calls;
            if (!box.contains(x)) outside = true;
            return f(x);
        };
    }
};

double sphere(const Eigen::VectorXd& x) { return (x.array() - 0.3).square().sum(); }

bool non_increasing(const std::vector<HistoryRow>& h) {
    for (std::size_t i = 1; i < h.size(); ++i)
        if (h[i].best_cost > h[i - 1].best_cost) return false;
    return true;
}

} // namespace

TEST(Crossover, HandValues) {
    const Eigen::Vector2d p1(0, 0), p2(1, 2);
    auto [c1, c2] = arithmetic_crossover(p1, p2, 0.25);
    EXPECT_TRUE(c1.isApprox(Eigen::Vector2d(0.75, 1.5)));
    EXPECT_TRUE(c2.isApprox(Eigen::Vector2d(0.25, 0.5)));
    auto [a1, a2] = arithmetic_crossover(p1, p2, 1.0);
    EXPECT_EQ(a1, Eigen::VectorXd(p1));
    EXPECT_EQ(a2, Eigen::VectorXd(p2));
    auto [m1, m2] = arithmetic_crossover(p1, p2, 0.5);
    EXPECT_EQ(m1, m2);
    EXPECT_THROW(arithmetic_crossover(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3), 0.5), OptimizerError);
}

TEST(Crossover, ChildrenStayOnTheSegment) {
    Rng rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 1000; ++t) {
        Eigen::VectorXd p1(3), p2(3);
        for (auto& v : p1) v = u(rng);
        for (auto& v : p2) v = u(rng);
        auto [c1, c2] = arithmetic_crossover(p1, p2, rng);
        EXPECT_TRUE(unit_box(3).contains(c1));
        EXPECT_TRUE(unit_box(3).contains(c2));
        EXPECT_LT((c1 + c2 - p1 - p2).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Mutation, IdentityAtFinalGenerationAndAtTheBound) {
    EXPECT_EQ(nonuniform_delta(0.7, 10, 10, 2.0, 0.3), 0.0);
    EXPECT_EQ(nonuniform_delta(0.0, 1, 10, 2.0, 0.3), 0.0);
    Rng rng(1);
    const Bounds box = unit_box(1);
    for (int t = 0; t < 200; ++t) {
        const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.4);
        EXPECT_EQ(nonuniform_mutate(x, 50, 50, box, 2.0, rng), x);
    }
}

TEST(Mutation, MagnitudeContractsWithGeneration) {
    Rng rng(99);
    const Bounds box = unit_box(4);
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(4, 0.5);
    double prev = 1e9;
    for (std::size_t t : {0u, 10u, 30u, 50u, 70u, 90u}) {
        double sum = 0;
        for (int k = 0; k < 10000; ++k) {
            const Eigen::VectorXd y = nonuniform_mutate(x, t, 100, box, 2.0, rng);
            EXPECT_TRUE(box.contains(y));
            EXPECT_LE((y - x).cwiseAbs().count(), 1);
            sum += (y - x).cwiseAbs().sum();
        }
        EXPECT_LT(sum / 10000.0, prev) << "t=" << t;
        prev = sum / 10000.0;
    }
}

TEST(GeometricSelection, ProbabilitiesAndSmallCases) {
    const auto p = geometric_probabilities(2, 0.5);
    EXPECT_NEAR(p[0], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(p[1], 1.0 / 3.0, 1e-15);
    for (std::size_t n : {1u, 2u, 7u, 50u, 200u}) {
        double s = 0;
        for (double v : geometric_probabilities(n, 0.08)) s += v;
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
    Rng rng(0);
    const std::vector<double> one{3.0};
    for (int k = 0; k < 100; ++k) EXPECT_EQ(geometric_select(one, 0.3, rng), 0u);
    EXPECT_THROW(geometric_probabilities(0, 0.5), OptimizerError);
    EXPECT_THROW(geometric_probabilities(3, 1.0), OptimizerError);
}

TEST(GeometricSelection, EmpiricalBestFrequency) {
    Rng rng(2);
    std::vector<double> ranked(50);
    for (std::size_t i = 0; i < 50; ++i) ranked[i] = double(i);
    int best = 0;
    const int draws = 100000;
    for (int k = 0; k < draws; ++k) best += geometric_select(ranked, 0.08, rng) == 0;
    const double q_norm = 0.08 / (1.0 - std::pow(0.92, 50));
    EXPECT_NEAR(q_norm, 0.0813, 1e-4);
    EXPECT_NEAR(double(best) / draws, q_norm, 0.01);
}

TEST(Metropolis, AcceptanceRule) {
    EXPECT_EQ(acceptance_probability(1.0, 2.0, 0.1), 1.0);
    EXPECT_EQ(acceptance_probability(2.0, 2.0, 0.1), 1.0);
    EXPECT_NEAR(acceptance_probability(2.5, 2.0, 1.0), std::exp(-0.5), 1e-15);
    EXPECT_LT(acceptance_probability(3.0, 2.0, 1e-6), 1e-300);
    Rng rng(4);
    int up = 0;
    const int trials = 100000;
    for (int k = 0; k < trials; ++k) up += metropolis_accept(1.5, 1.0, 1.0, rng);
    EXPECT_NEAR(double(up) / trials, std::exp(-0.5), 0.01);
    for (int k = 0; k < 100; ++k) EXPECT_TRUE(metropolis_accept(0.5, 1.0, 1e-9, rng));
}

TEST(Ga, SphereConvergesAcrossSeeds) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        GaConfig cfg;
        cfg.seed = seed;
        EvalBudget budget;
        EXPECT_LT(ga_optimize(sphere, unit_box(5), cfg, budget).best_cost, 1e-3) << "seed " << seed;
    }
}

TEST(Ga, BoundsAccountingAndHistoryAcrossSeeds) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Probe p{unit_box(5), sphere};
        GaConfig cfg;
        cfg.seed = seed;
        EvalBudget budget;
        const OptimizeResult r = ga_optimize(p.objective(), p.box, cfg, budget);
        EXPECT_FALSE(p.outside);
        EXPECT_EQ(budget.calls, p.calls);
        EXPECT_EQ(budget.calls, 50u * 200u);
        EXPECT_TRUE(non_increasing(r.history));
        EXPECT_EQ(r.history.size(), 200u);
        EXPECT_EQ(r.best_cost, sphere(r.best));
        EXPECT_LT(r.best_cost, 0.05);
    }
}

TEST(Ga, OneDimensionalMinimiserMatchesGrid) {
    auto f = [](const Eigen::VectorXd& x) { return (x[0] - 0.5) * (x[0] - 0.5); };
    double grid_best = 0, grid_cost = 1e9;
    for (int i = 0; i <= 10000; ++i) {
        const double x = i / 10000.0;
        if ((x - 0.5) * (x - 0.5) < grid_cost) grid_cost = (x - 0.5) * (x - 0.5), grid_best = x;
    }
    EvalBudget budget;
    const OptimizeResult r = ga_optimize(f, unit_box(1), GaConfig{}, budget);
    EXPECT_LT(std::abs(r.best[0] - grid_best), 0.01);
}

TEST(Ga, ConstantObjective) {
    EvalBudget budget;
    const OptimizeResult r =
        ga_optimize([](const Eigen::VectorXd&) { return 4.2; }, unit_box(3), GaConfig{}, budget);
    EXPECT_EQ(r.best_cost, 4.2);
    EXPECT_TRUE(unit_box(3).contains(r.best));
}

TEST(Ga, BudgetTruncation) {
    GaConfig cfg;
    EvalBudget budget;
    budget.limit = 120;
    Probe p{unit_box(2), sphere};
    const OptimizeResult r = ga_optimize(p.objective(), p.box, cfg, budget);
    EXPECT_TRUE(r.truncated);
    EXPECT_EQ(budget.calls, 120u);
    EXPECT_EQ(p.calls, 120u);
    EXPECT_FALSE(r.diagnostics.empty());
}

TEST(Ga, DeterministicPerSeed) {
    GaConfig cfg;
    cfg.generations = 40;
    EvalBudget b1, b2;
    const OptimizeResult a = ga_optimize(sphere, unit_box(4), cfg, b1);
    const OptimizeResult b = ga_optimize(sphere, unit_box(4), cfg, b2);
    EXPECT_EQ(a.best, b.best);
    ASSERT_EQ(a.history.size(), b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) EXPECT_EQ(a.history[i].mean_cost, b.history[i].mean_cost);
}

TEST(Ga, ConfigValidation) {
    GaConfig c;
    c.generations = 0;
    EXPECT_THROW(c.validate(), OptimizerError);
    c = {};
    c.population_size = 1;
    EXPECT_THROW(c.validate(), OptimizerError);
    c = {};
    c.mutation_rate = 1.5;
    EXPECT_THROW(c.validate(), OptimizerError);
}

TEST(Sa, SphereBoundsAccountingAndRuns) {
    Probe p{unit_box(3), sphere};
    SaConfig cfg;
    cfg.initial_temperature = 0.1;
    cfg.min_temperature = 1e-6;
    EvalBudget budget;
    const OptimizeResult r = sa_optimize(p.objective(), p.box, cfg, budget);
    EXPECT_LT(r.best_cost, 1e-3);
    EXPECT_FALSE(p.outside);
    EXPECT_EQ(budget.calls, p.calls);
    EXPECT_TRUE(non_increasing(r.history));
    std::size_t levels = 0;
    for (double t = cfg.initial_temperature; t >= cfg.min_temperature; t *= cfg.cooling_factor) ++levels;
    std::size_t runs = 0;
    for (const auto& h : r.history) runs = std::max(runs, h.run + 1);
    EXPECT_EQ(runs, 3u);
    // one start plus steps_per_temperature proposals per level, per run
    EXPECT_EQ(budget.calls, 3 * (1 + levels * cfg.steps_for(3)));
    EXPECT_EQ(cfg.steps_for(3), 12u);
}

TEST(Sa, NonFiniteProposalsAreRejected) {
    auto f = [](const Eigen::VectorXd& x) {
        return x[0] > 0.8 ? std::numeric_limits<double>::infinity() : (x[0] - 0.2) * (x[0] - 0.2);
    };
    SaConfig cfg;
    cfg.initial_temperature = 0.01;
    cfg.min_temperature = 1e-5;
    EvalBudget budget;
    const OptimizeResult r = sa_optimize(f, unit_box(1), cfg, budget);
    EXPECT_TRUE(std::isfinite(r.best_cost));
    EXPECT_LE(r.best[0], 0.8);
}

TEST(Sa, BudgetAndDeterminism) {
    SaConfig cfg;
    EvalBudget budget;
    budget.limit = 77;
    const OptimizeResult r = sa_optimize(sphere, unit_box(2), cfg, budget);
    EXPECT_TRUE(r.truncated);
    EXPECT_EQ(budget.calls, 77u);
    EvalBudget b1, b2;
    EXPECT_EQ(sa_optimize(sphere, unit_box(2), cfg, b1).best, sa_optimize(sphere, unit_box(2), cfg, b2).best);
}

TEST(Sa, ConfigValidation) {
    SaConfig c;
    c.cooling_factor = 1.0;
    EXPECT_THROW(c.validate(), OptimizerError);
    c = {};
    c.n_runs = 0;
    EXPECT_THROW(c.validate(), OptimizerError);
    c = {};
    c.step_scale = 0.0;
    EXPECT_THROW(c.validate(), OptimizerError);
}
