#include "femu/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace femu {

bool Bounds::contains(const Eigen::VectorXd& x) const {
    return x.size() == lower.size() && (x.array() >= lower.array()).all() &&
           (x.array() <= upper.array()).all();
}

Eigen::VectorXd Bounds::clamp(const Eigen::VectorXd& x) const {
    return x.cwiseMax(lower).cwiseMin(upper);
}

void Bounds::validate() const {
    if (lower.size() == 0 || lower.size() != upper.size())
        throw OptimizerError("bounds need equal, non-zero lengths");
    if (!lower.allFinite() || !upper.allFinite() || !(lower.array() < upper.array()).all())
        throw OptimizerError("bounds need lower < upper in every coordinate");
}

void GaConfig::validate() const {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (population_size < 2) throw OptimizerError("ga: population_size must be at least 2");
    if (generations < 1) throw OptimizerError("ga: generations must be at least 1");
    if (!(selection_q > 0.0 && selection_q < 1.0)) throw OptimizerError("ga: selection_q must lie in (0, 1)");
    if (!prob(mutation_rate) || !prob(crossover_rate))
        throw OptimizerError("ga: rates must lie in [0, 1]");
    if (!(mutation_shape_b > 0)) throw OptimizerError("ga: mutation_shape_b must be positive");
}

void SaConfig::validate() const {
    if (!(cooling_factor > 0.0 && cooling_factor < 1.0))
        throw OptimizerError("sa: cooling_factor must lie in (0, 1)");
    if (n_runs < 1) throw OptimizerError("sa: n_runs must be at least 1");
    if (!(step_scale > 0.0 && step_scale <= 1.0)) throw OptimizerError("sa: step_scale must lie in (0, 1]");
    if (!(initial_temperature > 0) || !(min_temperature > 0))
        throw OptimizerError("sa: temperatures must be positive");
    if (!(min_temperature <= initial_temperature))
        throw OptimizerError("sa: min_temperature exceeds initial_temperature");
}

std::size_t SaConfig::steps_for(std::size_t dimension) const {
    return steps_per_temperature > 0 ? steps_per_temperature : 4 * dimension;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> arithmetic_crossover(const Eigen::VectorXd& p1,
                                                                 const Eigen::VectorXd& p2,
                                                                 double a) {
    if (p1.size() != p2.size()) throw OptimizerError("crossover parents differ in length");
    return {a * p1 + (1.0 - a) * p2, (1.0 - a) * p1 + a * p2};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> arithmetic_crossover(const Eigen::VectorXd& p1,
                                                                 const Eigen::VectorXd& p2,
                                                                 Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return arithmetic_crossover(p1, p2, u(rng));
}

double nonuniform_delta(double y, std::size_t t, std::size_t max_generation, double b, double r) {
    const double frac = max_generation == 0 ? 1.0 : std::min(1.0, double(t) / double(max_generation));
    const double exponent = std::pow(1.0 - frac, b);
    return y * (1.0 - std::pow(r, exponent));
}

Eigen::VectorXd nonuniform_mutate(const Eigen::VectorXd& x, std::size_t t, std::size_t max_generation,
                                  const Bounds& bounds, double b, Rng& rng) {
    std::uniform_int_distribution<Eigen::Index> pick(0, x.size() - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Eigen::Index i = pick(rng);
    const bool up = u(rng) < 0.5;
    const double r = u(rng);
    Eigen::VectorXd out = x;
    if (up)
        out[i] = x[i] + nonuniform_delta(bounds.upper[i] - x[i], t, max_generation, b, r);
    else
        out[i] = x[i] - nonuniform_delta(x[i] - bounds.lower[i], t, max_generation, b, r);
    out[i] = std::clamp(out[i], bounds.lower[i], bounds.upper[i]);
    return out;
}

std::vector<double> geometric_probabilities(std::size_t n, double q) {
    if (n == 0) throw OptimizerError("geometric selection from an empty list");
    if (!(q > 0.0 && q < 1.0)) throw OptimizerError("geometric selection needs 0 < q < 1");
    const double q_norm = q / (1.0 - std::pow(1.0 - q, double(n)));
    std::vector<double> p(n);
    for (std::size_t r = 0; r < n; ++r) p[r] = q_norm * std::pow(1.0 - q, double(r));
    return p;
}

std::size_t geometric_select(std::span<const double> ranked_costs, double q, Rng& rng) {
    const std::size_t n = ranked_costs.size();
    if (n == 1) {
        (void)geometric_probabilities(n, q);
        return 0;
    }
    const std::vector<double> p = geometric_probabilities(n, q);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double draw = u(rng);
    for (std::size_t r = 0; r + 1 < n; ++r) {
        if (draw < p[r]) return r;
        draw -= p[r];
    }
    return n - 1;
}

double acceptance_probability(double e_new, double e_old, double temperature) {
    if (e_new <= e_old) return 1.0;
    if (!(temperature > 0)) return 0.0;
    return std::exp(-(e_new - e_old) / temperature);
}

bool metropolis_accept(double e_new, double e_old, double temperature, Rng& rng) {
    if (e_new < e_old) return true;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return u(rng) < acceptance_probability(e_new, e_old, temperature);
}

namespace {

Eigen::VectorXd uniform_point(const Bounds& bounds, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::VectorXd x(bounds.lower.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x[i] = bounds.lower[i] + u(rng) * (bounds.upper[i] - bounds.lower[i]);
    return bounds.clamp(x);
}

} // namespace

OptimizeResult ga_optimize(const Objective& objective, const Bounds& bounds, const GaConfig& cfg,
                           EvalBudget& budget) {
    bounds.validate();
    cfg.validate();
    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t pop = cfg.population_size;

    OptimizeResult res;
    std::vector<Eigen::VectorXd> population(pop);
    for (auto& x : population) x = uniform_point(bounds, rng);

    std::vector<double> costs(pop);
    for (std::size_t gen = 0; gen < cfg.generations; ++gen) {
        // evaluate
        std::size_t evaluated = 0;
        for (std::size_t i = 0; i < pop; ++i) {
            if (budget.exhausted()) {
                res.truncated = true;
                break;
            }
            ++budget.calls;
            costs[i] = objective(population[i]);
            if (!std::isfinite(costs[i])) costs[i] = std::numeric_limits<double>::infinity();
            ++evaluated;
            if (costs[i] < res.best_cost) {
                res.best_cost = costs[i];
                res.best = population[i];
            }
        }
        if (evaluated > 0) {
            double mean = 0.0;
            std::size_t finite = 0;
            for (std::size_t i = 0; i < evaluated; ++i)
                if (std::isfinite(costs[i])) {
                    mean += costs[i];
                    ++finite;
                }
            res.history.push_back({gen, 0, res.best_cost,
                                   finite ? mean / double(finite) : std::numeric_limits<double>::infinity(),
                                   budget.calls, std::numeric_limits<double>::quiet_NaN()});
        }
        if (res.truncated) {
            res.diagnostics.push_back("ga: evaluation budget exhausted in generation " + std::to_string(gen));
            break;
        }
        if (gen + 1 == cfg.generations) break;

        // rank, select, recombine
        std::vector<std::size_t> order(pop);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return costs[a] < costs[b]; });
        std::vector<double> ranked(pop);
        for (std::size_t r = 0; r < pop; ++r) ranked[r] = costs[order[r]];

        std::vector<Eigen::VectorXd> next(pop);
        for (std::size_t i = 0; i < pop; ++i) next[i] = population[order[geometric_select(ranked, cfg.selection_q, rng)]];
        for (std::size_t i = 0; i + 1 < pop; i += 2)
            if (u(rng) < cfg.crossover_rate) {
                auto [c1, c2] = arithmetic_crossover(next[i], next[i + 1], rng);
                next[i] = bounds.clamp(c1);
                next[i + 1] = bounds.clamp(c2);
            }
        for (std::size_t i = 0; i < pop; ++i)
            if (u(rng) < cfg.mutation_rate)
                next[i] = nonuniform_mutate(next[i], gen + 1, cfg.generations, bounds, cfg.mutation_shape_b, rng);
        // elitism of one
        if (res.best.size() != 0) next[0] = res.best;
        population = std::move(next);
    }
    if (res.best.size() == 0) {
        res.best = population.front();
        res.diagnostics.push_back("ga: no evaluation was possible");
    }
    return res;
}

OptimizeResult sa_optimize(const Objective& objective, const Bounds& bounds, const SaConfig& cfg,
                           EvalBudget& budget) {
    bounds.validate();
    cfg.validate();
    Rng rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t steps = cfg.steps_for(bounds.dimension());
    const Eigen::VectorXd sigma = cfg.step_scale * bounds.range();

    OptimizeResult res;
    auto evaluate = [&](const Eigen::VectorXd& x, double& out) {
        if (budget.exhausted()) {
            res.truncated = true;
            return false;
        }
        ++budget.calls;
        out = objective(x);
        if (out < res.best_cost) {
            res.best_cost = out;
            res.best = x;
        }
        return true;
    };

    for (std::size_t run = 0; run < cfg.n_runs && !res.truncated; ++run) {
        Eigen::VectorXd current = uniform_point(bounds, rng);
        double e_current = 0.0;
        if (!evaluate(current, e_current)) break;
        if (!std::isfinite(e_current)) {
            res.diagnostics.push_back("sa: run " + std::to_string(run) + " started from a failed evaluation");
            e_current = std::numeric_limits<double>::infinity();
        }

        std::size_t level = 0;
        for (double temp = cfg.initial_temperature; temp >= cfg.min_temperature && !res.truncated;
             temp *= cfg.cooling_factor, ++level) {
            double sum = 0.0;
            std::size_t counted = 0;
            for (std::size_t s = 0; s < steps; ++s) {
                Eigen::VectorXd proposal = current;
                for (Eigen::Index i = 0; i < proposal.size(); ++i) proposal[i] += sigma[i] * normal(rng);
                proposal = bounds.clamp(proposal);
                double e_new = 0.0;
                if (!evaluate(proposal, e_new)) break;
                if (!std::isfinite(e_new)) {
                    res.diagnostics.push_back("sa: rejected a proposal with a non-finite cost");
                    continue;
                }
                sum += e_new;
                ++counted;
                if (metropolis_accept(e_new, e_current, temp, rng)) {
                    current = std::move(proposal);
                    e_current = e_new;
                }
            }
            res.history.push_back({level, run, res.best_cost,
                                   counted ? sum / double(counted) : std::numeric_limits<double>::quiet_NaN(),
                                   budget.calls, temp});
        }
    }
    if (res.truncated) res.diagnostics.push_back("sa: evaluation budget exhausted");
    if (res.best.size() == 0) res.best = uniform_point(bounds, rng);
    return res;
}

} // namespace femu
