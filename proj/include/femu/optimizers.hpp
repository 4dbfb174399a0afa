#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace femu {

using Rng = std::mt19937_64;
using Objective = std::function<double(const Eigen::VectorXd&)>;

class OptimizerError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Bounds {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    std::size_t dimension() const { return static_cast<std::size_t>(lower.size()); }
    Eigen::VectorXd range() const { return upper - lower; }
    bool contains(const Eigen::VectorXd& x) const;
    Eigen::VectorXd clamp(const Eigen::VectorXd& x) const;
    void validate() const;
};

struct GaConfig {
    std::size_t population_size = 50;
    std::size_t generations = 200;
    double selection_q = 0.08;
    double mutation_rate = 0.003;
    double crossover_rate = 0.6;
    double mutation_shape_b = 2.0;
    std::uint64_t seed = 1;
    void validate() const;
};

struct SaConfig {
    double initial_temperature = 1e-3;  // cost units
    double cooling_factor = 0.9;
    std::size_t steps_per_temperature = 0; // 0 selects 4 x dimension
    std::size_t n_runs = 3;
    double step_scale = 0.1;            // proposal std as a fraction of the bound range
    double min_temperature = 1e-8;
    std::uint64_t seed = 1;
    void validate() const;
    std::size_t steps_for(std::size_t dimension) const;
};

/// Counts objective evaluations, optionally against a cap.
struct EvalBudget {
    std::size_t calls = 0;
    std::optional<std::size_t> limit;

    bool exhausted() const { return limit && calls >= *limit; }
};

struct HistoryRow {
    std::size_t step = 0;        // generation, or temperature level within a run
    std::size_t run = 0;         // annealing run; always 0 for the GA
    double best_cost = 0.0;      // best ever seen so far
    double mean_cost = 0.0;      // population mean, or mean proposal cost at this level
    std::size_t evaluations = 0; // cumulative
    double temperature = std::numeric_limits<double>::quiet_NaN();
};

struct OptimizeResult {
    Eigen::VectorXd best;
    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<HistoryRow> history;
    bool truncated = false;
    std::vector<std::string> diagnostics;
};

// GA operators ---------------------------------------------------------------

std::pair<Eigen::VectorXd, Eigen::VectorXd> arithmetic_crossover(const Eigen::VectorXd& p1,
                                                                 const Eigen::VectorXd& p2,
                                                                 double a);
std::pair<Eigen::VectorXd, Eigen::VectorXd> arithmetic_crossover(const Eigen::VectorXd& p1,
                                                                 const Eigen::VectorXd& p2,
                                                                 Rng& rng);

/// Step y * (1 - r^((1 - t/T)^b)) toward a bound at distance y.
double nonuniform_delta(double y, std::size_t t, std::size_t max_generation, double b, double r);

/// Perturbs one random coordinate toward a randomly chosen bound.
Eigen::VectorXd nonuniform_mutate(const Eigen::VectorXd& x, std::size_t t, std::size_t max_generation,
                                  const Bounds& bounds, double b, Rng& rng);

/// Rank r (0 = best) has probability q' (1-q)^r with q' = q / (1 - (1-q)^n).
std::vector<double> geometric_probabilities(std::size_t n, double q);

/// Index into the ascending ranked list.
std::size_t geometric_select(std::span<const double> ranked_costs, double q, Rng& rng);

// Metropolis rule --------------------------------------------------------------

/// exp(-(e_new - e_old)/T) for uphill moves, 1 otherwise.
double acceptance_probability(double e_new, double e_old, double temperature);
bool metropolis_accept(double e_new, double e_old, double temperature, Rng& rng);

// Drivers ----------------------------------------------------------------------

/// Real-coded GA. Generation 0 is the random initial population; every
/// generation evaluates the whole population, so a full run costs
/// population_size * generations objective calls. The incumbent best is carried
/// into each new population.
OptimizeResult ga_optimize(const Objective& objective, const Bounds& bounds, const GaConfig& cfg,
                           EvalBudget& budget);

/// Restarted simulated annealing with geometric cooling.
OptimizeResult sa_optimize(const Objective& objective, const Bounds& bounds, const SaConfig& cfg,
                           EvalBudget& budget);

} // namespace femu
