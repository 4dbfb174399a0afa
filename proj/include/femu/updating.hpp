#pragma once

#include "femu/beam_model.hpp"
#include "femu/modal.hpp"
#include "femu/optimizers.hpp"
#include "femu/surrogate.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace femu {

class UpdatingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Everything needed to score a set of element moduli against measured modes.
struct UpdatingProblem {
    BeamStructure structure;
    Bounds bounds;                      // one entry per updating parameter, N/m^2
    ModalData measured;                 // elastic modes, shapes at the observed rows
    std::vector<std::size_t> observed;  // reduced DOF rows compared in the MAC
    std::size_t n_modes = 0;
    CostWeights weights;
    double target_cost = 0.0;           // RSM stops once a full evaluation reaches this
    Eigen::VectorXd initial_parameters; // the model before updating
    // Element updated by each parameter; empty means parameter e drives element e.
    // Elements not listed keep their nominal modulus.
    std::vector<std::size_t> parameter_elements;
    std::size_t spare_modes = 3; // extra elastic modes offered to the pairing step

    std::size_t parameter_count() const { return bounds.dimension(); }
    Eigen::VectorXd moduli_for(const Eigen::VectorXd& parameters) const;
    void validate() const;
};

/// Model prediction paired against the measured modes.
struct ModelEvaluation {
    ModalData paired; // column i pairs with measured mode i
    Pairing pairing;
    double cost = 0.0;
};

ModelEvaluation evaluate_model(const UpdatingProblem& problem, const Eigen::VectorXd& parameters);

/// Assemble, solve, pair and score. Charges the budget exactly once. A failed
/// eigen-solve yields +infinity.
double full_objective(const UpdatingProblem& problem, const Eigen::VectorXd& parameters,
                      EvalBudget& budget);

enum class GammaMode { Relative, Absolute };

/// ((w_m - w_0) / w_m)^2 per mode, or (f_m - f_0)^2 in Hz^2 for Absolute.
Eigen::VectorXd compute_gamma_weights(const ModalData& initial, const ModalData& measured,
                                      GammaMode mode = GammaMode::Relative);

enum class SamplingScheme { LatinHypercube, Uniform };

/// n x d design inside the box.
Eigen::MatrixXd sample_design(const Bounds& bounds, std::size_t n, std::uint64_t seed,
                              SamplingScheme scheme = SamplingScheme::LatinHypercube);

struct RsmConfig {
    std::size_t n_samples = 150;
    std::size_t max_iterations = 10;
    std::size_t initial_cycles = 150;
    std::size_t incremental_cycles = 5;
    std::size_t hidden_units = 8;
    GaConfig ga;
    SamplingScheme sampling = SamplingScheme::LatinHypercube;
    std::uint64_t sampler_seed = 1;
    std::uint64_t net_seed = 1;
    TrainOptions training;
    void validate(std::size_t parameter_count) const;
};

struct RsmIteration {
    std::size_t iteration = 0;
    double predicted_cost = 0.0; // surrogate value at the inner GA optimum
    double evaluated_cost = 0.0; // full-model cost of the same point
    double best_cost = 0.0;      // best full-model cost so far
    double training_loss = 0.0;  // after this iteration's fit
    std::size_t evaluations = 0; // cumulative FE evaluations
    bool replaced = false;       // the worst sample was replaced
};

struct UpdateReport {
    std::string method;
    Eigen::VectorXd initial_parameters;
    Eigen::VectorXd updated_parameters;
    Eigen::VectorXd measured_hz;
    Eigen::VectorXd initial_hz;
    Eigen::VectorXd updated_hz;
    Eigen::VectorXd initial_error_pct; // signed, (model - measured) / measured
    Eigen::VectorXd updated_error_pct;
    double mean_mac_initial = 0.0;
    double mean_mac_updated = 0.0;
    double initial_cost = 0.0;
    double final_cost = 0.0;
    std::size_t fe_evaluations = 0;
    std::vector<HistoryRow> history;
    std::vector<RsmIteration> rsm_history;
    double wall_time_s = 0.0;
    bool truncated = false;
    bool target_reached = false;
    bool aborted = false;
    std::vector<std::string> diagnostics;
    std::optional<SurrogateNet> surrogate;
    std::map<std::string, std::string> settings; // method configuration and seeds

    double mean_abs_initial_error() const { return initial_error_pct.cwiseAbs().mean(); }
    double mean_abs_updated_error() const { return updated_error_pct.cwiseAbs().mean(); }
};

UpdateReport rsm_update(const UpdatingProblem& problem, const RsmConfig& cfg);
/// Warm start from an already evaluated design of cfg.n_samples rows. Those
/// evaluations are included in the reported FE count.
UpdateReport rsm_update(const UpdatingProblem& problem, const RsmConfig& cfg, const TrainingSet& design);
UpdateReport ga_update(const UpdatingProblem& problem, const GaConfig& cfg);
UpdateReport sa_update(const UpdatingProblem& problem, const SaConfig& cfg);

} // namespace femu
