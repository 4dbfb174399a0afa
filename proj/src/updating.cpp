#include "femu/updating.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace femu {

Eigen::VectorXd UpdatingProblem::moduli_for(const Eigen::VectorXd& parameters) const {
    if (static_cast<std::size_t>(parameters.size()) != parameter_count())
        throw UpdatingError("expected " + std::to_string(parameter_count()) + " parameters, got " +
                            std::to_string(parameters.size()));
    if (parameter_elements.empty()) return parameters;
    Eigen::VectorXd moduli = structure.nominal_moduli();
    for (std::size_t p = 0; p < parameter_elements.size(); ++p)
        moduli[static_cast<Eigen::Index>(parameter_elements[p])] = parameters[static_cast<Eigen::Index>(p)];
    return moduli;
}

void UpdatingProblem::validate() const {
    structure.validate();
    bounds.validate();
    if (parameter_elements.empty()) {
        if (bounds.dimension() != structure.element_count())
            throw UpdatingError("bounds dimension differs from the element count");
    } else {
        if (parameter_elements.size() != bounds.dimension())
            throw UpdatingError("parameter map and bounds differ in length");
        for (std::size_t e : parameter_elements)
            if (e >= structure.element_count()) throw UpdatingError("parameter map names a missing element");
    }
    if (n_modes == 0 || measured.mode_count() != n_modes)
        throw UpdatingError("measured data must hold exactly n_modes modes");
    if (static_cast<std::size_t>(measured.shapes.rows()) != observed.size())
        throw UpdatingError("measured shapes and observed coordinates differ in size");
    weights.validate(n_modes);
    if (!(target_cost >= 0)) throw UpdatingError("target_cost must be non-negative");
    if (initial_parameters.size() != bounds.lower.size() || !bounds.contains(initial_parameters))
        throw UpdatingError("initial parameters must lie inside the bounds");
}

ModelEvaluation evaluate_model(const UpdatingProblem& problem, const Eigen::VectorXd& parameters) {
    const SystemMatrices sys = assemble(problem.structure, problem.moduli_for(parameters));
    // room for up to three rigid-body modes plus the spare elastic ones
    const std::size_t wanted = std::min(sys.dof_count, problem.n_modes + 3 + problem.spare_modes);
    const ModalData all = solve_modes(sys, wanted).at_coordinates(problem.observed);

    ModelEvaluation ev;
    ev.pairing = pair_modes(all, problem.measured);
    ev.paired = all.select(ev.pairing.calc_index);
    ev.cost = cost(ev.paired, problem.measured, problem.weights);
    return ev;
}

double full_objective(const UpdatingProblem& problem, const Eigen::VectorXd& parameters,
                      EvalBudget& budget) {
    ++budget.calls;
    try {
        return evaluate_model(problem, parameters).cost;
    } catch (const ModalError&) {
        return std::numeric_limits<double>::infinity();
    } catch (const ModelError&) {
        return std::numeric_limits<double>::infinity();
    }
}

Eigen::VectorXd compute_gamma_weights(const ModalData& initial, const ModalData& measured, GammaMode mode) {
    if (initial.mode_count() != measured.mode_count())
        throw UpdatingError("gamma weights need paired mode sets of equal size");
    Eigen::VectorXd gamma(measured.frequencies.size());
    for (Eigen::Index i = 0; i < gamma.size(); ++i) {
        const double wm = measured.frequencies[i];
        if (wm == 0.0) throw UpdatingError("measured frequency of zero");
        if (mode == GammaMode::Relative) {
            const double rel = (wm - initial.frequencies[i]) / wm;
            gamma[i] = rel * rel;
        } else {
            const double diff_hz = (wm - initial.frequencies[i]) / (2.0 * std::numbers::pi);
            gamma[i] = diff_hz * diff_hz;
        }
    }
    return gamma;
}

Eigen::MatrixXd sample_design(const Bounds& bounds, std::size_t n, std::uint64_t seed, SamplingScheme scheme) {
    bounds.validate();
    if (n == 0) throw UpdatingError("design needs at least one point");
    const auto d = static_cast<Eigen::Index>(bounds.dimension());
    const auto rows = static_cast<Eigen::Index>(n);
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd x(rows, d);
    const Eigen::VectorXd range = bounds.range();
    if (scheme == SamplingScheme::Uniform) {
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < d; ++c) x(r, c) = bounds.lower[c] + u(rng) * range[c];
        return x;
    }
    std::vector<std::size_t> perm(n);
    for (Eigen::Index c = 0; c < d; ++c) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const double stratum = double(perm[static_cast<std::size_t>(r)]);
            double v = bounds.lower[c] + (stratum + u(rng)) / double(n) * range[c];
            // keep the point strictly inside its own stratum despite rounding
            const double top = bounds.lower[c] + (stratum + 1.0) / double(n) * range[c];
            if (v >= top) v = std::nextafter(top, bounds.lower[c]);
            x(r, c) = v;
        }
    }
    return x;
}

void RsmConfig::validate(std::size_t parameter_count) const {
    if (max_iterations < 1) throw UpdatingError("rsm: max_iterations must be at least 1");
    if (initial_cycles < 1 || incremental_cycles < 1) throw UpdatingError("rsm: training cycles must be positive");
    const std::size_t weights = hidden_units * (parameter_count + 1) + hidden_units + 1;
    if (n_samples <= weights)
        throw UpdatingError("rsm: n_samples (" + std::to_string(n_samples) +
                            ") must exceed the surrogate weight count (" + std::to_string(weights) + ")");
    ga.validate();
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void describe(const GaConfig& c, const std::string& prefix, std::map<std::string, std::string>& out) {
    out[prefix + "population_size"] = std::to_string(c.population_size);
    out[prefix + "generations"] = std::to_string(c.generations);
    out[prefix + "selection_q"] = fmt(c.selection_q);
    out[prefix + "mutation_rate"] = fmt(c.mutation_rate);
    out[prefix + "crossover_rate"] = fmt(c.crossover_rate);
    out[prefix + "mutation_shape_b"] = fmt(c.mutation_shape_b);
    out[prefix + "seed"] = std::to_string(c.seed);
}

Eigen::VectorXd to_hz(const Eigen::VectorXd& w) { return w / (2.0 * std::numbers::pi); }

// Fills the modal comparison fields. These evaluations are for reporting only
// and are not charged to the FE budget.
void finish_report(const UpdatingProblem& problem, const Eigen::VectorXd& updated, UpdateReport& rep) {
    rep.initial_parameters = problem.initial_parameters;
    rep.updated_parameters = updated;
    rep.measured_hz = to_hz(problem.measured.frequencies);

    const ModelEvaluation before = evaluate_model(problem, problem.initial_parameters);
    const ModelEvaluation after = evaluate_model(problem, updated);
    rep.initial_hz = to_hz(before.paired.frequencies);
    rep.updated_hz = to_hz(after.paired.frequencies);
    rep.initial_error_pct = 100.0 * ((rep.initial_hz - rep.measured_hz).array() / rep.measured_hz.array()).matrix();
    rep.updated_error_pct = 100.0 * ((rep.updated_hz - rep.measured_hz).array() / rep.measured_hz.array()).matrix();
    const Eigen::MatrixXd mac_before = mac(before.paired.shapes, problem.measured.shapes);
    const Eigen::MatrixXd mac_after = mac(after.paired.shapes, problem.measured.shapes);
    rep.mean_mac_initial = mac_before.diagonal().mean();
    rep.mean_mac_updated = mac_after.diagonal().mean();
    rep.initial_cost = before.cost;
    rep.final_cost = after.cost;
    for (const auto& d : after.pairing.diagnostics) rep.diagnostics.push_back("pairing: " + d);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

namespace {

UpdateReport rsm_run(const UpdatingProblem& problem, const RsmConfig& cfg, const TrainingSet* design) {
    const auto t0 = std::chrono::steady_clock::now();
    problem.validate();
    const std::size_t d = problem.parameter_count();
    cfg.validate(d);

    UpdateReport rep;
    rep.method = "rsm";
    describe(cfg.ga, "rsm.ga.", rep.settings);
    rep.settings["rsm.n_samples"] = std::to_string(cfg.n_samples);
    rep.settings["rsm.max_iterations"] = std::to_string(cfg.max_iterations);
    rep.settings["rsm.initial_cycles"] = std::to_string(cfg.initial_cycles);
    rep.settings["rsm.incremental_cycles"] = std::to_string(cfg.incremental_cycles);
    rep.settings["rsm.hidden_units"] = std::to_string(cfg.hidden_units);
    rep.settings["rsm.sampling"] = cfg.sampling == SamplingScheme::LatinHypercube ? "lhs" : "uniform";
    rep.settings["rsm.sampler_seed"] = std::to_string(cfg.sampler_seed);
    rep.settings["rsm.net_seed"] = std::to_string(cfg.net_seed);
    rep.settings["rsm.trainer"] = cfg.training.trainer == Trainer::ScaledConjugateGradient ? "scg" : "gd";
    rep.settings["target_cost"] = fmt(problem.target_cost);

    EvalBudget budget;
    TrainingSet data;
    if (design) {
        // a design evaluated earlier; its FE evaluations still count
        data = *design;
        budget.calls = data.size();
        rep.settings["rsm.design"] = "precomputed";
    } else {
        data.inputs = sample_design(problem.bounds, cfg.n_samples, cfg.sampler_seed, cfg.sampling);
        data.targets.resize(static_cast<Eigen::Index>(cfg.n_samples));
        for (Eigen::Index k = 0; k < data.inputs.rows(); ++k)
            data.targets[k] = full_objective(problem, data.inputs.row(k).transpose(), budget);
    }

    Eigen::VectorXd best = problem.initial_parameters;
    double best_cost = std::numeric_limits<double>::infinity();
    bool have_best = false;
    for (Eigen::Index k = 0; k < data.inputs.rows(); ++k) {
        const Eigen::VectorXd x = data.inputs.row(k).transpose();
        if (data.targets[k] < best_cost) {
            best_cost = data.targets[k];
            best = x;
            have_best = true;
        }
    }
    // failed evaluations would poison the fit; give them the worst finite cost
    if (!data.targets.allFinite()) {
        double worst = 0.0;
        for (Eigen::Index k = 0; k < data.targets.size(); ++k)
            if (std::isfinite(data.targets[k])) worst = std::max(worst, data.targets[k]);
        for (Eigen::Index k = 0; k < data.targets.size(); ++k)
            if (!std::isfinite(data.targets[k])) data.targets[k] = worst;
        rep.diagnostics.push_back("rsm: failed design evaluations were assigned the worst finite cost");
    }

    SurrogateNet net = init_net(d, cfg.hidden_units, problem.bounds.lower, problem.bounds.upper,
                                cfg.net_seed, cfg.n_samples);
    for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
        net.output_scaling = OutputScaling::fit(data.targets);
        const TrainResult tr = train(net, data, it == 0 ? cfg.initial_cycles : cfg.incremental_cycles, cfg.training);
        for (const auto& msg : tr.diagnostics) rep.diagnostics.push_back("rsm training: " + msg);
        if (tr.failed) {
            rep.aborted = true;
            rep.diagnostics.push_back("rsm: surrogate training failed at iteration " + std::to_string(it));
            break;
        }
        net = tr.net;

        GaConfig inner_cfg = cfg.ga;
        inner_cfg.seed = cfg.ga.seed + it;
        EvalBudget inner_budget;
        const OptimizeResult inner = ga_optimize(
            [&net](const Eigen::VectorXd& x) { return forward(net, x); }, problem.bounds, inner_cfg, inner_budget);

        const double evaluated = full_objective(problem, inner.best, budget);
        if (evaluated < best_cost || !have_best) {
            best_cost = evaluated;
            best = inner.best;
            have_best = true;
        }

        RsmIteration row;
        row.iteration = it;
        row.predicted_cost = inner.best_cost;
        row.evaluated_cost = evaluated;
        row.best_cost = best_cost;
        row.training_loss = tr.final_loss;
        row.evaluations = budget.calls;

        if (evaluated <= problem.target_cost) {
            rep.target_reached = true;
            rep.rsm_history.push_back(row);
            break;
        }
        // replace the first sample holding the worst cost
        Eigen::Index worst = 0;
        for (Eigen::Index k = 1; k < data.targets.size(); ++k)
            if (data.targets[k] > data.targets[worst]) worst = k;
        if (evaluated < data.targets[worst]) {
            data.inputs.row(worst) = inner.best.transpose();
            data.targets[worst] = evaluated;
            row.replaced = true;
        }
        rep.rsm_history.push_back(row);
    }
    if (!rep.target_reached && !rep.aborted)
        rep.diagnostics.push_back("rsm: target cost not reached; returning the best evaluated point");

    rep.surrogate = net;
    rep.fe_evaluations = budget.calls;
    finish_report(problem, best, rep);
    rep.wall_time_s = seconds_since(t0);
    return rep;
}

} // namespace

UpdateReport rsm_update(const UpdatingProblem& problem, const RsmConfig& cfg) {
    return rsm_run(problem, cfg, nullptr);
}

UpdateReport rsm_update(const UpdatingProblem& problem, const RsmConfig& cfg, const TrainingSet& design) {
    // failed evaluations (+inf) are allowed; they are handled like fresh ones
    if (static_cast<std::size_t>(design.inputs.cols()) != problem.parameter_count() ||
        design.inputs.rows() != design.targets.size() || !design.inputs.allFinite() ||
        design.targets.array().isNaN().any())
        throw UpdatingError("rsm: design table does not match the problem");
    if (design.size() != cfg.n_samples)
        throw UpdatingError("rsm: design holds " + std::to_string(design.size()) + " rows, n_samples is " +
                            std::to_string(cfg.n_samples));
    for (Eigen::Index k = 0; k < design.inputs.rows(); ++k)
        if (!problem.bounds.contains(design.inputs.row(k).transpose()))
            throw UpdatingError("rsm: design row " + std::to_string(k) + " lies outside the bounds");
    return rsm_run(problem, cfg, &design);
}

UpdateReport ga_update(const UpdatingProblem& problem, const GaConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    problem.validate();
    cfg.validate();
    UpdateReport rep;
    rep.method = "ga";
    describe(cfg, "ga.", rep.settings);

    // driver_budget counts objective calls, budget counts FE solves; they agree
    EvalBudget budget;
    EvalBudget driver_budget;
    const OptimizeResult res = ga_optimize(
        [&problem, &budget](const Eigen::VectorXd& x) { return full_objective(problem, x, budget); },
        problem.bounds, cfg, driver_budget);
    rep.history = res.history;
    rep.truncated = res.truncated;
    rep.diagnostics = res.diagnostics;
    rep.fe_evaluations = budget.calls;
    finish_report(problem, res.best, rep);
    rep.wall_time_s = seconds_since(t0);
    return rep;
}

UpdateReport sa_update(const UpdatingProblem& problem, const SaConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    problem.validate();
    cfg.validate();
    UpdateReport rep;
    rep.method = "sa";
    rep.settings["sa.initial_temperature"] = fmt(cfg.initial_temperature);
    rep.settings["sa.cooling_factor"] = fmt(cfg.cooling_factor);
    rep.settings["sa.steps_per_temperature"] = std::to_string(cfg.steps_for(problem.parameter_count()));
    rep.settings["sa.n_runs"] = std::to_string(cfg.n_runs);
    rep.settings["sa.step_scale"] = fmt(cfg.step_scale);
    rep.settings["sa.min_temperature"] = fmt(cfg.min_temperature);
    rep.settings["sa.seed"] = std::to_string(cfg.seed);

    EvalBudget budget;
    EvalBudget driver_budget;
    const OptimizeResult res = sa_optimize(
        [&problem, &budget](const Eigen::VectorXd& x) { return full_objective(problem, x, budget); },
        problem.bounds, cfg, driver_budget);
    rep.history = res.history;
    rep.truncated = res.truncated;
    rep.diagnostics = res.diagnostics;
    rep.fe_evaluations = budget.calls;
    finish_report(problem, res.best, rep);
    rep.wall_time_s = seconds_since(t0);
    return rep;
}

} // namespace femu
