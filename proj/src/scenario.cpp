#include "femu/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace femu {

Section rectangular_section(double width, double depth) {
    const double b = std::max(width, depth);
    const double t = std::min(width, depth);
    Section s;
    s.area = width * depth;
    s.second_moment = width * depth * depth * depth / 12.0;
    // Roark's approximation for a solid rectangle
    s.torsion_constant = b * t * t * t * (1.0 / 3.0 - 0.21 * (t / b) * (1.0 - std::pow(t / b, 4) / 12.0));
    s.polar_moment = width * depth * (width * width + depth * depth) / 12.0;
    return s;
}

BeamStructure h_frame(const HFrameGeometry& g, double modulus) {
    const std::size_t n = g.elements_per_run;
    if (n < 2 || n % 2 != 0) throw ModelError("h_frame: elements_per_run must be even and at least 2");
    if (!(g.crossbar_length > 0 && g.left_flange_length > 0 && g.right_flange_length > 0))
        throw ModelError("h_frame: run lengths must be positive");

    std::vector<Node> nodes;
    for (std::size_t k = 0; k <= n; ++k)
        nodes.push_back({0.0, g.left_flange_length * (0.5 - double(k) / double(n))});
    const std::size_t left_mid = n / 2;
    const std::size_t first_cross = nodes.size();
    for (std::size_t k = 1; k < n; ++k) nodes.push_back({g.crossbar_length * double(k) / double(n), 0.0});
    const std::size_t first_right = nodes.size();
    for (std::size_t k = 0; k <= n; ++k)
        nodes.push_back({g.crossbar_length, g.right_flange_length * (0.5 - double(k) / double(n))});
    const std::size_t right_mid = first_right + n / 2;

    const Section sec = rectangular_section(g.width, g.depth);
    auto element = [&](std::size_t a, std::size_t b) {
        return Element{a, b, sec, g.density, modulus, g.poisson_ratio};
    };
    std::vector<Element> elements;
    for (std::size_t k = 0; k < n; ++k) elements.push_back(element(k, k + 1));
    std::vector<std::size_t> cross{left_mid};
    for (std::size_t k = 0; k + 1 < n; ++k) cross.push_back(first_cross + k);
    cross.push_back(right_mid);
    for (std::size_t k = 0; k < n; ++k) elements.push_back(element(cross[k], cross[k + 1]));
    for (std::size_t k = 0; k < n; ++k) elements.push_back(element(first_right + k, first_right + k + 1));

    return BeamStructure(std::move(nodes), std::move(elements), Formulation::Grillage);
}

void ScenarioSpec::validate(const BeamStructure& st) const {
    if (!(nominal_modulus > 0)) throw ModelError("scenario: nominal modulus must be positive");
    if (!(lower_bound > 0 && lower_bound < upper_bound)) throw ModelError("scenario: bounds need 0 < lower < upper");
    if (nominal_modulus < lower_bound || nominal_modulus > upper_bound)
        throw ModelError("scenario: nominal modulus lies outside the updating bounds");
    for (const auto& [e, value] : perturbations) {
        if (e >= st.element_count()) throw ModelError("scenario: perturbation names a missing element");
        if (value < lower_bound || value > upper_bound)
            throw ModelError("scenario: perturbed modulus lies outside the updating bounds");
    }
    for (std::size_t node : observed_nodes)
        if (node >= st.nodes().size()) throw ModelError("scenario: observed node out of range");
    if (n_modes == 0) throw ModelError("scenario: n_modes must be positive");
    if (!(beta >= 0) || !(frequency_noise >= 0) || !(shape_noise >= 0))
        throw ModelError("scenario: beta and noise levels must be non-negative");
}

Scenario build_scenario(const ScenarioSpec& spec) {
    BeamStructure structure = spec.structure ? *spec.structure : h_frame(spec.geometry, spec.nominal_modulus);
    spec.validate(structure);
    const auto ne = static_cast<Eigen::Index>(structure.element_count());

    Scenario out;
    out.ground_truth = Eigen::VectorXd::Constant(ne, spec.nominal_modulus);
    for (const auto& [e, value] : spec.perturbations) out.ground_truth[static_cast<Eigen::Index>(e)] = value;

    // observed rows: out-of-plane translation at the chosen nodes
    const SystemMatrices truth_sys = assemble(structure, out.ground_truth);
    std::vector<std::size_t> nodes = spec.observed_nodes;
    if (nodes.empty()) {
        nodes.resize(structure.nodes().size());
        std::iota(nodes.begin(), nodes.end(), std::size_t{0});
    }
    std::vector<std::size_t> observed;
    for (std::size_t node : nodes) {
        const std::size_t g = structure.translation_dof(node);
        const auto& fixed = structure.constrained_dofs();
        if (std::binary_search(fixed.begin(), fixed.end(), g)) continue;
        observed.push_back(truth_sys.reduced_index(g));
    }
    if (observed.empty()) throw ModelError("scenario: no unconstrained observed coordinates");

    const std::size_t wanted = std::min(truth_sys.dof_count, spec.n_modes + 3);
    ModalData truth = solve_modes(truth_sys, wanted).elastic();
    if (truth.mode_count() < spec.n_modes) throw ModelError("scenario: model has too few elastic modes");
    std::vector<std::size_t> first(spec.n_modes);
    std::iota(first.begin(), first.end(), std::size_t{0});
    ModalData measured = truth.select(first).at_coordinates(observed);

    if (spec.frequency_noise > 0 || spec.shape_noise > 0) {
        Rng rng(spec.seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Eigen::Index i = 0; i < measured.frequencies.size(); ++i)
            measured.frequencies[i] *= 1.0 + spec.frequency_noise * normal(rng);
        for (Eigen::Index j = 0; j < measured.shapes.cols(); ++j)
            for (Eigen::Index i = 0; i < measured.shapes.rows(); ++i)
                measured.shapes(i, j) *= 1.0 + spec.shape_noise * normal(rng);
        std::vector<std::size_t> order(spec.n_modes);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return measured.frequencies[static_cast<Eigen::Index>(a)] < measured.frequencies[static_cast<Eigen::Index>(b)];
        });
        measured = measured.select(order);
    }

    UpdatingProblem& p = out.problem;
    p.structure = structure;
    p.bounds = {Eigen::VectorXd::Constant(ne, spec.lower_bound), Eigen::VectorXd::Constant(ne, spec.upper_bound)};
    p.measured = measured;
    p.observed = observed;
    p.n_modes = spec.n_modes;
    p.weights = {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.n_modes)), spec.beta};
    p.target_cost = spec.target_cost;
    p.initial_parameters = Eigen::VectorXd::Constant(ne, spec.nominal_modulus);
    p.spare_modes = spec.spare_modes;

    const ModelEvaluation initial = evaluate_model(p, p.initial_parameters);
    p.weights.gamma = compute_gamma_weights(initial.paired, p.measured, spec.gamma_mode);
    p.validate();
    return out;
}

} // namespace femu
