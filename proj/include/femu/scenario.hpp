#pragma once

#include "femu/beam_model.hpp"
#include "femu/updating.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace femu {

/// Asymmetric H: two parallel flanges of unequal length joined at their
/// midpoints by a crossbar. Each of the three runs is split into
/// elements_per_run elements, numbered left flange (top to bottom), crossbar
/// (left to right), right flange (top to bottom). Rectangular section, bending
/// out of the plane of the H.
struct HFrameGeometry {
    double crossbar_length = 0.600;     // m
    double left_flange_length = 0.400;  // m
    double right_flange_length = 0.500; // m
    double width = 0.0508;              // m, in-plane section width
    double depth = 0.0095;              // m, out-of-plane section depth
    double density = 2700.0;            // kg/m^3
    double poisson_ratio = 0.33;
    std::size_t elements_per_run = 4;   // must be even
};

Section rectangular_section(double width, double depth);

/// Free-free grillage model of the H with one modulus for every element.
BeamStructure h_frame(const HFrameGeometry& geometry, double modulus);

struct ScenarioSpec {
    HFrameGeometry geometry;
    std::optional<BeamStructure> structure; // replaces the H when set
    double nominal_modulus = 7.0e10;        // N/m^2, the initial model
    // (zero-based element, ground-truth modulus); defaults emulate stiffness loss
    // in elements 3, 4 and 5 of the one-based numbering
    std::vector<std::pair<std::size_t, double>> perturbations{{2, 6.3e10}, {3, 6.3e10}, {4, 6.3e10}};
    double lower_bound = 6.0e10;
    double upper_bound = 8.0e10;
    std::vector<std::size_t> observed_nodes; // empty: translation of every node
    std::size_t n_modes = 5;
    double beta = 0.75;
    GammaMode gamma_mode = GammaMode::Absolute; // Hz^2; Relative leaves the overall stiffness scale almost free
    double frequency_noise = 0.0; // relative std
    double shape_noise = 0.0;     // relative std per shape entry
    double target_cost = 0.0;
    std::size_t spare_modes = 3;
    std::uint64_t seed = 1;

    void validate(const BeamStructure& structure) const;
};

struct Scenario {
    UpdatingProblem problem;
    Eigen::VectorXd ground_truth;
};

Scenario build_scenario(const ScenarioSpec& spec);

} // namespace femu
