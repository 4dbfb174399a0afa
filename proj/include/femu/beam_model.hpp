#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace femu {

class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Two nodal layouts are supported. PlanarBending carries (w, theta) per node
// and treats every element in its own axis, which is exact for straight beams.
// Grillage carries (w, rx, ry) per node: out-of-plane translation plus the
// in-plane rotation vector, so members at arbitrary in-plane angles couple
// correctly at joints (bending + Saint-Venant torsion).
enum class Formulation { PlanarBending, Grillage };

struct Node {
    double x = 0.0; // m
    double y = 0.0; // m
};

struct Section {
    double area = 0.0;             // m^2
    double second_moment = 0.0;    // m^4, bending about the in-plane transverse axis
    double torsion_constant = 0.0; // m^4, grillage only
    double polar_moment = 0.0;     // m^4, grillage only (rotary inertia of torsion)
};

struct Element {
    std::size_t node_a = 0;
    std::size_t node_b = 0;
    Section section;
    double density = 0.0;          // kg/m^3
    double elastic_modulus = 0.0;  // N/m^2, nominal value
    double poisson_ratio = 0.33;   // ties shear modulus to E for torsion
};

class BeamStructure {
public:
    BeamStructure() = default;
    BeamStructure(std::vector<Node> nodes, std::vector<Element> elements,
                  Formulation formulation = Formulation::PlanarBending,
                  std::vector<std::size_t> constrained_dofs = {});

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Element>& elements() const { return elements_; }
    Formulation formulation() const { return formulation_; }
    const std::vector<std::size_t>& constrained_dofs() const { return constrained_; }
    bool free_free() const { return constrained_.empty(); }

    std::size_t dofs_per_node() const { return formulation_ == Formulation::Grillage ? 3 : 2; }
    std::size_t total_dofs() const { return nodes_.size() * dofs_per_node(); }
    std::size_t element_count() const { return elements_.size(); }

    double element_length(std::size_t e) const;
    Eigen::VectorXd nominal_moduli() const;

    // Global index of the out-of-plane translation at a node.
    std::size_t translation_dof(std::size_t node) const { return node * dofs_per_node(); }

    // Throws ModelError when an invariant is broken.
    void validate() const;

private:
    std::vector<Node> nodes_;
    std::vector<Element> elements_;
    Formulation formulation_ = Formulation::PlanarBending;
    std::vector<std::size_t> constrained_;
};

/// Global mass and stiffness after constrained DOFs have been removed.
/// free_dofs[r] is the global DOF that reduced row r corresponds to.
struct SystemMatrices {
    Eigen::MatrixXd mass;
    Eigen::MatrixXd stiffness;
    std::size_t dof_count = 0;
    std::vector<std::size_t> free_dofs;

    // Reduced row of a global DOF; throws ModelError if it is constrained.
    std::size_t reduced_index(std::size_t global_dof) const;
};

/// Local 4x4 Euler-Bernoulli matrices in (w1, theta1, w2, theta2) order.
Eigen::Matrix4d bending_stiffness(double modulus, double second_moment, double length);
Eigen::Matrix4d consistent_mass(double density, double area, double length);

/// Assembles consistent mass and bending (plus torsion, for grillages)
/// stiffness. moduli holds one elastic modulus per element.
SystemMatrices assemble(const BeamStructure& structure, std::span<const double> moduli);
SystemMatrices assemble(const BeamStructure& structure, const Eigen::VectorXd& moduli);

/// Largest |A - A^T| entry relative to the largest |A| entry.
double symmetry_defect(const Eigen::MatrixXd& a);

} // namespace femu
