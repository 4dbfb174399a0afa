#include "femu/beam_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace femu {

BeamStructure::BeamStructure(std::vector<Node> nodes, std::vector<Element> elements,
                             Formulation formulation, std::vector<std::size_t> constrained_dofs)
    : nodes_(std::move(nodes)),
      elements_(std::move(elements)),
      formulation_(formulation),
      constrained_(std::move(constrained_dofs)) {
    std::sort(constrained_.begin(), constrained_.end());
    constrained_.erase(std::unique(constrained_.begin(), constrained_.end()), constrained_.end());
    validate();
}

double BeamStructure::element_length(std::size_t e) const {
    const Element& el = elements_.at(e);
    const Node& a = nodes_.at(el.node_a);
    const Node& b = nodes_.at(el.node_b);
    return std::hypot(b.x - a.x, b.y - a.y);
}

Eigen::VectorXd BeamStructure::nominal_moduli() const {
    Eigen::VectorXd e(elements_.size());
    for (std::size_t i = 0; i < elements_.size(); ++i) e[i] = elements_[i].elastic_modulus;
    return e;
}

void BeamStructure::validate() const {
    if (nodes_.size() < 2) throw ModelError("structure needs at least two nodes");
    if (elements_.empty()) throw ModelError("structure has no elements");
    const bool grillage = formulation_ == Formulation::Grillage;
    for (std::size_t e = 0; e < elements_.size(); ++e) {
        const Element& el = elements_[e];
        std::ostringstream where;
        where << "element " << e << ": ";
        if (el.node_a >= nodes_.size() || el.node_b >= nodes_.size())
            throw ModelError(where.str() + "references a missing node");
        if (el.node_a == el.node_b) throw ModelError(where.str() + "nodes must be distinct");
        if (!(el.section.area > 0) || !(el.section.second_moment > 0) || !(el.density > 0) ||
            !(el.elastic_modulus > 0))
            throw ModelError(where.str() + "physical properties must be strictly positive");
        if (grillage && (!(el.section.torsion_constant > 0) || !(el.section.polar_moment > 0)))
            throw ModelError(where.str() + "grillage elements need positive torsion properties");
        if (!(el.poisson_ratio > -1.0 && el.poisson_ratio < 0.5))
            throw ModelError(where.str() + "poisson ratio outside (-1, 0.5)");
        if (!(element_length(e) > 0)) throw ModelError(where.str() + "zero length");
    }
    for (std::size_t d : constrained_)
        if (d >= total_dofs()) throw ModelError("constrained dof out of range");
    if (constrained_.size() >= total_dofs()) throw ModelError("every dof is constrained");
}

std::size_t SystemMatrices::reduced_index(std::size_t global_dof) const {
    auto it = std::lower_bound(free_dofs.begin(), free_dofs.end(), global_dof);
    if (it == free_dofs.end() || *it != global_dof)
        throw ModelError("dof " + std::to_string(global_dof) + " is constrained or out of range");
    return static_cast<std::size_t>(it - free_dofs.begin());
}

Eigen::Matrix4d bending_stiffness(double modulus, double second_moment, double length) {
    const double L = length;
    const double c = modulus * second_moment / (L * L * L);
    Eigen::Matrix4d k;
    k << 12.0,     6.0 * L,     -12.0,    6.0 * L,
         6.0 * L,  4.0 * L * L, -6.0 * L, 2.0 * L * L,
         -12.0,    -6.0 * L,    12.0,     -6.0 * L,
         6.0 * L,  2.0 * L * L, -6.0 * L, 4.0 * L * L;
    return c * k;
}

Eigen::Matrix4d consistent_mass(double density, double area, double length) {
    const double L = length;
    const double c = density * area * L / 420.0;
    Eigen::Matrix4d m;
    m << 156.0,    22.0 * L,    54.0,      -13.0 * L,
         22.0 * L, 4.0 * L * L, 13.0 * L,  -3.0 * L * L,
         54.0,     13.0 * L,    156.0,     -22.0 * L,
         -13.0 * L, -3.0 * L * L, -22.0 * L, 4.0 * L * L;
    return c * m;
}

namespace {

// Element matrices in global DOF order for a grillage member.
// Local order per node is (w, theta, phi): slope dw/ds along the member and
// the twist about it. With member direction (c, s), theta = s*rx - c*ry and
// phi = c*rx + s*ry, which is an orthogonal map from (w, rx, ry).
void grillage_element(const BeamStructure& st, std::size_t e, double modulus,
                      Eigen::Matrix<double, 6, 6>& k, Eigen::Matrix<double, 6, 6>& m) {
    const Element& el = st.elements()[e];
    const Node& a = st.nodes()[el.node_a];
    const Node& b = st.nodes()[el.node_b];
    const double L = st.element_length(e);
    const double c = (b.x - a.x) / L;
    const double s = (b.y - a.y) / L;

    Eigen::Matrix<double, 6, 6> kl = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 6> ml = Eigen::Matrix<double, 6, 6>::Zero();
    const Eigen::Matrix4d kb = bending_stiffness(modulus, el.section.second_moment, L);
    const Eigen::Matrix4d mb = consistent_mass(el.density, el.section.area, L);
    // bending uses local slots 0,1,3,4; torsion uses 2,5
    const int bend[4] = {0, 1, 3, 4};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            kl(bend[i], bend[j]) = kb(i, j);
            ml(bend[i], bend[j]) = mb(i, j);
        }
    const double shear = modulus / (2.0 * (1.0 + el.poisson_ratio));
    const double kt = shear * el.section.torsion_constant / L;
    const double mt = el.density * el.section.polar_moment * L / 6.0;
    kl(2, 2) = kt;       kl(5, 5) = kt;       kl(2, 5) = -kt;      kl(5, 2) = -kt;
    ml(2, 2) = 2.0 * mt; ml(5, 5) = 2.0 * mt; ml(2, 5) = mt;       ml(5, 2) = mt;

    Eigen::Matrix<double, 6, 6> t = Eigen::Matrix<double, 6, 6>::Zero();
    for (int n = 0; n < 2; ++n) {
        const int o = 3 * n;
        t(o, o) = 1.0;
        t(o + 1, o + 1) = s;
        t(o + 1, o + 2) = -c;
        t(o + 2, o + 1) = c;
        t(o + 2, o + 2) = s;
    }
    k = t.transpose() * kl * t;
    m = t.transpose() * ml * t;
}

} // namespace

SystemMatrices assemble(const BeamStructure& structure, std::span<const double> moduli) {
    if (moduli.size() != structure.element_count())
        throw ModelError("expected " + std::to_string(structure.element_count()) +
                         " moduli, got " + std::to_string(moduli.size()));
    for (std::size_t e = 0; e < moduli.size(); ++e)
        if (!(moduli[e] > 0) || !std::isfinite(moduli[e]))
            throw ModelError("modulus of element " + std::to_string(e) + " must be positive");

    const std::size_t n = structure.total_dofs();
    const std::size_t dpn = structure.dofs_per_node();
    Eigen::MatrixXd kg = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd mg = Eigen::MatrixXd::Zero(n, n);

    for (std::size_t e = 0; e < structure.element_count(); ++e) {
        const Element& el = structure.elements()[e];
        std::vector<std::size_t> map;
        for (std::size_t node : {el.node_a, el.node_b})
            for (std::size_t d = 0; d < dpn; ++d) map.push_back(node * dpn + d);

        if (structure.formulation() == Formulation::Grillage) {
            Eigen::Matrix<double, 6, 6> k, m;
            grillage_element(structure, e, moduli[e], k, m);
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j) {
                    kg(map[i], map[j]) += k(i, j);
                    mg(map[i], map[j]) += m(i, j);
                }
        } else {
            const double L = structure.element_length(e);
            const Eigen::Matrix4d k = bending_stiffness(moduli[e], el.section.second_moment, L);
            const Eigen::Matrix4d m = consistent_mass(el.density, el.section.area, L);
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                    kg(map[i], map[j]) += k(i, j);
                    mg(map[i], map[j]) += m(i, j);
                }
        }
    }

    SystemMatrices out;
    const auto& fixed = structure.constrained_dofs();
    for (std::size_t d = 0; d < n; ++d)
        if (!std::binary_search(fixed.begin(), fixed.end(), d)) out.free_dofs.push_back(d);
    out.dof_count = out.free_dofs.size();
    out.stiffness.resize(out.dof_count, out.dof_count);
    out.mass.resize(out.dof_count, out.dof_count);
    for (std::size_t i = 0; i < out.dof_count; ++i)
        for (std::size_t j = 0; j < out.dof_count; ++j) {
            out.stiffness(i, j) = kg(out.free_dofs[i], out.free_dofs[j]);
            out.mass(i, j) = mg(out.free_dofs[i], out.free_dofs[j]);
        }
    return out;
}

SystemMatrices assemble(const BeamStructure& structure, const Eigen::VectorXd& moduli) {
    return assemble(structure, std::span<const double>(moduli.data(), moduli.size()));
}

double symmetry_defect(const Eigen::MatrixXd& a) {
    const double scale = a.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
}

} // namespace femu
