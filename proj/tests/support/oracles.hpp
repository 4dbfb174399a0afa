#pragma once

// Reference computations for the tests. Nothing here calls into the library's
// numerics; each oracle takes a different route to the same answer.

#include "femu/beam_model.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace femu::oracle {

struct UniformBeam {
    double length = 1.0;
    double width = 0.05;
    double depth = 0.01;
    double density = 2700.0;
    double modulus = 7.0e10;

    double area() const { return width * depth; }
    double second_moment() const { return width * depth * depth * depth / 12.0; }
};

/// Straight planar beam along x split into n equal elements.
inline BeamStructure straight_beam(const UniformBeam& b, std::size_t n, std::vector<std::size_t> fixed = {}) {
    std::vector<Node> nodes;
    for (std::size_t k = 0; k <= n; ++k) nodes.push_back({b.length * double(k) / double(n), 0.0});
    std::vector<Element> elements;
    for (std::size_t k = 0; k < n; ++k)
        elements.push_back({k, k + 1, {b.area(), b.second_moment(), 0.0, 0.0}, b.density, b.modulus});
    return BeamStructure(std::move(nodes), std::move(elements), Formulation::PlanarBending, std::move(fixed));
}

/// Closed-form Euler-Bernoulli frequency in Hz for a root beta*L of the
/// characteristic equation.
inline double analytic_hz(const UniformBeam& b, double beta_l) {
    const double l = b.length;
    return beta_l * beta_l * std::sqrt(b.modulus * b.second_moment() / (b.density * b.area() * l * l * l * l)) /
           (2.0 * std::numbers::pi);
}

/// Roots of cos(x)cosh(x) = -1 (cantilever) or +1 (free-free), found by
/// bisection near the textbook estimates.
inline double beam_root(bool cantilever, int mode) {
    auto f = [cantilever](double x) { return std::cos(x) * std::cosh(x) + (cantilever ? 1.0 : -1.0); };
    const double guess = cantilever ? (mode - 0.5) * std::numbers::pi : (mode + 0.5) * std::numbers::pi;
    double lo = guess - 0.4, hi = guess + 0.4;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((f(lo) < 0) == (f(mid) < 0)) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Random symmetric positive definite matrix with a controlled condition.
inline Eigen::MatrixXd random_spd(Eigen::Index n, std::mt19937_64& rng, double shift = 0.5) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = u(rng);
    return a * a.transpose() + shift * Eigen::MatrixXd::Identity(n, n);
}

struct OraclePairs {
    Eigen::VectorXd lambda;  // ascending
    Eigen::MatrixXd vectors; // matching columns, unnormalised
};

/// Eigenpairs of the non-symmetric matrix M^-1 K through the general
/// (Hessenberg QR) solver.
inline OraclePairs general_solver_oracle(const Eigen::MatrixXd& k, const Eigen::MatrixXd& m) {
    const Eigen::MatrixXd a = m.inverse() * k;
    Eigen::EigenSolver<Eigen::MatrixXd> es(a);
    const Eigen::VectorXd re = es.eigenvalues().real();
    const Eigen::MatrixXd vec = es.eigenvectors().real();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(re.size()));
    for (Eigen::Index i = 0; i < re.size(); ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return re[x] < re[y]; });
    OraclePairs out;
    out.lambda.resize(re.size());
    out.vectors.resize(vec.rows(), vec.cols());
    for (Eigen::Index i = 0; i < re.size(); ++i) {
        out.lambda[i] = re[order[static_cast<std::size_t>(i)]];
        out.vectors.col(i) = vec.col(order[static_cast<std::size_t>(i)]);
    }
    return out;
}

/// Roots of det(K - lambda M) by sign-change scanning and bisection on the
/// LU determinant. Adequate for small, well-separated spectra.
inline std::vector<double> determinant_roots(const Eigen::MatrixXd& k, const Eigen::MatrixXd& m, double hi,
                                             int samples = 20000) {
    auto det = [&](double lambda) { return (k - lambda * m).determinant(); };
    std::vector<double> roots;
    double prev_x = 0.0, prev = det(0.0);
    for (int s = 1; s <= samples; ++s) {
        const double x = hi * double(s) / double(samples);
        const double v = det(x);
        if ((prev < 0) != (v < 0)) {
            double lo = prev_x, up = x;
            for (int i = 0; i < 200; ++i) {
                const double mid = 0.5 * (lo + up);
                if ((det(lo) < 0) == (det(mid) < 0)) lo = mid;
                else up = mid;
            }
            roots.push_back(0.5 * (lo + up));
        }
        prev_x = x;
        prev = v;
    }
    return roots;
}

/// MAC of two vectors, written out directly.
inline double mac_of(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double d = a.dot(b);
    return d * d / (a.dot(a) * b.dot(b));
}

} // namespace femu::oracle
