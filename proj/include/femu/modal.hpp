#pragma once

#include "femu/beam_model.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace femu {

class ModalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when the symmetric eigen-iteration does not converge.
class EigenConvergenceError : public ModalError {
public:
    EigenConvergenceError(std::size_t iteration_cap, double residual);
    std::size_t iteration_cap;
    double residual;
};

/// Natural frequencies (rad/s) with mode shapes at a set of coordinates.
/// Column i of shapes belongs to frequencies[i].
struct ModalData {
    Eigen::VectorXd frequencies;
    Eigen::MatrixXd shapes;
    Eigen::VectorXd damping_ratios;       // zero unless supplied
    std::vector<std::size_t> coordinates; // reduced DOF index of every shape row
    std::vector<bool> rigid_body;

    std::size_t mode_count() const { return static_cast<std::size_t>(frequencies.size()); }
    std::size_t elastic_count() const;
    Eigen::VectorXd frequencies_hz() const;

    /// Same modes, rows restricted to the given reduced-DOF coordinates.
    ModalData at_coordinates(const std::vector<std::size_t>& coords) const;
    /// Modes selected (and reordered) by index.
    ModalData select(const std::vector<std::size_t>& modes) const;
    /// Elastic modes only, in ascending order.
    ModalData elastic() const;

    void validate() const;
};

struct CostWeights {
    Eigen::VectorXd gamma; // one per compared mode
    double beta = 0.0;
    void validate(std::size_t modes) const;
};

struct SolveOptions {
    // A mode is rigid when omega^2 < rigid_ratio * (first elastic omega^2).
    double rigid_ratio = 1e-6;
    // Eigenvalues below noise_floor * (largest eigenvalue) never count as elastic.
    double noise_floor = 1e-10;
};

/// Lowest n_modes eigenpairs of K phi = omega^2 M phi, mass normalised.
/// Uses a Cholesky reduction of M and a dense symmetric solve.
ModalData solve_modes(const SystemMatrices& matrices, std::size_t n_modes,
                      const SolveOptions& options = {});

/// MAC(i, j) between column i of a and column j of b.
Eigen::MatrixXd mac(const Eigen::MatrixXd& shapes_a, const Eigen::MatrixXd& shapes_b);

/// Frequency-weighted modal distance with a MAC shape term. Modes must already
/// be paired column for column.
double cost(const ModalData& calc, const ModalData& measured, const CostWeights& weights);

struct Pairing {
    std::vector<std::size_t> calc_index; // calc mode paired to measured mode i
    std::vector<double> mac;             // MAC of each pair
    std::vector<std::string> diagnostics;
};

/// Greedy MAC pairing over the elastic calc modes: the largest remaining MAC
/// entry is assigned first. Pairs below 0.5 produce a diagnostic.
Pairing pair_modes(const ModalData& calc, const ModalData& measured);

struct FrfResult {
    std::vector<std::complex<double>> values;
    std::vector<std::size_t> singular_points; // grid indices; their values are NaN
};

/// Inertance H_kl(w) = sum_i -w^2 phi_k phi_l / (w_i^2 - w^2 + 2j zeta_i w_i w).
/// k and l are row positions within modal.shapes.
FrfResult frf_inertance(const ModalData& modal, std::size_t k, std::size_t l,
                        const std::vector<double>& freq_grid);

} // namespace femu
