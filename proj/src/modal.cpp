#include "femu/modal.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace femu {

namespace {

std::string describe_residual(std::size_t cap, double residual) {
    std::ostringstream os;
    os << "eigen-iteration did not converge within " << cap
       << " iterations (residual " << residual << ")";
    return os.str();
}

} // namespace

EigenConvergenceError::EigenConvergenceError(std::size_t cap, double res)
    : ModalError(describe_residual(cap, res)), iteration_cap(cap), residual(res) {}

std::size_t ModalData::elastic_count() const {
    return static_cast<std::size_t>(std::count(rigid_body.begin(), rigid_body.end(), false));
}

Eigen::VectorXd ModalData::frequencies_hz() const {
    return frequencies / (2.0 * std::numbers::pi);
}

ModalData ModalData::at_coordinates(const std::vector<std::size_t>& coords) const {
    ModalData out = *this;
    out.shapes.resize(static_cast<Eigen::Index>(coords.size()), shapes.cols());
    out.coordinates.clear();
    for (std::size_t r = 0; r < coords.size(); ++r) {
        auto it = std::find(coordinates.begin(), coordinates.end(), coords[r]);
        if (it == coordinates.end())
            throw ModalError("coordinate " + std::to_string(coords[r]) + " is not available");
        out.shapes.row(static_cast<Eigen::Index>(r)) = shapes.row(it - coordinates.begin());
        out.coordinates.push_back(coords[r]);
    }
    return out;
}

ModalData ModalData::select(const std::vector<std::size_t>& modes) const {
    ModalData out;
    const auto n = static_cast<Eigen::Index>(modes.size());
    out.frequencies.resize(n);
    out.damping_ratios.resize(n);
    out.shapes.resize(shapes.rows(), n);
    out.coordinates = coordinates;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto m = static_cast<Eigen::Index>(modes[static_cast<std::size_t>(i)]);
        if (m >= frequencies.size()) throw ModalError("mode index out of range");
        out.frequencies[i] = frequencies[m];
        out.damping_ratios[i] = damping_ratios.size() ? damping_ratios[m] : 0.0;
        out.shapes.col(i) = shapes.col(m);
        out.rigid_body.push_back(rigid_body.empty() ? false : rigid_body[static_cast<std::size_t>(m)]);
    }
    return out;
}

ModalData ModalData::elastic() const {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < mode_count(); ++i)
        if (rigid_body.empty() || !rigid_body[i]) keep.push_back(i);
    return select(keep);
}

void ModalData::validate() const {
    if (shapes.cols() != frequencies.size())
        throw ModalError("mode-shape column count differs from frequency count");
    if (static_cast<std::size_t>(shapes.rows()) != coordinates.size())
        throw ModalError("mode-shape row count differs from coordinate count");
    if (damping_ratios.size() != 0 && damping_ratios.size() != frequencies.size())
        throw ModalError("damping ratio count differs from frequency count");
    for (Eigen::Index i = 0; i < frequencies.size(); ++i) {
        if (!(frequencies[i] >= 0)) throw ModalError("negative or non-finite frequency");
        if (i > 0 && frequencies[i] < frequencies[i - 1])
            throw ModalError("frequencies are not sorted ascending");
    }
}

void CostWeights::validate(std::size_t modes) const {
    if (static_cast<std::size_t>(gamma.size()) != modes)
        throw ModalError("gamma weight count differs from mode count");
    if (!(beta >= 0) || (gamma.array() < 0).any() || !gamma.allFinite())
        throw ModalError("cost weights must be non-negative");
}

ModalData solve_modes(const SystemMatrices& matrices, std::size_t n_modes,
                      const SolveOptions& options) {
    const auto n = static_cast<Eigen::Index>(matrices.dof_count);
    if (n_modes == 0 || n_modes > matrices.dof_count)
        throw ModalError("requested " + std::to_string(n_modes) + " modes from " +
                         std::to_string(matrices.dof_count) + " dofs");
    if (matrices.mass.rows() != n || matrices.stiffness.rows() != n)
        throw ModalError("system matrix size differs from dof count");

    Eigen::LLT<Eigen::MatrixXd> llt(matrices.mass);
    if (llt.info() != Eigen::Success) throw ModalError("mass matrix is not positive definite");
    const Eigen::MatrixXd& lower = llt.matrixLLT();
    // Positive definiteness can slip past LLT when a pivot is tiny but positive.
    if ((lower.diagonal().array() <= 0).any())
        throw ModalError("mass matrix is not positive definite");

    // C = L^-1 K L^-T
    Eigen::MatrixXd c = llt.matrixL().solve(matrices.stiffness);
    c = llt.matrixL().solve(c.transpose()).transpose();
    c = 0.5 * (c + c.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
    if (eig.info() != Eigen::Success) {
        // Eigen caps the implicit QL sweeps at 30 per eigenvalue.
        const double resid = (c * eig.eigenvectors() -
                              eig.eigenvectors() * eig.eigenvalues().asDiagonal()).norm();
        throw EigenConvergenceError(static_cast<std::size_t>(30 * n), resid);
    }

    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double lambda_max = std::max(std::abs(lambda[n - 1]), std::abs(lambda[0]));
    double first_elastic = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        if (lambda[i] > options.noise_floor * lambda_max) {
            first_elastic = lambda[i];
            break;
        }

    const auto m = static_cast<Eigen::Index>(n_modes);
    ModalData out;
    out.frequencies.resize(m);
    out.damping_ratios = Eigen::VectorXd::Zero(m);
    // phi = L^-T y keeps phi^T M phi = y^T y = 1
    out.shapes = llt.matrixU().solve(eig.eigenvectors().leftCols(m));
    out.coordinates.resize(matrices.dof_count);
    for (std::size_t r = 0; r < matrices.dof_count; ++r) out.coordinates[r] = r;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double l = lambda[i];
        const bool rigid = l < options.rigid_ratio * first_elastic;
        out.rigid_body.push_back(rigid);
        out.frequencies[i] = std::sqrt(std::max(l, 0.0));
        // fix the sign so the largest component is positive
        Eigen::Index arg = 0;
        out.shapes.col(i).cwiseAbs().maxCoeff(&arg);
        if (out.shapes(arg, i) < 0) out.shapes.col(i) *= -1.0;
    }
    return out;
}

Eigen::MatrixXd mac(const Eigen::MatrixXd& shapes_a, const Eigen::MatrixXd& shapes_b) {
    if (shapes_a.rows() != shapes_b.rows())
        throw ModalError("MAC needs mode shapes over the same coordinates");
    const Eigen::VectorXd na = shapes_a.colwise().squaredNorm();
    const Eigen::VectorXd nb = shapes_b.colwise().squaredNorm();
    if ((na.array() <= 0).any() || (nb.array() <= 0).any())
        throw ModalError("MAC of a zero-norm mode shape");
    const Eigen::MatrixXd cross = shapes_a.transpose() * shapes_b;
    Eigen::MatrixXd out(shapes_a.cols(), shapes_b.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        for (Eigen::Index j = 0; j < out.cols(); ++j)
            out(i, j) = std::min(1.0, cross(i, j) * cross(i, j) / (na[i] * nb[j]));
    return out;
}

double cost(const ModalData& calc, const ModalData& measured, const CostWeights& weights) {
    const std::size_t n = measured.mode_count();
    if (calc.mode_count() != n) throw ModalError("calc and measured mode counts differ");
    weights.validate(n);
    if ((measured.frequencies.array() == 0).any())
        throw ModalError("measured frequency of zero in the cost function");

    double freq_term = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const double rel = (measured.frequencies[k] - calc.frequencies[k]) / measured.frequencies[k];
        freq_term += weights.gamma[k] * rel * rel;
    }
    double shape_term = 0.0;
    if (weights.beta != 0.0) {
        const Eigen::MatrixXd m = mac(calc.shapes, measured.shapes);
        shape_term = static_cast<double>(n) - m.diagonal().sum();
    }
    return freq_term + weights.beta * shape_term;
}

Pairing pair_modes(const ModalData& calc, const ModalData& measured) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < calc.mode_count(); ++i)
        if (calc.rigid_body.empty() || !calc.rigid_body[i]) candidates.push_back(i);

    const std::size_t n = measured.mode_count();
    Pairing p;
    p.calc_index.assign(n, 0);
    p.mac.assign(n, 0.0);
    if (candidates.size() < n) {
        // Not enough elastic modes; fall back to index order and say so.
        p.diagnostics.push_back("fewer elastic calc modes than measured modes");
        for (std::size_t i = 0; i < n; ++i) p.calc_index[i] = std::min(i, calc.mode_count() - 1);
        return p;
    }

    Eigen::MatrixXd cand(calc.shapes.rows(), static_cast<Eigen::Index>(candidates.size()));
    for (std::size_t c = 0; c < candidates.size(); ++c)
        cand.col(static_cast<Eigen::Index>(c)) = calc.shapes.col(static_cast<Eigen::Index>(candidates[c]));
    Eigen::MatrixXd table = mac(measured.shapes, cand);

    std::vector<bool> used_row(n, false), used_col(candidates.size(), false);
    for (std::size_t step = 0; step < n; ++step) {
        double best = -1.0;
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (used_row[i]) continue;
            for (std::size_t j = 0; j < candidates.size(); ++j) {
                if (used_col[j]) continue;
                const double v = table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                if (v > best) {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        }
        used_row[bi] = true;
        used_col[bj] = true;
        p.calc_index[bi] = candidates[bj];
        p.mac[bi] = best;
    }
    for (std::size_t i = 0; i < n; ++i)
        if (p.mac[i] < 0.5) {
            std::ostringstream os;
            os << "measured mode " << i + 1 << " paired with MAC " << p.mac[i];
            p.diagnostics.push_back(os.str());
        }
    return p;
}

FrfResult frf_inertance(const ModalData& modal, std::size_t k, std::size_t l,
                        const std::vector<double>& freq_grid) {
    const auto rows = static_cast<std::size_t>(modal.shapes.rows());
    if (k >= rows || l >= rows) throw ModalError("FRF coordinate outside the observed set");
    const Eigen::Index n = modal.frequencies.size();
    Eigen::VectorXd zeta = modal.damping_ratios.size() == n ? modal.damping_ratios
                                                            : Eigen::VectorXd::Zero(n);
    if ((zeta.array() < 0).any()) throw ModalError("negative damping ratio");

    FrfResult out;
    out.values.reserve(freq_grid.size());
    const auto kk = static_cast<Eigen::Index>(k);
    const auto ll = static_cast<Eigen::Index>(l);
    for (std::size_t g = 0; g < freq_grid.size(); ++g) {
        const double w = freq_grid[g];
        std::complex<double> h{0.0, 0.0};
        bool singular = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double wi = modal.frequencies[i];
            const std::complex<double> den{wi * wi - w * w, 2.0 * zeta[i] * wi * w};
            const double num = -w * w * modal.shapes(kk, i) * modal.shapes(ll, i);
            if (den == std::complex<double>{0.0, 0.0}) {
                singular = true;
                break;
            }
            h += num / den;
        }
        if (singular) {
            out.singular_points.push_back(g);
            const double nan = std::numeric_limits<double>::quiet_NaN();
            h = {nan, nan};
        }
        out.values.push_back(h);
    }
    return out;
}

} // namespace femu
