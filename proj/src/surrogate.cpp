#include "femu/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace femu {

Eigen::VectorXd InputScaling::scale(const Eigen::VectorXd& x) const {
    return (2.0 * (x - lower).array() / (upper - lower).array() - 1.0).matrix();
}

Eigen::VectorXd InputScaling::unscale(const Eigen::VectorXd& s) const {
    return (lower.array() + 0.5 * (s.array() + 1.0) * (upper - lower).array()).matrix();
}

InputScaling InputScaling::identity(std::size_t d) {
    const auto n = static_cast<Eigen::Index>(d);
    return {Eigen::VectorXd::Constant(n, -1.0), Eigen::VectorXd::Constant(n, 1.0)};
}

OutputScaling OutputScaling::fit(const Eigen::VectorXd& targets) {
    OutputScaling s;
    if (targets.size() == 0) return s;
    s.offset = targets.mean();
    const double range = targets.maxCoeff() - targets.minCoeff();
    s.span = range > 0 ? range : 1.0;
    return s;
}

Eigen::VectorXd SurrogateNet::weights() const {
    Eigen::VectorXd w(static_cast<Eigen::Index>(weight_count()));
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < w1.rows(); ++j)
        for (Eigen::Index i = 0; i < w1.cols(); ++i) w[k++] = w1(j, i);
    for (Eigen::Index j = 0; j < w2.size(); ++j) w[k++] = w2[j];
    return w;
}

void SurrogateNet::set_weights(const Eigen::VectorXd& w) {
    if (static_cast<std::size_t>(w.size()) != weight_count())
        throw SurrogateError("weight vector has the wrong length");
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < w1.rows(); ++j)
        for (Eigen::Index i = 0; i < w1.cols(); ++i) w1(j, i) = w[k++];
    for (Eigen::Index j = 0; j < w2.size(); ++j) w2[j] = w[k++];
}

void SurrogateNet::validate() const {
    const auto m = static_cast<Eigen::Index>(m_hidden);
    const auto d = static_cast<Eigen::Index>(d_in);
    if (d_in == 0 || m_hidden == 0) throw SurrogateError("empty network");
    if (w1.rows() != m || w1.cols() != d + 1 || w2.size() != m + 1)
        throw SurrogateError("weight dimensions disagree with the architecture");
    if (input_scaling.lower.size() != d || input_scaling.upper.size() != d)
        throw SurrogateError("input scaling dimension disagrees with d_in");
    if (!w1.allFinite() || !w2.allFinite()) throw SurrogateError("non-finite weight");
    if (!(output_scaling.span > 0)) throw SurrogateError("output scaling span must be positive");
}

void TrainingSet::validate(std::size_t d_in) const {
    if (targets.size() == 0) throw SurrogateError("empty training set");
    if (inputs.rows() != targets.size()) throw SurrogateError("input and target row counts differ");
    if (static_cast<std::size_t>(inputs.cols()) != d_in)
        throw SurrogateError("training inputs have the wrong width");
    if (!inputs.allFinite() || !targets.allFinite()) throw SurrogateError("non-finite training data");
}

SurrogateNet init_net(std::size_t d_in, std::size_t m_hidden, const Eigen::VectorXd& lower,
                      const Eigen::VectorXd& upper, std::uint64_t seed,
                      std::size_t planned_samples) {
    if (d_in == 0 || m_hidden == 0) throw SurrogateError("network needs inputs and hidden units");
    if (static_cast<std::size_t>(lower.size()) != d_in || static_cast<std::size_t>(upper.size()) != d_in)
        throw SurrogateError("bounds dimension disagrees with d_in");
    if (!((upper - lower).array() > 0).all()) throw SurrogateError("bounds must satisfy lower < upper");

    SurrogateNet net;
    net.d_in = d_in;
    net.m_hidden = m_hidden;
    if (net.weight_count() >= planned_samples) {
        std::ostringstream os;
        os << "network has " << net.weight_count() << " weights but only " << planned_samples
           << " training samples are planned";
        throw SurrogateError(os.str());
    }
    const auto m = static_cast<Eigen::Index>(m_hidden);
    const auto d = static_cast<Eigen::Index>(d_in);
    net.w1.resize(m, d + 1);
    net.w2.resize(m + 1);
    net.input_scaling = {lower, upper};

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u1(-1.0 / std::sqrt(double(d_in)), 1.0 / std::sqrt(double(d_in)));
    std::uniform_real_distribution<double> u2(-1.0 / std::sqrt(double(m_hidden)),
                                              1.0 / std::sqrt(double(m_hidden)));
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i <= d; ++i) net.w1(j, i) = u1(rng);
    for (Eigen::Index j = 0; j <= m; ++j) net.w2[j] = u2(rng);
    return net;
}

namespace {

double forward_scaled(const SurrogateNet& net, const Eigen::VectorXd& xs, Eigen::VectorXd* hidden) {
    const Eigen::VectorXd a = net.w1.col(0) + net.w1.rightCols(net.w1.cols() - 1) * xs;
    const Eigen::VectorXd z = a.array().tanh().matrix();
    if (hidden) *hidden = z;
    return net.w2[0] + net.w2.tail(net.w2.size() - 1).dot(z);
}

} // namespace

double forward(const SurrogateNet& net, const Eigen::VectorXd& x) {
    if (static_cast<std::size_t>(x.size()) != net.d_in)
        throw SurrogateError("input has " + std::to_string(x.size()) + " entries, expected " +
                             std::to_string(net.d_in));
    if (!x.allFinite()) throw SurrogateError("non-finite surrogate input");
    return net.output_scaling.to_cost(forward_scaled(net, net.input_scaling.scale(x), nullptr));
}

double loss(const SurrogateNet& net, const TrainingSet& data) {
    data.validate(net.d_in);
    double e = 0.0;
    for (Eigen::Index n = 0; n < data.inputs.rows(); ++n) {
        const Eigen::VectorXd xs = net.input_scaling.scale(data.inputs.row(n).transpose());
        const double r = net.output_scaling.to_scaled(data.targets[n]) - forward_scaled(net, xs, nullptr);
        e += r * r;
    }
    return e;
}

Eigen::VectorXd grad(const SurrogateNet& net, const TrainingSet& data) {
    data.validate(net.d_in);
    const auto m = static_cast<Eigen::Index>(net.m_hidden);
    Eigen::MatrixXd g1 = Eigen::MatrixXd::Zero(net.w1.rows(), net.w1.cols());
    Eigen::VectorXd g2 = Eigen::VectorXd::Zero(net.w2.size());
    Eigen::VectorXd z;
    for (Eigen::Index n = 0; n < data.inputs.rows(); ++n) {
        const Eigen::VectorXd xs = net.input_scaling.scale(data.inputs.row(n).transpose());
        const double y = forward_scaled(net, xs, &z);
        const double delta = 2.0 * (y - net.output_scaling.to_scaled(data.targets[n]));
        g2[0] += delta;
        g2.tail(m) += delta * z;
        const Eigen::VectorXd dh =
            (delta * net.w2.tail(m).array() * (1.0 - z.array().square())).matrix();
        g1.col(0) += dh;
        g1.rightCols(g1.cols() - 1) += dh * xs.transpose();
    }
    SurrogateNet shape = net;
    shape.w1 = g1;
    shape.w2 = g2;
    return shape.weights();
}

namespace {

struct Objective {
    SurrogateNet net;
    const TrainingSet& data;

    double value(const Eigen::VectorXd& w) {
        net.set_weights(w);
        return loss(net, data);
    }
    Eigen::VectorXd gradient(const Eigen::VectorXd& w) {
        net.set_weights(w);
        return grad(net, data);
    }
};

// Moller's scaled conjugate gradient. Only steps whose comparison ratio is
// non-negative are taken, so the loss never increases.
void run_scg(Objective& obj, Eigen::VectorXd& w, std::size_t cycles, TrainResult& res) {
    constexpr double sigma0 = 1e-4;
    constexpr double lambda_min = 1e-15;
    constexpr double lambda_max = 1e100;
    const auto nparams = static_cast<std::size_t>(w.size());

    double f_old = obj.value(w);
    Eigen::VectorXd g_new = obj.gradient(w);
    Eigen::VectorXd g_old = g_new;
    Eigen::VectorXd d = -g_new;
    bool success = true;
    std::size_t n_success = 0;
    double lambda = 1.0;
    double mu = 0.0, kappa = 0.0, gamma = 0.0;

    for (std::size_t cycle = 0; cycle < cycles; ++cycle) {
        ++res.cycles_run;
        if (success) {
            mu = d.dot(g_new);
            if (mu >= 0) {
                d = -g_new;
                mu = d.dot(g_new);
            }
            kappa = d.dot(d);
            if (kappa < std::numeric_limits<double>::epsilon()) {
                res.loss_history.push_back(f_old);
                break;
            }
            const double sigma = sigma0 / std::sqrt(kappa);
            const Eigen::VectorXd g_plus = obj.gradient(w + sigma * d);
            gamma = d.dot(g_plus - g_new) / sigma;
        }
        double delta = gamma + lambda * kappa;
        if (delta <= 0) {
            delta = lambda * kappa;
            lambda -= gamma / kappa;
        }
        const double alpha = -mu / delta;
        const Eigen::VectorXd w_new = w + alpha * d;
        const double f_new = obj.value(w_new);
        double ratio = 2.0 * (f_new - f_old) / (alpha * mu);
        if (!std::isfinite(f_new) || !std::isfinite(ratio)) {
            res.diagnostics.push_back("scg: non-finite trial step at cycle " + std::to_string(cycle + 1));
            ratio = -1.0;
        }
        if (ratio >= 0 && f_new <= f_old) {
            success = true;
            ++n_success;
            w = w_new;
            f_old = f_new;
            g_old = g_new;
            g_new = obj.gradient(w);
        } else {
            success = false;
        }
        res.loss_history.push_back(f_old);
        if (success && g_new.squaredNorm() == 0.0) break;

        if (ratio < 0.25) lambda = std::min(4.0 * lambda, lambda_max);
        if (ratio > 0.75) lambda = std::max(0.5 * lambda, lambda_min);
        if (lambda >= lambda_max) {
            res.diagnostics.push_back("scg: scale parameter saturated, stopping early");
            break;
        }
        if (n_success == nparams) {
            d = -g_new;
            n_success = 0;
        } else if (success) {
            const double beta = (g_old - g_new).dot(g_new) / mu;
            d = beta * d - g_new;
        }
    }
}

// Steepest descent with step halving; accepts only decreasing steps.
void run_gd(Objective& obj, Eigen::VectorXd& w, std::size_t cycles, double rate, TrainResult& res) {
    double f = obj.value(w);
    for (std::size_t cycle = 0; cycle < cycles; ++cycle) {
        ++res.cycles_run;
        const Eigen::VectorXd g = obj.gradient(w);
        double step = rate;
        bool moved = false;
        for (int tries = 0; tries < 40; ++tries) {
            const Eigen::VectorXd trial = w - step * g;
            const double ft = obj.value(trial);
            if (std::isfinite(ft) && ft <= f) {
                w = trial;
                f = ft;
                moved = true;
                rate = step * 1.5;
                break;
            }
            step *= 0.5;
        }
        res.loss_history.push_back(f);
        if (!moved) {
            res.diagnostics.push_back("gd: no decreasing step at cycle " + std::to_string(cycle + 1));
            break;
        }
    }
}

} // namespace

TrainResult train(const SurrogateNet& net, const TrainingSet& data, std::size_t cycles,
                  const TrainOptions& options) {
    net.validate();
    data.validate(net.d_in);
    if (cycles == 0) throw SurrogateError("training needs at least one cycle");
    if (net.weight_count() >= data.size())
        throw SurrogateError("network has at least as many weights as training samples");

    TrainResult res;
    res.net = net;
    Objective obj{net, data};
    Eigen::VectorXd w = net.weights();
    res.initial_loss = obj.value(w);
    if (!std::isfinite(res.initial_loss)) {
        res.failed = true;
        res.final_loss = res.initial_loss;
        res.diagnostics.push_back("initial loss is not finite");
        return res;
    }
    if (options.trainer == Trainer::ScaledConjugateGradient)
        run_scg(obj, w, cycles, res);
    else
        run_gd(obj, w, cycles, options.gd_learning_rate, res);

    res.net.set_weights(w);
    res.final_loss = loss(res.net, data);
    if (!std::isfinite(res.final_loss) || res.final_loss > res.initial_loss) {
        res.failed = !std::isfinite(res.final_loss);
        res.diagnostics.push_back("training did not improve; keeping the starting weights");
        res.net = net;
        res.final_loss = res.initial_loss;
    }
    return res;
}

} // namespace femu
