#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace femu {

class SurrogateError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Affine map of each parameter from [lower, upper] onto [-1, 1].
struct InputScaling {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    Eigen::VectorXd scale(const Eigen::VectorXd& x) const;
    Eigen::VectorXd unscale(const Eigen::VectorXd& s) const;
    static InputScaling identity(std::size_t d);
};

/// Net output s maps to offset + span * s in cost units.
struct OutputScaling {
    double offset = 0.0;
    double span = 1.0;

    double to_scaled(double t) const { return (t - offset) / span; }
    double to_cost(double s) const { return offset + span * s; }
    /// Zero mean and unit range over the given targets.
    static OutputScaling fit(const Eigen::VectorXd& targets);
};

/// Single-hidden-layer perceptron: tanh hidden units, one linear output.
///   y = w2[0] + sum_j w2[j+1] * tanh(w1(j,0) + sum_i w1(j,i+1) * x_i)
/// with x already mapped through input_scaling.
struct SurrogateNet {
    std::size_t d_in = 0;
    std::size_t m_hidden = 0;
    Eigen::MatrixXd w1; // m_hidden x (d_in + 1), column 0 is the bias
    Eigen::VectorXd w2; // m_hidden + 1, entry 0 is the bias
    InputScaling input_scaling;
    OutputScaling output_scaling;

    std::size_t weight_count() const { return m_hidden * (d_in + 1) + m_hidden + 1; }
    /// w1 row-major followed by w2.
    Eigen::VectorXd weights() const;
    void set_weights(const Eigen::VectorXd& w);
    void validate() const;
};

struct TrainingSet {
    Eigen::MatrixXd inputs;  // N x d_in, parameter units
    Eigen::VectorXd targets; // N, cost units

    std::size_t size() const { return static_cast<std::size_t>(targets.size()); }
    void validate(std::size_t d_in) const;
};

SurrogateNet init_net(std::size_t d_in, std::size_t m_hidden, const Eigen::VectorXd& lower,
                      const Eigen::VectorXd& upper, std::uint64_t seed,
                      std::size_t planned_samples);

/// Prediction in cost units.
double forward(const SurrogateNet& net, const Eigen::VectorXd& x);

/// Sum of squared residuals, measured in the net's scaled output units.
double loss(const SurrogateNet& net, const TrainingSet& data);

/// Backpropagated gradient of loss() in weights() order.
Eigen::VectorXd grad(const SurrogateNet& net, const TrainingSet& data);

enum class Trainer { ScaledConjugateGradient, GradientDescent };

struct TrainOptions {
    Trainer trainer = Trainer::ScaledConjugateGradient;
    double gd_learning_rate = 1e-2; // starting step for the descent fallback
};

struct TrainResult {
    SurrogateNet net;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    std::size_t cycles_run = 0;
    std::vector<double> loss_history; // loss after every cycle
    std::vector<std::string> diagnostics;
    bool failed = false; // non-finite loss encountered; net holds best-so-far
};

/// Full-batch training from the net's current weights. One cycle is one
/// trainer iteration. The returned net never has a larger loss than the input.
TrainResult train(const SurrogateNet& net, const TrainingSet& data, std::size_t cycles,
                  const TrainOptions& options = {});

} // namespace femu
