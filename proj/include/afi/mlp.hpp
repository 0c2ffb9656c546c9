#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "afi/matrix.hpp"
#include "afi/random.hpp"

namespace afi::nn {

enum class Activation : std::uint8_t {
    Identity = 0,
    LeakyRelu = 1,  ///< slope 0.2 on the negative side
    Tanh = 2,
};

inline constexpr double kLeakySlope = 0.2;

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct Layer {
    Matrix weight;             ///< out x in
    std::vector<double> bias;  ///< out
    Activation activation = Activation::Identity;

    std::size_t in_dim() const noexcept { return weight.cols(); }
    std::size_t out_dim() const noexcept { return weight.rows(); }
};

/// Activations cached by a forward pass, consumed by backward.
struct GradTape {
    std::vector<Matrix> inputs;  ///< input to each layer
    std::vector<Matrix> pre;     ///< pre-activation of each layer

    bool empty() const noexcept { return inputs.empty(); }
    void clear() noexcept { inputs.clear(); pre.clear(); }
};

/// Gradients mirroring the parameter layout, plus the gradient w.r.t. the input batch.
struct Gradients {
    std::vector<Matrix> weight;
    std::vector<std::vector<double>> bias;
    Matrix input;

    std::vector<double> flatten() const;
    void add(const Gradients& other);
    void scale(double s);
};

class MlpNet {
public:
    MlpNet() = default;
    /// Uniform +-sqrt(6 / (fan_in + fan_out)) weights, zero biases.
    MlpNet(std::vector<std::size_t> dims, std::vector<Activation> activations, rnd::Rng& rng);
    /// All parameters zero.
    static MlpNet zeros(std::vector<std::size_t> dims, std::vector<Activation> activations);

    std::size_t input_dim() const noexcept { return layers_.empty() ? 0 : layers_.front().in_dim(); }
    std::size_t output_dim() const noexcept { return layers_.empty() ? 0 : layers_.back().out_dim(); }
    std::size_t num_layers() const noexcept { return layers_.size(); }
    std::size_t parameter_count() const noexcept;
    std::vector<std::size_t> dims() const;

    std::vector<Layer>& layers() noexcept { return layers_; }
    const std::vector<Layer>& layers() const noexcept { return layers_; }

    /// Batched forward pass (one sample per row), recording into `tape`.
    Matrix forward(const Matrix& x, GradTape& tape) const;
    /// Forward pass without recording.
    Matrix predict(const Matrix& x) const;

    /// Reverse-mode pass: `output_grad` is dL/d(output) for the batch on `tape`.
    /// Throws StateError if `tape` holds no forward pass for this net.
    Gradients backward(const GradTape& tape, const Matrix& output_grad) const;

    /// Parameters in layer order, each layer as weights (row-major) then biases.
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> flat);
    bool all_finite() const noexcept;

    /// Flat little-endian checkpoint: "AFIN", version, layer dims, activation tags, parameters.
    void save(std::ostream& os) const;
    static MlpNet load(std::istream& is);

    friend bool operator==(const MlpNet& l, const MlpNet& r);

private:
    std::vector<Layer> layers_;
};

struct AdamConfig {
    double lr = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias correction; moment buffers start at zero.
class Adam {
public:
    Adam() = default;
    Adam(const MlpNet& net, AdamConfig cfg);

    void step(MlpNet& net, const Gradients& grads);

    std::uint64_t steps() const noexcept { return t_; }
    const AdamConfig& config() const noexcept { return cfg_; }

    void save(std::ostream& os) const;
    static Adam load(std::istream& is, AdamConfig cfg);

private:
    AdamConfig cfg_;
    std::uint64_t t_ = 0;
    std::vector<double> m_;
    std::vector<double> v_;
};

}  // namespace afi::nn
