#include "afi/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "afi/binary_io.hpp"
#include "afi/error.hpp"

namespace afi::nn {

namespace {

constexpr std::string_view kNetMagic = "AFIN";
constexpr std::string_view kAdamMagic = "AFIA";
constexpr std::uint32_t kFormatVersion = 1;

double activate(Activation a, double x) {
    switch (a) {
        case Activation::Identity: return x;
        case Activation::LeakyRelu: return x > 0.0 ? x : kLeakySlope * x;
        case Activation::Tanh: return std::tanh(x);
    }
    return x;
}

double activate_grad(Activation a, double x) {
    switch (a) {
        case Activation::Identity: return 1.0;
        case Activation::LeakyRelu: return x > 0.0 ? 1.0 : kLeakySlope;
        case Activation::Tanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
    }
    return 1.0;
}

std::vector<Layer> make_layers(const std::vector<std::size_t>& dims, const std::vector<Activation>& acts) {
    if (dims.size() < 2) throw InvalidParameter("MlpNet: need at least input and output dims");
    if (acts.size() != dims.size() - 1) throw InvalidParameter("MlpNet: one activation per layer required");
    for (std::size_t d : dims)
        if (d == 0) throw InvalidParameter("MlpNet: zero-width layer");
    std::vector<Layer> layers(acts.size());
    for (std::size_t l = 0; l < acts.size(); ++l) {
        layers[l].weight = Matrix(dims[l + 1], dims[l]);
        layers[l].bias.assign(dims[l + 1], 0.0);
        layers[l].activation = acts[l];
    }
    return layers;
}

// y = act(x W^T + b); also returns the pre-activation.
void layer_forward(const Layer& layer, const Matrix& x, Matrix& pre, Matrix& out) {
    const std::size_t n = x.rows();
    const std::size_t in = layer.in_dim();
    const std::size_t o = layer.out_dim();
    pre = Matrix(n, o);
    out = Matrix(n, o);
    for (std::size_t r = 0; r < n; ++r) {
        const auto xr = x.row(r);
        for (std::size_t j = 0; j < o; ++j) {
            const auto wj = layer.weight.row(j);
            double s = layer.bias[j];
            for (std::size_t i = 0; i < in; ++i) s += wj[i] * xr[i];
            pre(r, j) = s;
            out(r, j) = activate(layer.activation, s);
        }
    }
}

}  // namespace

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::LeakyRelu: return "leaky-relu";
        case Activation::Tanh: return "tanh";
    }
    return "identity";
}

Activation activation_from_string(const std::string& name) {
    if (name == "identity") return Activation::Identity;
    if (name == "leaky-relu") return Activation::LeakyRelu;
    if (name == "tanh") return Activation::Tanh;
    throw InvalidParameter("unknown activation '" + name + "'");
}

std::vector<double> Gradients::flatten() const {
    std::vector<double> flat;
    for (std::size_t l = 0; l < weight.size(); ++l) {
        const auto w = weight[l].data();
        flat.insert(flat.end(), w.begin(), w.end());
        flat.insert(flat.end(), bias[l].begin(), bias[l].end());
    }
    return flat;
}

void Gradients::add(const Gradients& other) {
    if (other.weight.size() != weight.size()) throw InvalidInput("Gradients::add: layer count mismatch");
    for (std::size_t l = 0; l < weight.size(); ++l) {
        auto dst = weight[l].data();
        const auto src = other.weight[l].data();
        if (dst.size() != src.size()) throw InvalidInput("Gradients::add: shape mismatch");
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
        for (std::size_t i = 0; i < bias[l].size(); ++i) bias[l][i] += other.bias[l][i];
    }
}

void Gradients::scale(double s) {
    for (auto& w : weight)
        for (double& v : w.data()) v *= s;
    for (auto& b : bias)
        for (double& v : b) v *= s;
    for (double& v : input.data()) v *= s;
}

MlpNet::MlpNet(std::vector<std::size_t> dims, std::vector<Activation> activations, rnd::Rng& rng)
    : layers_(make_layers(dims, activations)) {
    for (auto& layer : layers_) {
        const double limit = std::sqrt(6.0 / static_cast<double>(layer.in_dim() + layer.out_dim()));
        for (double& w : layer.weight.data()) w = rng.uniform(-limit, limit);
    }
}

MlpNet MlpNet::zeros(std::vector<std::size_t> dims, std::vector<Activation> activations) {
    MlpNet net;
    net.layers_ = make_layers(dims, activations);
    return net;
}

std::size_t MlpNet::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
    return n;
}

std::vector<std::size_t> MlpNet::dims() const {
    std::vector<std::size_t> d;
    if (layers_.empty()) return d;
    d.push_back(input_dim());
    for (const auto& l : layers_) d.push_back(l.out_dim());
    return d;
}

Matrix MlpNet::forward(const Matrix& x, GradTape& tape) const {
    if (layers_.empty()) throw StateError("MlpNet::forward: empty network");
    if (x.cols() != input_dim()) throw InvalidInput("MlpNet::forward: input dimension mismatch");
    if (!x.all_finite()) throw InvalidInput("MlpNet::forward: non-finite input");
    tape.inputs.assign(layers_.size(), Matrix{});
    tape.pre.assign(layers_.size(), Matrix{});
    Matrix cur = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Matrix out;
        layer_forward(layers_[l], cur, tape.pre[l], out);
        tape.inputs[l] = std::move(cur);
        cur = std::move(out);
    }
    return cur;
}

Matrix MlpNet::predict(const Matrix& x) const {
    GradTape tape;
    return forward(x, tape);
}

Gradients MlpNet::backward(const GradTape& tape, const Matrix& output_grad) const {
    if (tape.empty()) throw StateError("MlpNet::backward: no forward pass recorded on tape");
    if (tape.inputs.size() != layers_.size() || tape.pre.size() != layers_.size())
        throw StateError("MlpNet::backward: tape recorded for a different network");
    const std::size_t n = tape.inputs.front().rows();
    if (output_grad.rows() != n || output_grad.cols() != output_dim())
        throw InvalidInput("MlpNet::backward: output gradient shape mismatch");

    Gradients g;
    g.weight.resize(layers_.size());
    g.bias.resize(layers_.size());
    Matrix upstream = output_grad;
    for (std::size_t li = layers_.size(); li-- > 0;) {
        const Layer& layer = layers_[li];
        const Matrix& x = tape.inputs[li];
        const Matrix& pre = tape.pre[li];
        const std::size_t in = layer.in_dim();
        const std::size_t o = layer.out_dim();
        if (x.cols() != in || pre.cols() != o) throw StateError("MlpNet::backward: tape shape mismatch");

        Matrix delta(n, o);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t j = 0; j < o; ++j)
                delta(r, j) = upstream(r, j) * activate_grad(layer.activation, pre(r, j));

        Matrix dw(o, in);
        std::vector<double> db(o, 0.0);
        Matrix dx(n, in);
        for (std::size_t r = 0; r < n; ++r) {
            const auto xr = x.row(r);
            auto dxr = dx.row(r);
            for (std::size_t j = 0; j < o; ++j) {
                const double d = delta(r, j);
                if (d == 0.0) continue;
                db[j] += d;
                auto dwj = dw.row(j);
                const auto wj = layer.weight.row(j);
                for (std::size_t i = 0; i < in; ++i) {
                    dwj[i] += d * xr[i];
                    dxr[i] += d * wj[i];
                }
            }
        }
        g.weight[li] = std::move(dw);
        g.bias[li] = std::move(db);
        upstream = std::move(dx);
    }
    g.input = std::move(upstream);
    return g;
}

std::vector<double> MlpNet::parameters() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (const auto& l : layers_) {
        const auto w = l.weight.data();
        flat.insert(flat.end(), w.begin(), w.end());
        flat.insert(flat.end(), l.bias.begin(), l.bias.end());
    }
    return flat;
}

void MlpNet::set_parameters(std::span<const double> flat) {
    if (flat.size() != parameter_count()) throw InvalidInput("MlpNet::set_parameters: size mismatch");
    std::size_t k = 0;
    for (auto& l : layers_) {
        for (double& w : l.weight.data()) w = flat[k++];
        for (double& b : l.bias) b = flat[k++];
    }
}

bool MlpNet::all_finite() const noexcept {
    for (const auto& l : layers_) {
        if (!l.weight.all_finite()) return false;
        if (!std::all_of(l.bias.begin(), l.bias.end(), [](double v) { return std::isfinite(v); })) return false;
    }
    return true;
}

void MlpNet::save(std::ostream& os) const {
    io::write_magic(os, kNetMagic);
    io::write_u32(os, kFormatVersion);
    io::write_u32(os, static_cast<std::uint32_t>(layers_.size()));
    for (std::size_t d : dims()) io::write_u64(os, d);
    for (const auto& l : layers_) io::write_u8(os, static_cast<std::uint8_t>(l.activation));
    io::write_f64s(os, parameters());
}

MlpNet MlpNet::load(std::istream& is) {
    io::expect_magic(is, kNetMagic);
    if (io::read_u32(is) != kFormatVersion) throw InvalidInput("network checkpoint: unsupported version");
    const std::uint32_t n_layers = io::read_u32(is);
    if (n_layers == 0 || n_layers > 1024) throw InvalidInput("network checkpoint: implausible layer count");
    std::vector<std::size_t> dims(n_layers + 1);
    for (auto& d : dims) d = static_cast<std::size_t>(io::read_u64(is));
    std::vector<Activation> acts(n_layers);
    for (auto& a : acts) {
        const auto tag = io::read_u8(is);
        if (tag > static_cast<std::uint8_t>(Activation::Tanh)) throw InvalidInput("network checkpoint: bad activation tag");
        a = static_cast<Activation>(tag);
    }
    MlpNet net = zeros(dims, acts);
    net.set_parameters(io::read_f64s(is, net.parameter_count()));
    return net;
}

bool operator==(const MlpNet& l, const MlpNet& r) {
    if (l.layers_.size() != r.layers_.size()) return false;
    for (std::size_t i = 0; i < l.layers_.size(); ++i) {
        const auto& a = l.layers_[i];
        const auto& b = r.layers_[i];
        if (a.activation != b.activation || !(a.weight == b.weight) || a.bias != b.bias) return false;
    }
    return true;
}

Adam::Adam(const MlpNet& net, AdamConfig cfg)
    : cfg_(cfg), m_(net.parameter_count(), 0.0), v_(net.parameter_count(), 0.0) {}

void Adam::step(MlpNet& net, const Gradients& grads) {
    const auto g = grads.flatten();
    if (g.size() != m_.size()) throw InvalidInput("Adam::step: gradient size does not match optimizer state");
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    auto params = net.parameters();
    for (std::size_t i = 0; i < g.size(); ++i) {
        m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g[i];
        v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
        const double mhat = m_[i] / bc1;
        const double vhat = v_[i] / bc2;
        params[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
    net.set_parameters(params);
}

void Adam::save(std::ostream& os) const {
    io::write_magic(os, kAdamMagic);
    io::write_u64(os, t_);
    io::write_u64(os, m_.size());
    io::write_f64s(os, m_);
    io::write_f64s(os, v_);
}

Adam Adam::load(std::istream& is, AdamConfig cfg) {
    io::expect_magic(is, kAdamMagic);
    Adam a;
    a.cfg_ = cfg;
    a.t_ = io::read_u64(is);
    const auto n = static_cast<std::size_t>(io::read_u64(is));
    if (n > (std::size_t{1} << 32)) throw InvalidInput("optimizer checkpoint: implausible size");
    a.m_ = io::read_f64s(is, n);
    a.v_ = io::read_f64s(is, n);
    return a;
}

}  // namespace afi::nn
