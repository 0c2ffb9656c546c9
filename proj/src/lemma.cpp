#include "afi/lemma.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "afi/error.hpp"
#include "afi/linalg.hpp"

namespace afi::gan {

LossFn quadratic_loss(std::vector<double> target) {
    return [target = std::move(target)](std::span<const double> y, std::span<double> grad) {
        if (y.size() != target.size()) throw InvalidInput("quadratic_loss: dimension mismatch");
        double l = 0.0;
        for (std::size_t j = 0; j < y.size(); ++j) {
            const double d = y[j] - target[j];
            grad[j] = d;
            l += 0.5 * d * d;
        }
        return l;
    };
}

std::vector<double> project_to_simplex(std::span<const double> v) {
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cum = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        cum += sorted[j];
        const double cand = (cum - 1.0) / static_cast<double>(j + 1);
        if (sorted[j] - cand > 0.0) theta = cand;
    }
    std::vector<double> out(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) out[j] = std::max(v[j] - theta, 0.0);
    const double s = std::accumulate(out.begin(), out.end(), 0.0);
    for (double& w : out) w /= s;
    return out;
}

rnd::SimplexWeights simplex_least_squares(const Matrix& points, std::span<const double> target,
                                          std::size_t iterations) {
    const std::size_t k = points.rows();
    if (k == 0) throw InvalidInput("simplex_least_squares: no points");
    if (points.cols() != target.size()) throw InvalidInput("simplex_least_squares: dimension mismatch");

    // Work with offsets p_i - target, rescaled so the largest has unit norm.
    Matrix off(k, points.cols());
    double scale = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double n2 = 0.0;
        for (std::size_t c = 0; c < points.cols(); ++c) {
            off(i, c) = points(i, c) - target[c];
            n2 += off(i, c) * off(i, c);
        }
        scale = std::max(scale, std::sqrt(n2));
    }
    rnd::SimplexWeights out;
    out.weights.assign(k, 1.0 / static_cast<double>(k));
    if (scale == 0.0 || k == 1) return out;
    for (double& v : off.data()) v /= scale;

    Matrix gram(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < off.cols(); ++c) s += off(i, c) * off(j, c);
            gram(i, j) = gram(j, i) = s;
        }
    const double lipschitz = linalg::symmetric_eigenvalues(gram).front();
    if (!(lipschitz > 0.0)) return out;
    const double step = 1.0 / lipschitz;

    std::vector<double> pi = out.weights;
    std::vector<double> momentum = pi;
    std::vector<double> grad(k);
    std::vector<double> trial(k);
    double tk = 1.0;
    for (std::size_t it = 0; it < iterations; ++it) {
        for (std::size_t i = 0; i < k; ++i) {
            double g = 0.0;
            for (std::size_t j = 0; j < k; ++j) g += gram(i, j) * momentum[j];
            grad[i] = g;
        }
        for (std::size_t i = 0; i < k; ++i) trial[i] = momentum[i] - step * grad[i];
        std::vector<double> next = project_to_simplex(trial);
        const double tnext = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
        double moved = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double delta = next[i] - pi[i];
            moved = std::max(moved, std::abs(delta));
            momentum[i] = next[i] + ((tk - 1.0) / tnext) * delta;
        }
        pi = std::move(next);
        tk = tnext;
        if (moved < 1e-16) break;
    }
    out.weights = std::move(pi);
    return out;
}

std::vector<double> parameter_gradient(const nn::MlpNet& net, const LossFn& loss, std::span<const double> x) {
    if (x.size() != net.input_dim()) throw InvalidInput("parameter_gradient: input dimension mismatch");
    Matrix in(1, x.size(), std::vector<double>(x.begin(), x.end()));
    nn::GradTape tape;
    const Matrix y = net.forward(in, tape);
    Matrix dy(1, y.cols());
    loss(y.row(0), dy.row(0));
    return net.backward(tape, dy).flatten();
}

LemmaResult gradient_averaging_error(const nn::MlpNet& net, const LossFn& loss, std::span<const double> x, double radius,
                         std::size_t k, rnd::Rng& rng, const LemmaOptions& opts) {
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw InvalidParameter("gradient_averaging_error: radius must be >= 0");
    if (k < 2) throw InvalidParameter("gradient_averaging_error: need k >= 2");
    if (opts.scheme == DirectionScheme::Antithetic && k % 2 != 0)
        throw InvalidParameter("gradient_averaging_error: antithetic directions need an even k");
    const std::size_t m = net.input_dim();
    if (x.size() != m) throw InvalidInput("gradient_averaging_error: input dimension mismatch");

    LemmaResult res;
    res.directions = Matrix(k, m);
    for (std::size_t i = 0; i < k; ++i) {
        if (opts.scheme == DirectionScheme::Antithetic && i % 2 == 1) {
            for (std::size_t c = 0; c < m; ++c) res.directions(i, c) = -res.directions(i - 1, c);
        } else {
            const auto u = rnd::unit_vector(m, rng);
            std::ranges::copy(u, res.directions.row(i).begin());
        }
    }

    Matrix inputs(k, m);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t c = 0; c < m; ++c) inputs(i, c) = x[c] + radius * res.directions(i, c);

    Matrix base(1, m, std::vector<double>(x.begin(), x.end()));
    const Matrix y = net.predict(base);
    const Matrix ys = net.predict(inputs);
    for (std::size_t i = 0; i < k; ++i) {
        double d2 = 0.0;
        for (std::size_t c = 0; c < ys.cols(); ++c) {
            const double d = ys(i, c) - y(0, c);
            d2 += d * d;
        }
        res.max_dev = std::max(res.max_dev, std::sqrt(d2));
    }

    res.weights = simplex_least_squares(ys, y.row(0), opts.solver_iterations);
    const auto residual_of = [&](const rnd::SimplexWeights& w) {
        double r2 = 0.0;
        for (std::size_t c = 0; c < ys.cols(); ++c) {
            double s = -y(0, c);
            for (std::size_t i = 0; i < k; ++i) s += w[i] * ys(i, c);
            r2 += s * s;
        }
        return std::sqrt(r2);
    };
    res.residual = residual_of(res.weights);
    if (res.max_dev == 0.0 || res.residual > opts.hull_tolerance * res.max_dev) {
        res.weights.weights.assign(k, 1.0 / static_cast<double>(k));
        res.uniform_fallback = true;
        res.residual = residual_of(res.weights);
    }

    // sum_i pi_i (g - g_i) equals g - sum_i pi_i g_i on the simplex and is exactly
    // zero when every x_i coincides with x.
    const auto g = parameter_gradient(net, loss, x);
    std::vector<double> diff(g.size(), 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        const auto gi = parameter_gradient(net, loss, inputs.row(i));
        for (std::size_t p = 0; p < g.size(); ++p) diff[p] += res.weights[i] * (g[p] - gi[p]);
    }
    double e2 = 0.0;
    for (double d : diff) e2 += d * d;
    res.error = std::sqrt(e2);
    return res;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidInput("loglog_slope: need >= 2 paired points");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidInput("loglog_slope: values must be positive");
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw InvalidInput("loglog_slope: x values are all equal");
    return (n * sxy - sx * sy) / denom;
}

}  // namespace afi::gan
