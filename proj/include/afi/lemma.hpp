#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "afi/matrix.hpp"
#include "afi/mlp.hpp"
#include "afi/random.hpp"

namespace afi::gan {

/// Scalar loss on a network output: returns L(y) and writes dL/dy into `grad`.
using LossFn = std::function<double(std::span<const double> y, std::span<double> grad)>;

/// L(y) = 1/2 |y - target|^2
LossFn quadratic_loss(std::vector<double> target);

/// How the k perturbation directions around the base input are drawn.
enum class DirectionScheme {
    Antithetic,   ///< k/2 random unit directions and their negatives (k even)
    Independent,  ///< k independent random unit directions
};

struct LemmaOptions {
    DirectionScheme scheme = DirectionScheme::Antithetic;
    /// Relative residual |sum pi_i y_i - y| / max_dev above which y counts as
    /// outside the neighbors' hull and uniform weights are used instead.
    double hull_tolerance = 0.5;
    std::size_t solver_iterations = 4000;
};

struct LemmaResult {
    double error = 0.0;    ///< |dL(g(x))/dw - sum pi_i dL(g(x_i))/dw|_2
    double max_dev = 0.0;  ///< max_i |y - y_i|
    double residual = 0.0; ///< |sum pi_i y_i - y|
    rnd::SimplexWeights weights;
    Matrix directions;     ///< k x m unit directions u_i
    bool uniform_fallback = false;
};

/// argmin over the simplex of |sum_i pi_i p_i - target|, by accelerated
/// projected gradient started from uniform weights. `points` holds one p_i per row.
rnd::SimplexWeights simplex_least_squares(const Matrix& points, std::span<const double> target,
                                          std::size_t iterations = 4000);

/// Euclidean projection onto the probability simplex.
std::vector<double> project_to_simplex(std::span<const double> v);

/// Gradient of loss(net(x)) w.r.t. every parameter, flattened in MlpNet::parameters() order.
std::vector<double> parameter_gradient(const nn::MlpNet& net, const LossFn& loss, std::span<const double> x);

/// Compares the gradient at x with the pi-weighted average of gradients at
/// x_i = x + r u_i, where pi best reproduces y = net(x) from the y_i = net(x_i).
LemmaResult gradient_averaging_error(const nn::MlpNet& net, const LossFn& loss, std::span<const double> x, double radius,
                         std::size_t k, rnd::Rng& rng, const LemmaOptions& opts = {});

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace afi::gan
