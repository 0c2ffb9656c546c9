#include "afi/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "afi/error.hpp"

namespace afi::linalg {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kEigenSymmetryTol = 1e-10;
constexpr double kJacobiRelTol = 1e-12;
constexpr int kMaxSweeps = 100;

double off_diagonal_norm(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

// Rotates rows/columns p and q of the symmetric matrix a so that a(p,q) = 0.
void jacobi_rotate(Matrix& a, std::size_t p, std::size_t q) {
    const double apq = a(p, q);
    if (apq == 0.0) return;
    const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
    const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;
    const std::size_t n = a.rows();
    for (std::size_t k = 0; k < n; ++k) {
        const double akp = a(k, p);
        const double akq = a(k, q);
        a(k, p) = c * akp - s * akq;
        a(k, q) = s * akp + c * akq;
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double apk = a(p, k);
        const double aqk = a(q, k);
        a(p, k) = c * apk - s * aqk;
        a(q, k) = s * apk + c * aqk;
    }
    a(p, q) = 0.0;
    a(q, p) = 0.0;
}

}  // namespace

DistanceMatrix::DistanceMatrix(Matrix entries) : entries_(std::move(entries)) {
    const std::size_t b = entries_.rows();
    if (entries_.cols() != b) throw InvalidInput("DistanceMatrix: not square");
    if (!entries_.all_finite()) throw InvalidInput("DistanceMatrix: non-finite entry");
    for (std::size_t i = 0; i < b; ++i) {
        if (entries_(i, i) != 0.0) throw InvalidInput("DistanceMatrix: non-zero diagonal");
        for (std::size_t j = 0; j < b; ++j) {
            if (entries_(i, j) < 0.0) throw InvalidInput("DistanceMatrix: negative entry");
            if (std::abs(entries_(i, j) - entries_(j, i)) > kSymmetryTol)
                throw InvalidInput("DistanceMatrix: not symmetric");
        }
    }
}

double MdsSpectrum::total() const noexcept {
    return std::accumulate(eigenvalues.begin(), eigenvalues.end(), 0.0);
}

DistanceMatrix pairwise_distance_matrix(const Matrix& batch) {
    if (batch.rows() == 0) throw InvalidInput("pairwise_distance_matrix: empty batch");
    if (!batch.all_finite()) throw InvalidInput("pairwise_distance_matrix: non-finite value in batch");
    const std::size_t b = batch.rows();
    Matrix d(b, b);
    for (std::size_t i = 0; i < b; ++i) {
        const auto yi = batch.row(i);
        for (std::size_t j = i + 1; j < b; ++j) {
            const auto yj = batch.row(j);
            double s = 0.0;
            for (std::size_t c = 0; c < yi.size(); ++c) {
                const double diff = yi[c] - yj[c];
                s += diff * diff;
            }
            d(i, j) = d(j, i) = std::sqrt(s);
        }
    }
    return DistanceMatrix(std::move(d));
}

DistanceMatrix normalize_distance_matrix(const DistanceMatrix& d) {
    const double max = d.max_entry();
    if (max == 0.0) return d;
    Matrix m = d.matrix();
    for (double& v : m.data()) v /= max;
    return DistanceMatrix(std::move(m));
}

std::vector<double> symmetric_eigenvalues(const Matrix& a) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw InvalidInput("symmetric_eigenvalues: matrix is not square");
    if (!a.all_finite()) throw InvalidInput("symmetric_eigenvalues: non-finite entry");
    const double scale = std::max(1.0, a.max_abs());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(a(i, j) - a(j, i)) > kEigenSymmetryTol * scale)
                throw InvalidInput("symmetric_eigenvalues: matrix is not symmetric (entry " +
                                   std::to_string(i) + "," + std::to_string(j) + ")");

    Matrix work = a;
    // Symmetrize exactly so rotations act on a truly symmetric matrix.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) work(i, j) = work(j, i) = 0.5 * (a(i, j) + a(j, i));

    const double stop = kJacobiRelTol * work.frobenius_norm();
    for (int sweep = 0; sweep < kMaxSweeps && off_diagonal_norm(work) >= stop && stop > 0.0; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) jacobi_rotate(work, p, q);
    }

    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = work(i, i);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return diag[l] > diag[r]; });
    std::vector<double> sorted(n);
    for (std::size_t i = 0; i < n; ++i) sorted[i] = diag[order[i]];
    return sorted;
}

Matrix double_centered_squared(const DistanceMatrix& d) {
    const std::size_t b = d.size();
    Matrix sq(b, b);
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < b; ++j) sq(i, j) = d(i, j) * d(i, j);

    std::vector<double> row_mean(b, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < b; ++j) row_mean[i] += sq(i, j);
        grand += row_mean[i];
        row_mean[i] /= static_cast<double>(b);
    }
    grand /= static_cast<double>(b * b);

    // sq is symmetric, so column means equal row means.
    Matrix out(b, b);
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < b; ++j)
            out(i, j) = -0.5 * (sq(i, j) - row_mean[i] - row_mean[j] + grand);
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = i + 1; j < b; ++j) out(j, i) = out(i, j);
    return out;
}

MdsSpectrum mds_spectrum(const DistanceMatrix& d) {
    MdsSpectrum spectrum;
    spectrum.eigenvalues = symmetric_eigenvalues(double_centered_squared(d));
    for (double& v : spectrum.eigenvalues) {
        if (v < 0.0) ++spectrum.negatives_clamped;
        if (v <= 0.0) v = 0.0;  // also turns -0.0 into +0.0
    }
    return spectrum;
}

}  // namespace afi::linalg
