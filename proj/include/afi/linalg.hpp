#pragma once

#include <cstddef>
#include <vector>

#include "afi/matrix.hpp"

namespace afi::linalg {

/// Symmetric, zero-diagonal, non-negative b x b matrix of pairwise distances.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    /// Validates the invariants; throws InvalidInput on violation.
    explicit DistanceMatrix(Matrix entries);

    std::size_t size() const noexcept { return entries_.rows(); }
    double operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }
    const Matrix& matrix() const noexcept { return entries_; }
    double max_entry() const noexcept { return entries_.max_abs(); }

private:
    Matrix entries_;
};

/// Eigenvalues of the double-centred squared-distance matrix, descending, negatives clamped to 0.
struct MdsSpectrum {
    std::vector<double> eigenvalues;
    std::size_t negatives_clamped = 0;

    std::size_t size() const noexcept { return eigenvalues.size(); }
    double largest() const noexcept { return eigenvalues.empty() ? 0.0 : eigenvalues.front(); }
    double total() const noexcept;
};

/// Euclidean distances between the rows of `batch`.
DistanceMatrix pairwise_distance_matrix(const Matrix& batch);

/// Divides every entry by the largest one; an all-zero matrix is returned unchanged.
DistanceMatrix normalize_distance_matrix(const DistanceMatrix& d);

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations, sorted
/// descending (ties keep their diagonal order).
std::vector<double> symmetric_eigenvalues(const Matrix& a);

/// B = -1/2 J (D o D) J with J = I - 11^T / b.
Matrix double_centered_squared(const DistanceMatrix& d);

/// Classical MDS spectrum of a (normalized) distance matrix.
MdsSpectrum mds_spectrum(const DistanceMatrix& d);

}  // namespace afi::linalg
