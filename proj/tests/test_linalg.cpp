#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "afi/error.hpp"
#include "afi/linalg.hpp"
#include "afi/random.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace afi;
using namespace afi::linalg;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, rnd::Rng& rng) {
    Matrix m(r, c);
    for (double& v : m.data()) v = rng.normal();
    return m;
}

Matrix random_symmetric(std::size_t n, rnd::Rng& rng) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) m(i, j) = m(j, i) = rng.normal();
    return m;
}

void check_spectra_close(const std::vector<double>& got, const std::vector<double>& want, double rel) {
    REQUIRE(got.size() == want.size());
    double scale = 0.0;
    for (double w : want) scale = std::max(scale, std::abs(w));
    scale = std::max(scale, std::numeric_limits<double>::min());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= rel * scale);
}

std::size_t count_positive(const MdsSpectrum& s, double tol) {
    return static_cast<std::size_t>(std::count_if(s.eigenvalues.begin(), s.eigenvalues.end(),
                                                  [&](double l) { return l > tol; }));
}

}  // namespace

TEST_CASE("pairwise distances of identical vectors are zero") {
    const Matrix batch{{1.5, -2.0}, {1.5, -2.0}, {1.5, -2.0}};
    const auto d = pairwise_distance_matrix(batch);
    CHECK(d.matrix() == Matrix(3, 3));
}

TEST_CASE("pairwise distance of a 3-4-5 triangle") {
    const auto d = pairwise_distance_matrix(Matrix{{0.0, 0.0}, {3.0, 4.0}});
    CHECK(d(0, 1) == 5.0);
    CHECK(d(1, 0) == 5.0);
    CHECK(d(0, 0) == 0.0);
}

TEST_CASE("pairwise distances match a double-loop oracle") {
    rnd::Rng rng(11);
    const Matrix batch = random_matrix(8, 16, rng);
    const auto d = pairwise_distance_matrix(batch);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) CHECK(std::abs(d(i, j) - oracle::brute_distance(batch, i, j)) <= 1e-12);
}

TEST_CASE("pairwise distances reject non-finite input") {
    Matrix batch{{0.0, 1.0}, {std::nan(""), 0.0}};
    CHECK_THROWS_AS(pairwise_distance_matrix(batch), InvalidInput);
    batch(1, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(pairwise_distance_matrix(batch), InvalidInput);
    CHECK_THROWS_AS(pairwise_distance_matrix(Matrix{}), InvalidInput);
}

TEST_CASE("distance matrix constructor enforces invariants") {
    CHECK_THROWS_AS(DistanceMatrix(Matrix{{0.0, 1.0}, {2.0, 0.0}}), InvalidInput);
    CHECK_THROWS_AS(DistanceMatrix(Matrix{{1.0, 1.0}, {1.0, 0.0}}), InvalidInput);
    CHECK_THROWS_AS(DistanceMatrix(Matrix{{0.0, -1.0}, {-1.0, 0.0}}), InvalidInput);
}

TEST_CASE("triangle inequality holds on random batches") {
    rnd::Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t b = 2 + rng.uniform_index(12);
        const auto d = pairwise_distance_matrix(random_matrix(b, 1 + rng.uniform_index(10), rng));
        for (int s = 0; s < 100; ++s) {
            const auto i = rng.uniform_index(b), j = rng.uniform_index(b), k = rng.uniform_index(b);
            CHECK(d(i, k) <= d(i, j) + d(j, k) + 1e-12);
        }
    }
}

TEST_CASE("normalization divides by the maximum entry") {
    const auto d = normalize_distance_matrix(pairwise_distance_matrix(Matrix{{0.0, 0.0}, {3.0, 4.0}, {0.0, 1.0}}));
    CHECK(d(0, 1) == 1.0);
    CHECK(d.max_entry() == 1.0);

    const DistanceMatrix zero(Matrix(3, 3));
    CHECK(normalize_distance_matrix(zero).matrix() == Matrix(3, 3));

    rnd::Rng rng(2);
    const auto raw = pairwise_distance_matrix(random_matrix(4, 3, rng));
    const auto norm = normalize_distance_matrix(raw);
    double max = 0.0;
    for (double v : raw.matrix().data()) max = std::max(max, v);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(std::abs(norm(i, j) - raw(i, j) / max) <= 1e-15);
            CHECK(norm(i, j) >= 0.0);
            CHECK(norm(i, j) <= 1.0);
        }
}

TEST_CASE("symmetric eigenvalues of simple matrices") {
    CHECK(symmetric_eigenvalues(Matrix::identity(3)) == std::vector<double>{1.0, 1.0, 1.0});
    CHECK(symmetric_eigenvalues(Matrix{{4, 0, 0}, {0, 1, 0}, {0, 0, 9}}) == std::vector<double>{9.0, 4.0, 1.0});
    CHECK(symmetric_eigenvalues(Matrix(0, 0)).empty());
    CHECK_THROWS_AS(symmetric_eigenvalues(Matrix{{1, 2}, {3, 1}}), InvalidInput);
    CHECK_THROWS_AS(symmetric_eigenvalues(Matrix(2, 3)), InvalidInput);
}

TEST_CASE("symmetric eigenvalues match an independent eigensolver") {
    rnd::Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix a = random_symmetric(8, rng);
        check_spectra_close(symmetric_eigenvalues(a), oracle::eigen_symmetric_eigenvalues(a), 1e-8);
    }
}

TEST_CASE("symmetric eigenvalues are invariant under simultaneous permutation") {
    rnd::Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(9);
        const Matrix a = random_symmetric(n, rng);
        const auto perm = rnd::sample_without_replacement(n, n, rng);
        Matrix pa(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) pa(i, j) = a(perm[i], perm[j]);
        const auto l1 = symmetric_eigenvalues(a);
        const auto l2 = symmetric_eigenvalues(pa);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(l1[i] - l2[i]) <= 1e-10);
    }
}

TEST_CASE("mds spectrum of degenerate batches is zero") {
    const auto one = mds_spectrum(pairwise_distance_matrix(Matrix{{1.0, 2.0}}));
    CHECK(one.eigenvalues == std::vector<double>{0.0});

    const auto same = mds_spectrum(pairwise_distance_matrix(Matrix{{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}}));
    for (double l : same.eigenvalues) CHECK(l == 0.0);
}

TEST_CASE("mds of collinear points has one positive eigenvalue") {
    const Matrix pts{{0.0}, {1.0}, {2.0}, {3.0}};
    const auto s = mds_spectrum(normalize_distance_matrix(pairwise_distance_matrix(pts)));
    // Centred coordinates (-1.5,-0.5,0.5,1.5)/3 have squared norm 5/9.
    CHECK(s.eigenvalues[0] == doctest::Approx(5.0 / 9.0).epsilon(1e-12));
    for (std::size_t i = 1; i < 4; ++i) CHECK(std::abs(s.eigenvalues[i]) <= 1e-12);
}

TEST_CASE("mds of square corners has two equal eigenvalues") {
    const Matrix pts{{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    const auto dist = normalize_distance_matrix(pairwise_distance_matrix(pts));
    const auto s = mds_spectrum(dist);
    const auto want = oracle::centered_gram_eigenvalues(pts, 2.0 * std::sqrt(2.0));
    CHECK(s.eigenvalues[0] == doctest::Approx(want[0]).epsilon(1e-12));
    CHECK(s.eigenvalues[1] == doctest::Approx(want[1]).epsilon(1e-12));
    CHECK(s.eigenvalues[0] == doctest::Approx(s.eigenvalues[1]).epsilon(1e-12));
    CHECK(s.eigenvalues[0] > 0.1);
    CHECK(std::abs(s.eigenvalues[2]) <= 1e-12);
    CHECK(std::abs(s.eigenvalues[3]) <= 1e-12);
}

TEST_CASE("mds rank is bounded by affine dimension") {
    rnd::Rng rng(21);
    for (std::size_t d = 1; d <= 3; ++d) {
        // Points on a random d-dimensional affine subspace of R^6.
        Matrix basis = random_matrix(d, 6, rng);
        std::vector<double> offset(6);
        for (double& v : offset) v = rng.normal();
        Matrix pts(12, 6);
        for (std::size_t i = 0; i < 12; ++i) {
            for (std::size_t c = 0; c < 6; ++c) pts(i, c) = offset[c];
            for (std::size_t a = 0; a < d; ++a) {
                const double coef = rng.normal();
                for (std::size_t c = 0; c < 6; ++c) pts(i, c) += coef * basis(a, c);
            }
        }
        const auto s = mds_spectrum(normalize_distance_matrix(pairwise_distance_matrix(pts)));
        CHECK(count_positive(s, 1e-10) <= d);
        CHECK(count_positive(s, 1e-10) == d);
    }
}

TEST_CASE("mds eigenvalue sum equals trace of the double-centred matrix") {
    rnd::Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const auto dist = normalize_distance_matrix(pairwise_distance_matrix(random_matrix(10, 5, rng)));
        const Matrix b = double_centered_squared(dist);
        double trace = 0.0;
        for (std::size_t i = 0; i < b.rows(); ++i) trace += b(i, i);
        CHECK(std::abs(mds_spectrum(dist).total() - trace) <= 1e-10);
    }
}

TEST_CASE("mds spectrum matches the definition computed independently") {
    rnd::Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const auto dist = normalize_distance_matrix(pairwise_distance_matrix(random_matrix(8, 3, rng)));
        const auto s = mds_spectrum(dist);
        check_spectra_close(s.eigenvalues, oracle::mds_eigenvalues_from_definition(dist.matrix()), 1e-8);
        CHECK(std::is_sorted(s.eigenvalues.rbegin(), s.eigenvalues.rend()));
        for (double l : s.eigenvalues) CHECK(l >= 0.0);
    }
}

TEST_CASE("non-euclidean distances produce clamped negative eigenvalues") {
    // Violates the triangle inequality, so B has a negative eigenvalue.
    Matrix m{{0, 1, 1, 3}, {1, 0, 1, 1}, {1, 1, 0, 1}, {3, 1, 1, 0}};
    const auto s = mds_spectrum(DistanceMatrix(m));
    CHECK(s.negatives_clamped >= 1);
    for (double l : s.eigenvalues) CHECK(l >= 0.0);
}

TEST_CASE("csv output has one line per row") {
    std::ostringstream os;
    write_csv(os, Matrix{{1.0, 0.1}, {2.0, 3.0}});
    CHECK(os.str() == "1,0.10000000000000001\n2,3\n");
}
