#include <cmath>
#include <random>

#include "doctest.h"
#include "support/random_networks.hpp"
#include "vstab/cnum.hpp"

using namespace vstab;
using vstab::testing::random_matrix;
using vstab::testing::random_vector;
using vstab::testing::random_well_conditioned;

namespace {

const Complex I{0.0, 1.0};

double residual(const ComplexMatrix& a, const ComplexVector& x, const ComplexVector& b) {
    return (a * x - b).norm_inf();
}

/// Random unitary matrix as a product of complex Givens rotations.
ComplexMatrix random_unitary(std::mt19937_64& rng, std::size_t n) {
    ComplexMatrix q = ComplexMatrix::identity(n);
    for (int pass = 0; pass < 3; ++pass) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t r = p + 1; r < n; ++r) {
                const double theta = testing::uniform(rng, 0.0, 6.28);
                const Complex phase = std::polar(1.0, testing::uniform(rng, 0.0, 6.28));
                ComplexMatrix g = ComplexMatrix::identity(n);
                g(p, p) = std::cos(theta);
                g(p, r) = -std::sin(theta) * std::conj(phase);
                g(r, p) = std::sin(theta) * phase;
                g(r, r) = std::cos(theta);
                q = q * g;
            }
        }
    }
    return q;
}

}  // namespace

TEST_CASE("lu_solve: identity returns the right-hand side") {
    const ComplexVector b{1.0, 2.0 * I, -1.0};
    CHECK(lu_solve(ComplexMatrix::identity(3), b) == b);
}

TEST_CASE("lu_solve: 1x1 division") {
    const auto x = lu_solve(ComplexMatrix{{-3.0 * I}}, ComplexVector{3.0 * I});
    REQUIRE(x.size() == 1);
    CHECK(std::abs(x[0] - Complex{-1.0}) < 1e-15);
}

TEST_CASE("lu_solve: two-bus admittance matrix, residual check") {
    const ComplexMatrix y{{-2.0 * I, 3.0 * I}, {3.0 * I, -3.0 * I}};
    const ComplexVector b{I, 0.0};
    const auto x = lu_solve(y, b);
    CHECK(residual(y, x, b) <= tol::kResidual * (1.0 + b.norm_inf()));
    // First column of Y^{-1} = [[-i, -i], [-i, -2i/3]] scaled by i.
    CHECK(std::abs(x[0] - Complex{1.0}) < 1e-14);
    CHECK(std::abs(x[1] - Complex{1.0}) < 1e-14);
}

TEST_CASE("lu_solve: singular and malformed input") {
    const ComplexMatrix y{{-3.0 * I, 3.0 * I}, {3.0 * I, -3.0 * I}};
    CHECK_THROWS_AS(lu_solve(y, ComplexVector{1.0, 0.0}), SingularMatrixError);
    CHECK_THROWS_AS(lu_solve(ComplexMatrix(2, 3), ComplexVector(2)), DimensionError);
    CHECK_THROWS_AS(lu_solve(ComplexMatrix::identity(2), ComplexVector(3)), DimensionError);
}

TEST_CASE("lu_solve: residual bound over 1000 random systems up to dimension 10") {
    std::mt19937_64 rng(20240611);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 1 + static_cast<std::size_t>(t % 10);
        const auto a = random_matrix(rng, n);
        const auto b = random_vector(rng, n);
        if (!LuFactorization(a).ok()) continue;
        const auto x = lu_solve(a, b);
        // Random dense matrices can be poorly conditioned; the backward error of
        // partial pivoting is what the bound controls.
        INFO("trial " << t << " n=" << n);
        CHECK(residual(a, x, b) <= tol::kResidual * (1.0 + b.norm_inf()));
    }
}

TEST_CASE("invert: two-bus admittance matrix") {
    const ComplexMatrix y{{-2.0 * I, 3.0 * I}, {3.0 * I, -3.0 * I}};
    const auto z = invert(y);
    const ComplexMatrix expected{{-I, -I}, {-I, -2.0 * I / 3.0}};
    CHECK((z - expected).max_abs() < 1e-15);
}

TEST_CASE("invert: identity") { CHECK(invert(ComplexMatrix::identity(4)) == ComplexMatrix::identity(4)); }

TEST_CASE("invert: well-conditioned random matrices") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + static_cast<std::size_t>(t % 9);
        const auto a = random_well_conditioned(rng, n);
        const auto inv = invert(a);
        CHECK((a * inv - ComplexMatrix::identity(n)).norm_inf() <= 1e-9);
        CHECK((invert(inv) - a).max_abs() <= 1e-8);
    }
}

TEST_CASE("invert: singular input throws") {
    ComplexMatrix z(3, 3);
    CHECK_THROWS_AS(invert(z), SingularMatrixError);
}

TEST_CASE("LuFactorization: pivot ratio") {
    CHECK(LuFactorization(ComplexMatrix::identity(3)).pivot_ratio() == doctest::Approx(1.0));
    const std::vector<Complex> d{2.0, 1e-12};
    const LuFactorization tiny(ComplexMatrix::diagonal(d));
    CHECK_FALSE(tiny.ok());
    CHECK(tiny.pivot_ratio() == doctest::Approx(5e-13));
}

TEST_CASE("min_singular_value: simple cases") {
    CHECK(min_singular_value(ComplexMatrix::identity(4)) == doctest::Approx(1.0).epsilon(1e-12));
    const std::vector<Complex> d{2.0, 0.5};
    CHECK(min_singular_value(ComplexMatrix::diagonal(d)) == doctest::Approx(0.5).epsilon(1e-12));
    const ComplexMatrix no_shunt{{-3.0 * I, 3.0 * I}, {3.0 * I, -3.0 * I}};
    CHECK(min_singular_value(no_shunt) <= 1e-10);
}

TEST_CASE("min_singular_value: U diag(s) V^H with known spectrum") {
    std::mt19937_64 rng(99);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 2 + static_cast<std::size_t>(t % 7);
        std::vector<Complex> s(n);
        double smallest = 1e300;
        for (auto& x : s) {
            const double mag = std::pow(10.0, testing::uniform(rng, -6.0, 1.0));
            smallest = std::min(smallest, mag);
            x = std::polar(mag, testing::uniform(rng, 0.0, 6.28));
        }
        const auto a = random_unitary(rng, n) * ComplexMatrix::diagonal(s) * random_unitary(rng, n);
        CHECK(min_singular_value(a) == doctest::Approx(smallest).epsilon(1e-8));
    }
}

TEST_CASE("singular_values: rectangular input matches its adjoint") {
    std::mt19937_64 rng(3);
    ComplexMatrix a(5, 3);
    for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t c = 0; c < 3; ++c) a(r, c) = testing::random_complex(rng);
    const auto s1 = singular_values(a);
    const auto s2 = singular_values(a.adjoint());
    REQUIRE(s1.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) CHECK(s1[k] == doctest::Approx(s2[k]).epsilon(1e-12));
}

TEST_CASE("min_singular_value agrees with the invertibility threshold") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 300; ++t) {
        const std::size_t n = 2 + static_cast<std::size_t>(t % 5);
        auto a = random_matrix(rng, n);
        if (t % 3 == 0) {
            // Make the last row a combination of the others.
            for (std::size_t c = 0; c < n; ++c) a(n - 1, c) = a(0, c) * Complex{0.5, 1.0} + a(1, c);
        }
        const bool invertible = LuFactorization(a).ok();
        const double smin = min_singular_value(a);
        CHECK((smin == 0.0) == !invertible);
    }
}
