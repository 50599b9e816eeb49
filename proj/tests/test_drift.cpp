#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "spdelab/drift.hpp"
#include "spdelab/errors.hpp"
#include "spdelab/poly.hpp"
#include "spdelab/rng.hpp"
#include "spdelab/spectral.hpp"

using namespace spdelab;

namespace {

SpectralField random_field(const SpacePtr& space, GaussianStream& rng, double amplitude) {
    std::vector<double> c(static_cast<std::size_t>(space->modes()));
    for (std::size_t n = 0; n < c.size(); ++n)
        c[n] = amplitude * rng.normal() / static_cast<double>(n + 1);
    return SpectralField(space, std::move(c));
}

// Quadrature pairing <a, b> on the grid, computed away from the library's
// modal accumulation.
double grid_pairing(const SpectralField& a, const SpectralField& b) {
    const auto va = to_grid(a);
    const auto vb = to_grid(b);
    double dot = 0.0;
    for (std::size_t j = 0; j < va.size(); ++j) dot += va[j] * vb[j];
    return dot * a.space()->quad_weight();
}

}  // namespace

TEST_CASE("polynomial constructor enforces odd superlinear shape") {
    CHECK_NOTHROW(OddPolynomial({1.0, 0.0, -1.0}));
    CHECK_NOTHROW(OddPolynomial({-2.0}));
    CHECK_NOTHROW(OddPolynomial(std::vector<double>{}));
    CHECK_THROWS_AS(OddPolynomial({1.0, -1.0}), std::invalid_argument);   // even degree
    CHECK_THROWS_AS(OddPolynomial({0.0, 0.0, 1.0}), std::invalid_argument);  // positive lead
    CHECK_THROWS_AS(OddPolynomial({1.0}), std::invalid_argument);         // positive lead, d=1

    // Trailing zeros are trimmed before the shape check.
    OddPolynomial f({1.0, 0.0, -1.0, 0.0, 0.0});
    CHECK(f.degree() == 3);
    CHECK(f.half_degree() == 1);
    CHECK(f.leading() == -1.0);
}

TEST_CASE("polynomial evaluation and derivative") {
    OddPolynomial f({1.0, 0.0, -1.0});  // t - t^3
    CHECK(f(0.5) == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(f(-2.0) == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(f.derivative(2.0) == doctest::Approx(1.0 - 12.0).epsilon(1e-15));
    OddPolynomial zero;
    CHECK(zero(3.0) == 0.0);
    CHECK(zero.is_zero());
}

TEST_CASE("splitting of t - t^3 reproduces the closed-form constants") {
    OddPolynomial f({1.0, 0.0, -1.0});
    const DriftSplit s = split_drift(f);
    CHECK_FALSE(s.degenerate);
    CHECK(s.zeta2 == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(s.zeta1 == doctest::Approx(-4.0 / 3.0).epsilon(1e-12));
    CHECK(s.slope == doctest::Approx(-7.0 / 9.0).epsilon(1e-12));
    CHECK(s.intercept == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.kappa == doctest::Approx(32.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("splitting of 3t - t^3") {
    OddPolynomial f({3.0, 0.0, -1.0});
    const DriftSplit s = split_drift(f);
    CHECK(s.zeta2 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.slope == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(s.kappa == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("monotone drift splits trivially") {
    OddPolynomial f({-1.0});  // f = -t is already nonincreasing
    const DriftSplit s = split_drift(f);
    CHECK(s.degenerate);
    CHECK(s.kappa == 0.0);
    for (double t : {-3.0, -0.5, 0.0, 1.0, 2.5}) CHECK(s.g2(t) == 0.0);
}

TEST_CASE("split identity g1 + g2 = f and monotonicity of g1") {
    for (const auto& coeffs :
         {std::vector<double>{1.0, 0.0, -1.0}, std::vector<double>{3.0, 0.0, -1.0},
          std::vector<double>{2.0, 0.0, 1.0, 0.0, -0.5}}) {
        OddPolynomial f(coeffs);
        const DriftSplit s = split_drift(f);
        double prev = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= 4000; ++k) {
            const double t = -5.0 + k * (10.0 / 4000.0);
            CHECK(s.g1(t) + s.g2(t) == doctest::Approx(f(t)).epsilon(1e-11));
            CHECK(s.g1(t) <= prev + 1e-11);  // nonincreasing
            prev = s.g1(t);
        }
        // g2 vanishes outside [zeta1, zeta2] and is kappa-Lipschitz inside.
        CHECK(s.g2(s.zeta1 - 0.5) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(s.g2(s.zeta2 + 0.5) == doctest::Approx(0.0).epsilon(1e-12));
        const double dt = (s.zeta2 - s.zeta1) / 1000.0;
        for (int k = 0; k < 1000; ++k) {
            const double a = s.zeta1 + k * dt;
            CHECK(std::abs(s.g2(a + dt) - s.g2(a)) <= s.kappa * dt * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("one-sided polynomial bound for t - t^3 on the unit interval") {
    OddPolynomial f({1.0, 0.0, -1.0});
    const RhoBound rho = rho_certificate(f, 1.0);
    CHECK(rho.half_degree == 1);
    CHECK(rho.C_sharp == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rho.C == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rho.C_young >= rho.C - 1e-12);  // C is the best available constant
    // rho(r) = -r^2/2 + 1/2
    CHECK(rho.rho(0.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rho.rho(2.0) == doctest::Approx(-2.0 + 0.5).epsilon(1e-12));
    CHECK(rho.superlinear());
}

TEST_CASE("lyapunov constants K_lambda for t - t^3") {
    OddPolynomial f({1.0, 0.0, -1.0});
    const RhoBound rho = rho_certificate(f, 1.0);
    // K_lambda = 1/2 + lambda^2/2 here (scalar calculus oracle).
    CHECK(rho.k_lambda(0.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rho.k_lambda(1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rho.k_lambda(2.0) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(rho.k_lambda(3.0) == doctest::Approx(0.5 + 4.5).epsilon(1e-12));
}

TEST_CASE("degree-one drift has a finite K_lambda only below half its slope") {
    OddPolynomial f({-1.0});
    const RhoBound rho = rho_certificate(f, 2.0);
    CHECK(rho.half_degree == 0);
    CHECK_FALSE(rho.superlinear());
    CHECK(rho.k_lambda(0.4) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rho.k_lambda(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rho.k_lambda(0.6) == std::numeric_limits<double>::infinity());
}

TEST_CASE("certificate construction rejects the zero drift") {
    CHECK_THROWS_AS(rho_certificate(OddPolynomial{}, 1.0), std::invalid_argument);
}

TEST_CASE("growth modulus closed-form values") {
    OddPolynomial cubic({0.0, 0.0, -1.0});  // f = -t^3
    CHECK(compute_a(cubic, 0.0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(compute_a(cubic, 1.0) == doctest::Approx(1.0).epsilon(1e-9));

    OddPolynomial ac({1.0, 0.0, -1.0});  // f = t - t^3
    // r = 0: sup_s (s - s^3)/(1 + s) = max s(1-s) = 1/4 at s = 1/2.
    CHECK(compute_a(ac, 0.0) == doctest::Approx(0.25).epsilon(1e-9));
    // r = 2: the shift can place the argument at the local max of |f| n [-2, 0]:
    // f(-2) = 6 against s -> 0+, giving sup = 6.
    CHECK(compute_a(ac, 2.0) == doctest::Approx(6.0).epsilon(1e-9));
}

TEST_CASE("growth modulus is nondecreasing in the shift radius") {
    OddPolynomial f({1.0, 0.0, -1.0});
    double prev = -1.0;
    for (double r : {0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0}) {
        const double a = compute_a(f, r);
        CHECK(a >= prev - 1e-12);
        prev = a;
    }
}

TEST_CASE("nemytskii operator matches direct quadrature of f(u)") {
    auto space = make_space(1.0, 8, 64, 0.3);
    OddPolynomial f({1.0, 0.0, -1.0});
    GaussianStream rng(21, 2);
    for (int trial = 0; trial < 10; ++trial) {
        const SpectralField u = random_field(space, rng, 1.0);
        const SpectralField Fu = nemytskii_F(f, u);
        const auto values = to_grid(u);
        // Independent projection: coefficients via explicit sine sums.
        constexpr double pi = std::numbers::pi;
        for (int n = 1; n <= 8; ++n) {
            double coeff = 0.0;
            for (int j = 1; j <= 64; ++j) {
                const double x = space->grid_point(j);
                coeff += f(values[j - 1]) * std::sqrt(2.0) * std::sin(n * pi * x);
            }
            coeff *= space->quad_weight();
            CHECK(Fu.coeffs()[n - 1] == doctest::Approx(coeff).epsilon(1e-11));
        }
    }
}

TEST_CASE("nemytskii rejects grids that alias the polynomial image") {
    auto space = make_space(1.0, 12, 48, 0.3);  // alias-free only to degree 1
    OddPolynomial f({1.0, 0.0, -1.0});
    SpectralField u(space, std::vector<double>(12, 0.1));
    CHECK_THROWS_AS(nemytskii_F(f, u), ConfigError);
}

TEST_CASE("zero drift maps every field to zero") {
    auto space = make_space(1.0, 4, 16, 0.3);
    OddPolynomial f;
    SpectralField u(space, {1.0, -2.0, 0.5, 0.1});
    const auto Fu = nemytskii_F(f, u);
    for (double c : Fu.coeffs()) CHECK(c == 0.0);
}

TEST_CASE("hypothesis validators accept the true certificate") {
    auto space = make_space(1.0, 12, 96, 0.3);
    OddPolynomial f({1.0, 0.0, -1.0});
    const DriftSplit split = split_drift(f);
    const RhoBound rho = rho_certificate(f, 1.0);
    const auto a_fn = [&](double r) { return compute_a(f, r); };

    GaussianStream rng(4, 3);
    for (int trial = 0; trial < 200; ++trial) {
        const SpectralField u = random_field(space, rng, 1.5);
        const SpectralField v = random_field(space, rng, 1.5);
        const SpectralField z = random_field(space, rng, 1.0);
        CHECK(check_h3(f, split, u, v).pass);
        CHECK(check_h4(f, rho, u).pass);
        CHECK(check_k_lambda(f, rho, 1.0, u).pass);
        CHECK(check_h2(f, u, z, a_fn).pass);
    }
}

TEST_CASE("validators detect a forged dissipativity constant") {
    auto space = make_space(1.0, 12, 96, 0.3);
    OddPolynomial f({1.0, 0.0, -1.0});
    DriftSplit forged = split_drift(f);
    forged.kappa = 0.5;  // true pairing constant is sup f' = 1 at the origin

    // A small field pair concentrated where f' is near its max burns the lie.
    SpectralField u(space, std::vector<double>(12, 0.0));
    u.coeffs()[0] = 0.01;
    SpectralField v(space, std::vector<double>(12, 0.0));
    const auto check = check_h3(f, forged, u, v);
    CHECK_FALSE(check.pass);

    // The pairing itself agrees with an independent grid quadrature.
    const SpectralField Fu = nemytskii_F(f, u);
    const SpectralField Fv = nemytskii_F(f, v);
    const double pairing = grid_pairing(Fu - Fv, u - v);
    CHECK(pairing > 0.5 * grid_pairing(u - v, u - v));
}

TEST_CASE("validators detect an understated offset constant") {
    auto space = make_space(1.0, 12, 96, 0.3);
    OddPolynomial f({1.0, 0.0, -1.0});
    RhoBound forged = rho_certificate(f, 1.0);
    forged.C = 0.0;  // drops the additive slack entirely

    SpectralField u(space, std::vector<double>(12, 0.0));
    u.coeffs()[0] = 0.1;  // <F(u), u> ~ ||u||^2 > rho(||u||^2) without C
    CHECK_FALSE(check_h4(f, forged, u).pass);
}

TEST_CASE("validators detect an understated growth modulus") {
    auto space = make_space(1.0, 12, 96, 0.3);
    OddPolynomial f({1.0, 0.0, -1.0});
    const auto halved = [&](double r) { return 0.5 * compute_a(f, r); };

    // Field peaking near 1/2, where the true modulus at r = 0 is attained.
    SpectralField y(space, std::vector<double>(12, 0.0));
    y.coeffs()[0] = 0.5 / std::sqrt(2.0);
    SpectralField z(space, std::vector<double>(12, 0.0));
    CHECK_FALSE(check_h2(f, y, z, halved).pass);
}

TEST_CASE("vacuous sup-norm check on the zero field") {
    auto space = make_space(1.0, 4, 16, 0.3);
    OddPolynomial f({1.0, 0.0, -1.0});
    SpectralField y(space, std::vector<double>(4, 0.0));
    SpectralField z(space, {0.3, 0.0, 0.0, 0.0});
    const auto a_fn = [&](double r) { return compute_a(f, r); };
    CHECK(check_h2(f, y, z, a_fn).pass);
}

TEST_CASE("lyapunov check fails under an overstated damping coefficient") {
    auto space = make_space(1.0, 12, 96, 0.3);
    OddPolynomial f({1.0, 0.0, -1.0});
    RhoBound forged = rho_certificate(f, 1.0);
    forged.lead_half = -50.0;  // claims far steeper tails than -t^3 delivers
    forged.C = 0.0;
    // K_1 collapses to 1/200, but <F(v), v> ~ ||v||^2 - ||v^2||^2 stays positive
    // at moderate amplitude, overrunning -||v||^2 + K_1.
    SpectralField v(space, std::vector<double>(12, 0.0));
    v.coeffs()[0] = 0.6;
    CHECK_FALSE(check_k_lambda(f, forged, 1.0, v).pass);
}
