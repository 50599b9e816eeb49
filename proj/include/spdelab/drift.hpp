#pragma once

#include <functional>
#include <vector>

#include "spdelab/spectral.hpp"

namespace spdelab {

// Reaction polynomial f(t) = a_1 t + a_2 t^2 + ... + a_d t^d with odd degree d
// and a_d < 0 (superlinearly dissipative tails). An empty coefficient list is
// the zero drift, accepted so the linear equation runs through the same code
// path; certificate construction rejects it.
class OddPolynomial {
public:
    OddPolynomial() = default;
    explicit OddPolynomial(std::vector<double> coefficients);  // coefficients[k] multiplies t^{k+1}

    bool is_zero() const { return a_.empty(); }
    int degree() const { return static_cast<int>(a_.size()); }
    int half_degree() const { return (degree() - 1) / 2; }  // n with d = 2n+1
    double leading() const;
    const std::vector<double>& coefficients() const { return a_; }

    double operator()(double t) const;
    double derivative(double t) const;

    // Ascending coefficient vectors (constant term first) for root work.
    std::vector<double> poly_coeffs() const;        // f itself (constant 0)
    std::vector<double> derivative_coeffs() const;  // f'

private:
    std::vector<double> a_;
};

// F(u) = projection of x -> f(u(x)): to grid, pointwise f, back to coefficients.
// Requires the grid to be alias-free for degree d.
SpectralField nemytskii_F(const OddPolynomial& f, const SpectralField& u);

// Two-piece decomposition f = g1 + g2: g1 follows f outside [zeta1, zeta2] and
// the chord through (zeta_i, f(zeta_i)) inside, so g1 is nonincreasing on all
// of R; g2 = f - g1 is supported on [zeta1, zeta2] with Lipschitz constant kappa.
struct DriftSplit {
    OddPolynomial f;
    double zeta1 = 0.0;
    double zeta2 = 0.0;
    double slope = 0.0;      // chord slope m
    double intercept = 0.0;  // chord value at t = 0
    double kappa = 0.0;      // sup of |f' - m| over [zeta1, zeta2]
    double g2_sup = 0.0;     // sup of |f - chord| over [zeta1, zeta2]
    bool degenerate = false; // f' <= 0 everywhere: g2 == 0

    double line(double t) const { return slope * t + intercept; }
    double g1(double t) const;
    double g2(double t) const { return f(t) - g1(t); }
};

DriftSplit split_drift(const OddPolynomial& f);

// One-sided bound <F(u), u> <= rho(||u||_0^2) with
// rho(r) = (a_d/2) * length^{-n} * r^{n+1} + C. C is the best of the sharp
// scalar bound (exact polynomial maximization) and the generic Young-splitting
// recipe; both constants are kept for reporting.
struct RhoBound {
    int half_degree = 0;    // n
    double lead_half = 0.0; // a_d / 2 (< 0)
    double length = 0.0;
    double C = 0.0;         // offset used by rho and k_lambda
    double C_sharp = 0.0;
    double C_young = 0.0;

    double rho(double r) const;
    // K_lambda = C + sup_{r >= 0} (lambda r - c r^{n+1}), c = |a_d|/(2 length^n).
    // Finite for every lambda >= 0 when n >= 1; for n = 0 only up to |a_1|/2
    // (returns +infinity beyond).
    double k_lambda(double lambda) const;
    bool superlinear() const { return half_degree >= 1; }
};

RhoBound rho_certificate(const OddPolynomial& f, double length);

// Growth modulus for the sup-norm pairing: the smallest constant (up to search
// resolution) with f(s + z) * sign(s) <= a(r) (1 + |s|) for all |z| <= r and all
// real s. Nondecreasing in r.
double compute_a(const OddPolynomial& f, double r);

// Single-sample hypothesis checks. `pass` uses absolute tolerance 1e-9 plus
// 1e-12 relative slack for quadrature round-off.
struct HypothesisCheck {
    bool pass = true;
    double lhs = 0.0;       // attained left side (worst point for pointwise checks)
    double rhs = 0.0;       // bound it must stay under
    double margin = 0.0;    // rhs - lhs at the worst point
};

inline constexpr double kCheckTolerance = 1e-9;

// <F(u)-F(v), u-v> <= kappa ||u-v||_0^2, plus pointwise monotonicity of g1 on
// the grid values of u and v.
HypothesisCheck check_h3(const OddPolynomial& f, const DriftSplit& split,
                         const SpectralField& u, const SpectralField& v);

// Sup-norm subdifferential pairing at the maximizer of |y|:
// f(y(x*) + z(x*)) sign(y(x*)) <= a(sup|z|) (1 + sup|y|). y == 0 passes vacuously.
HypothesisCheck check_h2(const OddPolynomial& f, const SpectralField& y,
                         const SpectralField& z,
                         const std::function<double(double)>& a);

// <F(u), u> <= rho(||u||_0^2).
HypothesisCheck check_h4(const OddPolynomial& f, const RhoBound& rho,
                         const SpectralField& u);

// <F(v), v> <= -lambda ||v||_0^2 + K_lambda.
HypothesisCheck check_k_lambda(const OddPolynomial& f, const RhoBound& rho,
                               double lambda, const SpectralField& v);

// Aggregated certificate, the unit consumed by the occupation-measure checks
// and serialized by the CLI. lambda_star must exceed the noise growth
// constant D for the tightness bound to apply.
struct DissipativityData {
    RhoBound rho;
    double lambda_star = 0.0;
    double k_lambda_star = 0.0;
    double D = 0.0;        // safe growth constant 2 max(L^2, ||B(0)||_HS^2)
    double D_paper = 0.0;  // (L v ||B(0)||)^2 as printed in the source estimate
    double c_omega = 0.0;
};

struct DriftCertificate {
    DriftSplit split;
    DissipativityData diss;
};

}  // namespace spdelab
