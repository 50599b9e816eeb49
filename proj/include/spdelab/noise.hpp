#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spdelab/rng.hpp"
#include "spdelab/spectral.hpp"

namespace spdelab {

// Scalar profile for the multiplicative kind: the diffusion acts pointwise as
// sigma(u(x)) times the modal noise field. Lipschitz constant derived from the
// shape; a config may declare a larger one but never a smaller one.
class SigmaProfile {
public:
    enum class Shape { Const, Sin, ClippedLinear };

    static SigmaProfile constant(double c);
    // amp * sin(freq * t + phase)
    static SigmaProfile sine(double amp, double freq, double phase);
    // clamp(offset + slope * t, lo, hi)
    static SigmaProfile clipped_linear(double offset, double slope, double lo, double hi);

    Shape shape() const { return shape_; }
    const std::vector<double>& params() const { return params_; }
    double lipschitz() const { return lip_; }
    void declare_lipschitz(double lip);  // must be >= derived value

    double operator()(double t) const;

private:
    SigmaProfile(Shape s, std::vector<double> p, double lip)
        : shape_(s), params_(std::move(p)), lip_(lip) {}
    Shape shape_;
    std::vector<double> params_;
    double lip_;
};

enum class NoiseKind { AdditiveDiagonal, NemytskiiMultiplicative };

// Diffusion operator family B. Weights q_1..q_N are the diagonal of Q^{1/2} in
// the eigenbasis. Additive-diagonal: B(u) e_n = q_n e_n. Nemytskii: B(u) h is
// the projection of sigma(u(x)) * (sum_n q_n h_n e_n)(x).
class NoiseSpec {
public:
    static NoiseSpec additive_diagonal(std::vector<double> weights);
    static NoiseSpec nemytskii(std::vector<double> weights, SigmaProfile sigma);
    static NoiseSpec none(int n_modes);  // all-zero weights: B == 0
    static std::vector<double> power_law_weights(double q0, double beta, int n_modes);

    NoiseKind kind() const { return kind_; }
    bool is_zero() const;
    int modes() const { return static_cast<int>(weights_.size()); }
    const std::vector<double>& weights() const { return weights_; }
    const SigmaProfile& sigma() const;
    double weight_sum_sq() const;

private:
    NoiseSpec(NoiseKind k, std::vector<double> w) : kind_(k), weights_(std::move(w)) {}
    NoiseKind kind_;
    std::vector<double> weights_;
    std::vector<SigmaProfile> sigma_;  // empty or one element
};

// Mode-wise increment of the truncated Wiener process: N iid N(0, dt) draws.
struct WienerIncrement {
    std::vector<double> dw;
    double dt = 0.0;
};

// Sequential draw from the stream.
WienerIncrement wiener_increment(int n_modes, double dt, GaussianStream& rng);
// Pure function of (seed, stream, step): seeks the stream to the step's
// counter range, so any increment can be regenerated without replaying.
WienerIncrement wiener_increment_at(int n_modes, double dt, GaussianStream& rng,
                                    std::uint64_t step);

// B(u) applied to the increment.
SpectralField apply_B(const NoiseSpec& spec, const SpectralField& u,
                      const WienerIncrement& dw);

// ||B(u)||_HS^2 = sum_n ||B(u) e_n||_0^2. State-independent for the additive
// kind; quadrature of sum_n q_n^2 integral sigma(u)^2 e_n^2 otherwise.
double hs_norm_sq(const NoiseSpec& spec, const SpectralField& u);
inline double hs_norm(const NoiseSpec& spec, const SpectralField& u);

// Lipschitz constant of u -> B(u) in Hilbert-Schmidt norm:
// 0 for additive; lip_sigma * sqrt(2/length) * sqrt(sum q^2) for nemytskii
// (sup-norm of the eigenfunctions is sqrt(2/length)).
double lipschitz_bound(const NoiseSpec& spec, double domain_length);

// Growth constants certifying ||B(u)||_HS^2 <= D (1 + ||u||_0^2).
struct GrowthConstants {
    double lipschitz = 0.0;   // L
    double b0_hs = 0.0;       // ||B(0)||_HS
    double safe = 0.0;        // 2 max(L^2, ||B(0)||_HS^2) — used in checks
    double undoubled = 0.0;   // (L v ||B(0)||_HS)^2 — reported for comparison
};

GrowthConstants d_constant(const NoiseSpec& spec, const SpacePtr& space);

inline double hs_norm(const NoiseSpec& spec, const SpectralField& u) {
    return std::sqrt(hs_norm_sq(spec, u));
}

}  // namespace spdelab
