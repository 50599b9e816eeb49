#include "spdelab/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spdelab/errors.hpp"

namespace spdelab {

SigmaProfile SigmaProfile::constant(double c) {
    return SigmaProfile(Shape::Const, {c}, 0.0);
}

SigmaProfile SigmaProfile::sine(double amp, double freq, double phase) {
    return SigmaProfile(Shape::Sin, {amp, freq, phase}, std::abs(amp * freq));
}

SigmaProfile SigmaProfile::clipped_linear(double offset, double slope, double lo, double hi) {
    if (!(lo <= hi))
        throw std::invalid_argument("SigmaProfile: clip range is empty");
    return SigmaProfile(Shape::ClippedLinear, {offset, slope, lo, hi}, std::abs(slope));
}

void SigmaProfile::declare_lipschitz(double lip) {
    if (lip < lip_ * (1.0 - 1e-12))
        throw ConfigError("sigma: declared lip_sigma understates the profile's Lipschitz constant");
    lip_ = lip;
}

double SigmaProfile::operator()(double t) const {
    switch (shape_) {
        case Shape::Const:
            return params_[0];
        case Shape::Sin:
            return params_[0] * std::sin(params_[1] * t + params_[2]);
        case Shape::ClippedLinear:
            return std::clamp(params_[0] + params_[1] * t, params_[2], params_[3]);
    }
    return 0.0;
}

NoiseSpec NoiseSpec::additive_diagonal(std::vector<double> weights) {
    if (weights.empty())
        throw std::invalid_argument("NoiseSpec: empty weight vector");
    return NoiseSpec(NoiseKind::AdditiveDiagonal, std::move(weights));
}

NoiseSpec NoiseSpec::nemytskii(std::vector<double> weights, SigmaProfile sigma) {
    if (weights.empty())
        throw std::invalid_argument("NoiseSpec: empty weight vector");
    NoiseSpec s(NoiseKind::NemytskiiMultiplicative, std::move(weights));
    s.sigma_.push_back(std::move(sigma));
    return s;
}

NoiseSpec NoiseSpec::none(int n_modes) {
    return NoiseSpec(NoiseKind::AdditiveDiagonal, std::vector<double>(n_modes, 0.0));
}

std::vector<double> NoiseSpec::power_law_weights(double q0, double beta, int n_modes) {
    std::vector<double> w(n_modes);
    for (int n = 1; n <= n_modes; ++n) w[n - 1] = q0 * std::pow(n, -beta);
    return w;
}

bool NoiseSpec::is_zero() const {
    for (double q : weights_)
        if (q != 0.0) return false;
    return true;
}

const SigmaProfile& NoiseSpec::sigma() const {
    if (sigma_.empty())
        throw std::logic_error("NoiseSpec: additive kind has no sigma profile");
    return sigma_[0];
}

double NoiseSpec::weight_sum_sq() const {
    double acc = 0.0;
    for (double q : weights_) acc += q * q;
    return acc;
}

WienerIncrement wiener_increment(int n_modes, double dt, GaussianStream& rng) {
    if (dt < 0.0) throw std::invalid_argument("wiener_increment: dt must be >= 0");
    WienerIncrement inc;
    inc.dt = dt;
    inc.dw.resize(n_modes);
    if (dt == 0.0) {
        std::fill(inc.dw.begin(), inc.dw.end(), 0.0);
        return inc;
    }
    const double s = std::sqrt(dt);
    for (int n = 0; n < n_modes; ++n) inc.dw[n] = s * rng.normal();
    return inc;
}

WienerIncrement wiener_increment_at(int n_modes, double dt, GaussianStream& rng,
                                    std::uint64_t step) {
    // One Box-Muller pair per counter block: a step owns ceil(N/2) blocks.
    const std::uint64_t blocks_per_step = (static_cast<std::uint64_t>(n_modes) + 1) / 2;
    rng.seek(step * blocks_per_step);
    return wiener_increment(n_modes, dt, rng);
}

SpectralField apply_B(const NoiseSpec& spec, const SpectralField& u,
                      const WienerIncrement& dw) {
    const auto& space = *u.space();
    if (spec.modes() != space.modes() || static_cast<int>(dw.dw.size()) != space.modes())
        throw std::invalid_argument("apply_B: dimension mismatch");

    if (spec.kind() == NoiseKind::AdditiveDiagonal) {
        std::vector<double> out(space.modes());
        for (int n = 0; n < space.modes(); ++n) out[n] = spec.weights()[n] * dw.dw[n];
        return SpectralField(u.space(), std::move(out));
    }

    // w = sum_n q_n dW_n e_n on the grid, scaled pointwise by sigma(u), then
    // projected back.
    std::vector<double> wc(space.modes());
    for (int n = 0; n < space.modes(); ++n) wc[n] = spec.weights()[n] * dw.dw[n];
    std::vector<double> wg(space.grid_size()), ug(space.grid_size());
    space.to_grid(wc, wg);
    space.to_grid(u.coeffs(), ug);
    const auto& sig = spec.sigma();
    for (int j = 0; j < space.grid_size(); ++j) wg[j] *= sig(ug[j]);
    std::vector<double> out(space.modes());
    space.from_grid(wg, out);
    return SpectralField(u.space(), std::move(out));
}

double hs_norm_sq(const NoiseSpec& spec, const SpectralField& u) {
    if (spec.kind() == NoiseKind::AdditiveDiagonal) return spec.weight_sum_sq();

    // sum_n q_n^2 * h * sum_j sigma(u(x_j))^2 e_n(x_j)^2. The basis-squared sum
    // collapses: sum_n q_n^2 e_n(x_j)^2 evaluated directly.
    const auto& space = *u.space();
    if (spec.modes() != space.modes())
        throw std::invalid_argument("hs_norm: dimension mismatch");
    std::vector<double> ug(space.grid_size());
    space.to_grid(u.coeffs(), ug);
    const auto& sig = spec.sigma();
    const double amp_sq = 2.0 / space.length();
    constexpr double kPi = 3.14159265358979323846;
    double acc = 0.0;
    for (int n = 1; n <= space.modes(); ++n) {
        const double q = spec.weights()[n - 1];
        if (q == 0.0) continue;
        double quad = 0.0;
        for (int j = 1; j <= space.grid_size(); ++j) {
            const double e = std::sin(n * kPi * j / (space.grid_size() + 1.0));
            const double sv = sig(ug[j - 1]);
            quad += sv * sv * amp_sq * e * e;
        }
        acc += q * q * space.quad_weight() * quad;
    }
    return acc;
}

double lipschitz_bound(const NoiseSpec& spec, double domain_length) {
    if (spec.kind() == NoiseKind::AdditiveDiagonal) return 0.0;
    return spec.sigma().lipschitz() * std::sqrt(2.0 / domain_length) *
           std::sqrt(spec.weight_sum_sq());
}

GrowthConstants d_constant(const NoiseSpec& spec, const SpacePtr& space) {
    GrowthConstants g;
    g.lipschitz = lipschitz_bound(spec, space->length());
    g.b0_hs = hs_norm(spec, SpectralField{space});
    const double m = std::max(g.lipschitz, g.b0_hs);
    g.safe = 2.0 * std::max(g.lipschitz * g.lipschitz, g.b0_hs * g.b0_hs);
    g.undoubled = m * m;
    return g;
}

}  // namespace spdelab
