#include "spdelab/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "spdelab/errors.hpp"
#include "spdelab/stats.hpp"

namespace spdelab {

void SimParams::validate() const {
    if (!(dt > 0.0)) throw ConfigError("sim: dt must be positive");
    if (!(horizon >= dt)) throw ConfigError("sim: horizon must be at least one step");
    if (burn_in < 0.0 || burn_in >= horizon)
        throw ConfigError("sim: burn_in must lie in [0, horizon)");
    if (snapshot_stride < 1) throw ConfigError("sim: snapshot_stride must be >= 1");
}

int SimParams::steps() const {
    return static_cast<int>(std::llround(horizon / dt));
}

double Trajectory::max_norm0() const {
    double m = 0.0;
    for (double v : norm0) m = std::max(m, v);
    return m;
}

namespace {

// Per-run constants of the scheme; computing exp/expm1 once per mode instead
// of once per step is what keeps long horizons cheap.
struct StepKernel {
    explicit StepKernel(const GalerkinSpace& space, double dt) {
        exp_dt.resize(space.modes());
        phi.resize(space.modes());
        for (int n = 1; n <= space.modes(); ++n) {
            const double l = space.eigenvalue(n);
            exp_dt[n - 1] = std::exp(l * dt);
            phi[n - 1] = std::expm1(l * dt) / l;
        }
    }
    std::vector<double> exp_dt;
    std::vector<double> phi;
};

void advance(std::vector<double>& coeffs, const StepKernel& k,
             const SpectralField& drift_term, const SpectralField& noise_term) {
    for (std::size_t n = 0; n < coeffs.size(); ++n)
        coeffs[n] = k.exp_dt[n] * coeffs[n] + k.phi[n] * drift_term.coeffs()[n] +
                    k.exp_dt[n] * noise_term.coeffs()[n];
}

[[noreturn]] void throw_blow_up(const SpectralField& last_finite, int step, double t) {
    std::ostringstream msg;
    msg << "state left the finite range at step " << step << " (t = " << t
        << "); last finite state had ||u||_0 = " << last_finite.norm0();
    if (last_finite.modes() > 0)
        msg << ", mode_1 = " << last_finite.coeffs()[0];
    throw BlowUpError(msg.str(), step, t);
}

}  // namespace

SpectralField step_exp_euler(const SpectralField& u, double dt, const OddPolynomial& f,
                             const NoiseSpec& noise, const WienerIncrement& dw) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_exp_euler: dt must be positive");
    const StepKernel kernel(*u.space(), dt);
    SpectralField out = u;
    advance(out.coeffs(), kernel, nemytskii_F(f, u), apply_B(noise, u, dw));
    if (!out.all_finite()) throw_blow_up(u, 0, dt);
    return out;
}

SpectralField step_exp_euler(const SpectralField& u, double dt, const OddPolynomial& f,
                             const NoiseSpec& noise, GaussianStream& rng) {
    return step_exp_euler(u, dt, f, noise, wiener_increment(u.modes(), dt, rng));
}

void simulate_stream(const SimParams& params, const OddPolynomial& f,
                     const NoiseSpec& noise, const SpectralField& x0,
                     const StepVisitor& visit) {
    params.validate();
    const auto& space = *x0.space();
    if (!f.is_zero() && !space.supports_degree(f.degree()))
        throw ConfigError("simulate: grid too coarse for drift degree (anti-aliasing)");
    if (noise.modes() != space.modes())
        throw ConfigError("simulate: noise weight count does not match mode count");

    const StepKernel kernel(space, params.dt);
    GaussianStream rng(params.seed, params.stream);
    const int n_steps = params.steps();
    const bool no_noise = noise.is_zero();

    SpectralField u = x0;
    visit(0, 0.0, u);
    for (int k = 0; k < n_steps; ++k) {
        const auto dw = no_noise ? WienerIncrement{std::vector<double>(space.modes(), 0.0), params.dt}
                                 : wiener_increment_at(space.modes(), params.dt, rng, k);
        SpectralField prev = u;
        advance(u.coeffs(), kernel, nemytskii_F(f, prev), apply_B(noise, prev, dw));
        const double t = (k + 1) * params.dt;
        if (!u.all_finite()) throw_blow_up(prev, k + 1, t);
        visit(k + 1, t, u);
    }
}

Trajectory simulate(const SimParams& params, const OddPolynomial& f,
                    const NoiseSpec& noise, const SpectralField& x0,
                    int recorded_modes) {
    Trajectory traj;
    traj.dt = params.dt;
    traj.stride = params.snapshot_stride;
    traj.recorded_modes = std::min(recorded_modes, x0.modes());
    const int n_steps = params.steps();
    traj.times.reserve(n_steps + 1);
    traj.norm0.reserve(n_steps + 1);
    traj.norm_gamma.reserve(n_steps + 1);
    traj.modes.reserve(static_cast<std::size_t>(n_steps + 1) * traj.recorded_modes);

    const double gamma = x0.space()->gamma();
    simulate_stream(params, f, noise, x0, [&](int k, double t, const SpectralField& u) {
        traj.times.push_back(t);
        traj.norm0.push_back(u.norm0());
        traj.norm_gamma.push_back(u.norm(gamma));
        for (int n = 0; n < traj.recorded_modes; ++n)
            traj.modes.push_back(u.coeffs()[n]);
        if (k % traj.stride == 0) {
            traj.snapshot_times.push_back(t);
            traj.snapshots.push_back(u);
        }
    });
    return traj;
}

WienerIncrement WienerPath::at(int k) const {
    if (k < 0 || k >= steps()) throw std::out_of_range("WienerPath::at: step out of range");
    WienerIncrement inc;
    inc.dt = dt;
    inc.dw.assign(increments.begin() + static_cast<std::size_t>(k) * n_modes,
                  increments.begin() + static_cast<std::size_t>(k + 1) * n_modes);
    return inc;
}

WienerPath WienerPath::draw(int steps, int n_modes, double dt, std::uint64_t seed,
                            std::uint64_t stream) {
    WienerPath path;
    path.dt = dt;
    path.n_modes = n_modes;
    path.increments.reserve(static_cast<std::size_t>(steps) * n_modes);
    GaussianStream rng(seed, stream);
    for (int k = 0; k < steps; ++k) {
        const auto inc = wiener_increment_at(n_modes, dt, rng, k);
        path.increments.insert(path.increments.end(), inc.dw.begin(), inc.dw.end());
    }
    return path;
}

Trajectory picard_map(const Trajectory& v, const SpectralField& x0,
                      const OddPolynomial& f, const NoiseSpec& noise,
                      const WienerPath& path) {
    if (v.stride != 1 || static_cast<int>(v.snapshots.size()) != v.steps() + 1)
        throw std::invalid_argument("picard_map: input trajectory must carry every step (stride 1)");
    if (path.steps() != v.steps() || path.dt != v.dt)
        throw std::invalid_argument("picard_map: increment path does not share the time grid");
    if (path.n_modes != x0.modes())
        throw std::invalid_argument("picard_map: increment path mode count mismatch");

    const auto& space = *x0.space();
    const StepKernel kernel(space, v.dt);
    const double gamma = space.gamma();

    Trajectory out;
    out.dt = v.dt;
    out.stride = 1;
    out.recorded_modes = v.recorded_modes;

    SpectralField z = x0;
    auto record = [&](double t, const SpectralField& u) {
        out.times.push_back(t);
        out.norm0.push_back(u.norm0());
        out.norm_gamma.push_back(u.norm(gamma));
        for (int n = 0; n < out.recorded_modes; ++n) out.modes.push_back(u.coeffs()[n]);
        out.snapshot_times.push_back(t);
        out.snapshots.push_back(u);
    };
    record(0.0, z);
    for (int k = 0; k < v.steps(); ++k) {
        SpectralField prev = z;
        advance(z.coeffs(), kernel, nemytskii_F(f, prev),
                apply_B(noise, v.snapshots[k], path.at(k)));
        const double t = (k + 1) * v.dt;
        if (!z.all_finite()) throw_blow_up(prev, k + 1, t);
        record(t, z);
    }
    return out;
}

namespace {

// sup over grid times t <= T of ||a(t) - b(t)||_0^p, for each horizon cut.
std::vector<double> sup_gap_pow(const Trajectory& a, const Trajectory& b,
                                std::span<const double> horizons, double p) {
    std::vector<double> out(horizons.size(), 0.0);
    double running = 0.0;
    std::size_t h = 0;
    for (int k = 0; k <= a.steps() && h < horizons.size(); ++k) {
        const double t = a.times[k];
        while (h < horizons.size() && t > horizons[h] + 1e-12) {
            out[h] = running;
            ++h;
        }
        if (h >= horizons.size()) break;
        double gap_sq = 0.0;
        for (int n = 0; n < a.snapshots[k].modes(); ++n) {
            const double d = a.snapshots[k].coeffs()[n] - b.snapshots[k].coeffs()[n];
            gap_sq += d * d;
        }
        running = std::max(running, std::pow(gap_sq, p / 2.0));
    }
    for (; h < horizons.size(); ++h) out[h] = running;
    return out;
}

}  // namespace

double ContractionResult::diff_upper95(std::size_t a, std::size_t b, std::uint64_t seed) const {
    GaussianStream rng(seed, make_stream(stream_purpose::bootstrap, 1));
    return stats::bootstrap_ratio_diff_upper95(num_sups[a], den_sups[a], num_sups[b],
                                               den_sups[b], 2000, rng);
}

ContractionResult contraction_experiment(const SpectralField& x0, const OddPolynomial& f,
                                         const NoiseSpec& noise, std::span<const double> t_grid,
                                         double dt, int pairs, double p, std::uint64_t seed) {
    if (!(p > 4.0))
        throw std::invalid_argument("contraction_experiment: p must exceed 4");
    if (t_grid.empty() || !std::is_sorted(t_grid.begin(), t_grid.end()))
        throw std::invalid_argument("contraction_experiment: horizons must be ascending");
    if (pairs < 2) throw std::invalid_argument("contraction_experiment: need at least 2 pairs");

    const double t_max = t_grid.back();
    SimParams params;
    params.dt = dt;
    params.horizon = t_max;
    params.seed = seed;
    params.snapshot_stride = 1;

    ContractionResult result;
    result.p = p;
    result.pairs = pairs;
    result.num_sups.assign(t_grid.size(), {});
    result.den_sups.assign(t_grid.size(), {});
    for (auto& v : result.num_sups) v.reserve(pairs);
    for (auto& v : result.den_sups) v.reserve(pairs);

    for (int i = 0; i < pairs; ++i) {
        params.stream = make_stream(stream_purpose::dynamics, 3ull * i);
        const Trajectory v1 = simulate(params, f, noise, x0, 0);
        params.stream = make_stream(stream_purpose::dynamics, 3ull * i + 1);
        const Trajectory v2 = simulate(params, f, noise, x0, 0);
        const WienerPath common = WienerPath::draw(
            v1.steps(), x0.modes(), dt, seed, make_stream(stream_purpose::picard, 3ull * i + 2));
        const Trajectory z1 = picard_map(v1, x0, f, noise, common);
        const Trajectory z2 = picard_map(v2, x0, f, noise, common);

        const auto num = sup_gap_pow(z1, z2, t_grid, p);
        const auto den = sup_gap_pow(v1, v2, t_grid, p);
        for (std::size_t h = 0; h < t_grid.size(); ++h) {
            result.num_sups[h].push_back(num[h]);
            result.den_sups[h].push_back(den[h]);
        }
    }

    GaussianStream boot(seed, make_stream(stream_purpose::bootstrap, 0));
    for (std::size_t h = 0; h < t_grid.size(); ++h) {
        RatioEstimate est;
        est.t_horizon = t_grid[h];
        est.den_mean = stats::mean(result.den_sups[h]);
        est.num_mean = stats::mean(result.num_sups[h]);
        if (est.den_mean == 0.0)
            throw std::invalid_argument("contraction_experiment: input pairs coincide (zero denominator)");
        const auto ci = stats::bootstrap_ratio(result.num_sups[h], result.den_sups[h], 2000, boot);
        est.ratio = ci.ratio;
        est.lo = ci.lo;
        est.hi = ci.hi;
        result.ratios.push_back(est);
    }
    return result;
}

namespace {

// One exact chain simulated at half resolution; returns, per horizon, the
// sup of ||X||_gamma^p over all half-grid times (fine reading) and over the
// even-index skeleton only (coarse reading). The skeleton has exactly the law
// of a chain stepped at dt, so the two readings form a coupled refinement
// pair: their gap is the pure grid-resolution effect, not Monte-Carlo noise.
// Exact transition over a half step: X_n' = e^{l h} X_n + eta_n g_n xi with
// g_n^2 = (1 - e^{2 l h}) / (2|l|), the variance of the fresh integral piece.
struct PathSups {
    std::vector<double> coarse, fine;
};

PathSups convolution_path(const GalerkinSpace& space, std::span<const double> eta,
                          std::span<const double> horizons, double dt_half, int n_half_steps,
                          double p, double gamma, GaussianStream& rng) {
    const int N = space.modes();
    std::vector<double> decay(N), gain(N), weight(N), x(N, 0.0);
    for (int n = 1; n <= N; ++n) {
        const double l = space.eigenvalue(n);
        decay[n - 1] = std::exp(l * dt_half);
        gain[n - 1] = eta[n - 1] * std::sqrt(-std::expm1(2.0 * l * dt_half) / (2.0 * -l));
        weight[n - 1] = std::pow(space.abs_eigenvalue(n), 2.0 * gamma);
    }
    PathSups out;
    out.coarse.assign(horizons.size(), 0.0);
    out.fine.assign(horizons.size(), 0.0);
    double run_fine = 0.0, run_coarse = 0.0;
    std::size_t hf = 0, hc = 0;
    for (int k = 1; k <= n_half_steps; ++k) {
        double norm_sq = 0.0;
        for (int n = 0; n < N; ++n) {
            x[n] = decay[n] * x[n] + gain[n] * rng.normal();
            norm_sq += weight[n] * x[n] * x[n];
        }
        const double value = std::pow(norm_sq, p / 2.0);
        run_fine = std::max(run_fine, value);
        const double t = k * dt_half;
        while (hf < horizons.size() && t >= horizons[hf] - 1e-12) out.fine[hf++] = run_fine;
        if (k % 2 == 0) {
            run_coarse = std::max(run_coarse, value);
            while (hc < horizons.size() && t >= horizons[hc] - 1e-12) out.coarse[hc++] = run_coarse;
        }
    }
    for (; hf < horizons.size(); ++hf) out.fine[hf] = run_fine;
    for (; hc < horizons.size(); ++hc) out.coarse[hc] = run_coarse;
    return out;
}

std::vector<ConvolutionEstimate> summarize(const std::vector<std::vector<double>>& sups,
                                           std::span<const double> t_grid, double hs_p) {
    std::vector<ConvolutionEstimate> out;
    for (std::size_t h = 0; h < t_grid.size(); ++h) {
        ConvolutionEstimate e;
        e.t_horizon = t_grid[h];
        e.sup_moment = stats::mean(sups[h]);
        e.halfwidth = stats::ci_halfwidth95(sups[h]);
        e.ratio = e.sup_moment / (t_grid[h] * hs_p);
        out.push_back(e);
    }
    return out;
}

}  // namespace

ConvolutionResult convolution_experiment(const SpacePtr& space, std::span<const double> eta,
                                         std::span<const double> t_grid, double dt, int ensemble,
                                         double p, std::uint64_t seed) {
    if (!(p > 2.0)) throw std::invalid_argument("convolution_experiment: p must exceed 2");
    const double gamma = space->gamma();
    if (eta.size() != static_cast<std::size_t>(space->modes()))
        throw std::invalid_argument("convolution_experiment: eta size mismatch");
    if (t_grid.empty() || !std::is_sorted(t_grid.begin(), t_grid.end()))
        throw std::invalid_argument("convolution_experiment: horizons must be ascending");

    ConvolutionResult result;
    result.p = p;
    result.gamma = gamma;
    double hs_sq = 0.0;
    for (double e : eta) hs_sq += e * e;
    result.hs_eta = std::sqrt(hs_sq);
    if (result.hs_eta == 0.0) {
        // Degenerate input: the convolution is identically zero.
        for (double t : t_grid)
            result.coarse.push_back({t, 0.0, 0.0, 0.0});
        result.fine = result.coarse;
        result.refine_ok = true;
        return result;
    }
    const double hs_p = std::pow(result.hs_eta, p);

    const double t_max = t_grid.back();
    const int n_half_steps = static_cast<int>(std::llround(t_max / (dt / 2.0)));
    std::vector<std::vector<double>> coarse_sups(t_grid.size()), fine_sups(t_grid.size());
    for (auto& v : coarse_sups) v.reserve(ensemble);
    for (auto& v : fine_sups) v.reserve(ensemble);
    for (int i = 0; i < ensemble; ++i) {
        GaussianStream rng(seed, make_stream(stream_purpose::dynamics, i));
        const PathSups s =
            convolution_path(*space, eta, t_grid, dt / 2.0, n_half_steps, p, gamma, rng);
        for (std::size_t h = 0; h < t_grid.size(); ++h) {
            coarse_sups[h].push_back(s.coarse[h]);
            fine_sups[h].push_back(s.fine[h]);
        }
    }
    result.coarse = summarize(coarse_sups, t_grid, hs_p);
    result.fine = summarize(fine_sups, t_grid, hs_p);
    for (std::size_t h = 0; h < t_grid.size(); ++h) {
        const double c = result.coarse[h].sup_moment, fmom = result.fine[h].sup_moment;
        if (c > 0.0)
            result.refine_rel_change = std::max(result.refine_rel_change, std::abs(fmom - c) / c);
    }
    result.refine_ok = result.refine_rel_change < 0.10;
    return result;
}

std::vector<double> coupled_gap_curve(const SpectralField& x, const SpectralField& x_pert,
                                      std::span<const double> t_grid, double dt,
                                      const OddPolynomial& f, const NoiseSpec& noise,
                                      std::uint64_t seed, std::uint64_t stream) {
    if (t_grid.empty() || !std::is_sorted(t_grid.begin(), t_grid.end()))
        throw std::invalid_argument("coupled_gap_curve: grid times must be ascending");
    const auto& space = *x.space();
    const StepKernel kernel(space, dt);
    GaussianStream rng(seed, stream);
    const int n_steps = static_cast<int>(std::llround(t_grid.back() / dt));

    SpectralField u = x, v = x_pert;
    auto gap_sq = [&]() {
        double acc = 0.0;
        for (int n = 0; n < u.modes(); ++n) {
            const double d = u.coeffs()[n] - v.coeffs()[n];
            acc += d * d;
        }
        return acc;
    };
    std::vector<double> out(t_grid.size(), 0.0);
    std::size_t h = 0;
    while (h < t_grid.size() && t_grid[h] <= 1e-12) out[h++] = gap_sq();
    for (int k = 0; k < n_steps && h < t_grid.size(); ++k) {
        const auto dw = wiener_increment_at(space.modes(), dt, rng, k);
        const SpectralField pu = u, pv = v;
        advance(u.coeffs(), kernel, nemytskii_F(f, pu), apply_B(noise, pu, dw));
        advance(v.coeffs(), kernel, nemytskii_F(f, pv), apply_B(noise, pv, dw));
        const double t = (k + 1) * dt;
        if (!u.all_finite() || !v.all_finite()) throw_blow_up(pu, k + 1, t);
        while (h < t_grid.size() && t >= t_grid[h] - 1e-9) out[h++] = gap_sq();
    }
    return out;
}

double convolution_mean_square(const SpacePtr& space, std::span<const double> eta,
                               double t_horizon, double dt, int ensemble, std::uint64_t seed) {
    const int N = space->modes();
    const int n_steps = static_cast<int>(std::llround(t_horizon / dt));
    std::vector<double> decay(N), gain(N);
    for (int n = 1; n <= N; ++n) {
        const double l = space->eigenvalue(n);
        decay[n - 1] = std::exp(l * dt);
        gain[n - 1] = eta[n - 1] * std::sqrt(-std::expm1(2.0 * l * dt) / (2.0 * -l));
    }
    double acc = 0.0;
    for (int i = 0; i < ensemble; ++i) {
        GaussianStream rng(seed, make_stream(stream_purpose::dynamics, i));
        std::vector<double> x(N, 0.0);
        for (int k = 0; k < n_steps; ++k)
            for (int n = 0; n < N; ++n) x[n] = decay[n] * x[n] + gain[n] * rng.normal();
        double norm_sq = 0.0;
        for (double v : x) norm_sq += v * v;
        acc += norm_sq;
    }
    return acc / ensemble;
}

}  // namespace spdelab
