#include "spdelab/invariant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spdelab/errors.hpp"
#include "spdelab/stats.hpp"

namespace spdelab {

Histogram::Histogram(HistogramSpec spec) : spec_(spec) {
    if (spec_.bins < 1 || !(spec_.lo < spec_.hi))
        throw std::invalid_argument("Histogram: empty range");
    mass_.assign(spec_.bins, 0.0);
}

void Histogram::add(double x, double w) {
    if (x < spec_.lo) {
        below_ += w;
        return;
    }
    if (x >= spec_.hi) {
        above_ += w;
        return;
    }
    const int b = static_cast<int>((x - spec_.lo) / (spec_.hi - spec_.lo) * spec_.bins);
    mass_[std::min(b, spec_.bins - 1)] += w;
}

void Histogram::merge(const Histogram& other) {
    if (other.spec_.lo != spec_.lo || other.spec_.hi != spec_.hi || other.spec_.bins != spec_.bins)
        throw std::invalid_argument("Histogram::merge: incompatible ranges");
    for (int b = 0; b < spec_.bins; ++b) mass_[b] += other.mass_[b];
    below_ += other.below_;
    above_ += other.above_;
}

double Histogram::total() const {
    double acc = below_ + above_;
    for (double m : mass_) acc += m;
    return acc;
}

OccupationMeasure::OccupationMeasure(SpacePtr space, MeasureOptions options)
    : space_(std::move(space)),
      options_(std::move(options)),
      norm_hist_(options_.norm_hist),
      mode_hist_(options_.mode_hist),
      reservoir_rng_(options_.seed, options_.stream) {
    if (!space_) throw std::invalid_argument("OccupationMeasure: null space");
    if (options_.reservoir_capacity < 0)
        throw std::invalid_argument("OccupationMeasure: negative reservoir capacity");
    if (!std::is_sorted(options_.tail_radii.begin(), options_.tail_radii.end()))
        throw std::invalid_argument("OccupationMeasure: tail radii must be ascending");
    sum_modes_.assign(space_->modes(), 0.0);
    sum_modes_sq_.assign(space_->modes(), 0.0);
    tail_weight_.assign(options_.tail_radii.size(), 0.0);
    reservoir_.reserve(options_.reservoir_capacity);
}

void OccupationMeasure::add_field(const SpectralField& u, double weight) {
    if (u.space()->modes() != space_->modes())
        throw std::invalid_argument("OccupationMeasure: field from a different space");
    const double n0 = u.norm0();
    const double ng = u.norm(space_->gamma());
    ++count_;
    weight_ += weight;
    sum_norm0_sq_ += weight * n0 * n0;
    sum_gamma_sq_ += weight * ng * ng;
    for (int n = 0; n < space_->modes(); ++n) {
        const double c = u.coeffs()[n];
        sum_modes_[n] += weight * c;
        sum_modes_sq_[n] += weight * c * c;
    }
    for (std::size_t i = 0; i < tail_weight_.size(); ++i)
        if (ng > options_.tail_radii[i]) tail_weight_[i] += weight;
    norm_hist_.add(n0, weight);
    mode_hist_.add(u.coeffs().empty() ? 0.0 : u.coeffs()[0], weight);

    // Algorithm R keyed to this measure's stream: deterministic replay.
    if (options_.reservoir_capacity == 0) return;
    if (static_cast<int>(reservoir_.size()) < options_.reservoir_capacity) {
        reservoir_.push_back(u);
    } else {
        const std::uint64_t j = reservoir_rng_.uniform_index(static_cast<std::uint64_t>(count_));
        if (j < reservoir_.size()) reservoir_[j] = u;
    }
}

void OccupationMeasure::merge(const OccupationMeasure& other) {
    if (other.space_->modes() != space_->modes())
        throw std::invalid_argument("OccupationMeasure::merge: incompatible spaces");
    if (other.options_.tail_radii != options_.tail_radii)
        throw std::invalid_argument("OccupationMeasure::merge: incompatible tail radii");
    count_ += other.count_;
    weight_ += other.weight_;
    sum_norm0_sq_ += other.sum_norm0_sq_;
    sum_gamma_sq_ += other.sum_gamma_sq_;
    for (int n = 0; n < space_->modes(); ++n) {
        sum_modes_[n] += other.sum_modes_[n];
        sum_modes_sq_[n] += other.sum_modes_sq_[n];
    }
    for (std::size_t i = 0; i < tail_weight_.size(); ++i)
        tail_weight_[i] += other.tail_weight_[i];
    norm_hist_.merge(other.norm_hist_);
    mode_hist_.merge(other.mode_hist_);

    // Moments above merged exactly; the reservoir is re-subsampled from the
    // concatenation, deterministically under this measure's stream.
    if (options_.reservoir_capacity == 0) return;
    std::vector<SpectralField> pool = std::move(reservoir_);
    pool.insert(pool.end(), other.reservoir_.begin(), other.reservoir_.end());
    reservoir_.clear();
    std::int64_t seen = 0;
    for (auto& u : pool) {
        ++seen;
        if (static_cast<int>(reservoir_.size()) < options_.reservoir_capacity) {
            reservoir_.push_back(std::move(u));
        } else {
            const std::uint64_t j = reservoir_rng_.uniform_index(static_cast<std::uint64_t>(seen));
            if (j < reservoir_.size()) reservoir_[j] = std::move(u);
        }
    }
}

double OccupationMeasure::mean_norm0_sq() const {
    if (weight_ == 0.0) throw std::logic_error("OccupationMeasure: empty window");
    return sum_norm0_sq_ / weight_;
}

double OccupationMeasure::mean_norm_gamma_sq() const {
    if (weight_ == 0.0) throw std::logic_error("OccupationMeasure: empty window");
    return sum_gamma_sq_ / weight_;
}

double OccupationMeasure::mode_mean(int n) const {
    if (n < 1 || n > space_->modes()) throw std::out_of_range("mode_mean: bad index");
    return sum_modes_[n - 1] / weight_;
}

double OccupationMeasure::mode_second_moment(int n) const {
    if (n < 1 || n > space_->modes()) throw std::out_of_range("mode_second_moment: bad index");
    return sum_modes_sq_[n - 1] / weight_;
}

double OccupationMeasure::tail_mass(std::size_t i) const {
    if (i >= tail_weight_.size()) throw std::out_of_range("tail_mass: bad index");
    return tail_weight_[i] / weight_;
}

OccupationMeasure accumulate(const Trajectory& traj, double burn_in,
                             const MeasureOptions& options) {
    if (traj.snapshots.empty())
        throw std::invalid_argument("accumulate: trajectory carries no snapshots");
    if (burn_in >= traj.horizon())
        throw std::invalid_argument("accumulate: burn-in window swallows the trajectory");
    OccupationMeasure m(traj.snapshots.front().space(), options);
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i)
        if (traj.snapshot_times[i] > burn_in) m.add_field(traj.snapshots[i], 1.0);
    if (m.count() == 0)
        throw std::invalid_argument("accumulate: no snapshots past the burn-in window");
    return m;
}

std::vector<double> ou_oracle(const GalerkinSpace& space, std::span<const double> q_weights) {
    if (q_weights.size() != static_cast<std::size_t>(space.modes()))
        throw std::invalid_argument("ou_oracle: weight count mismatch");
    std::vector<double> v(q_weights.size());
    for (int n = 1; n <= space.modes(); ++n)
        v[n - 1] = q_weights[n - 1] * q_weights[n - 1] / (2.0 * space.abs_eigenvalue(n));
    return v;
}

TightnessReport tightness_check(std::span<const OccupationMeasure> per_trajectory,
                                const DriftCertificate& cert, const SpectralField& x0,
                                std::span<const double> eps_grid) {
    if (per_trajectory.empty())
        throw std::invalid_argument("tightness_check: no occupation measures");
    if (!(cert.diss.lambda_star > cert.diss.D))
        throw ConfigError("tightness_check: certificate requires lambda_star > D");

    TightnessReport rep;
    rep.trajectories = static_cast<int>(per_trajectory.size());
    rep.x0_norm_sq = x0.norm0() * x0.norm0();
    rep.lambda_star = cert.diss.lambda_star;
    rep.k_lambda_star = cert.diss.k_lambda_star;
    rep.D = cert.diss.D;
    rep.c_omega = cert.diss.c_omega;

    const double base = rep.x0_norm_sq + rep.k_lambda_star;
    rep.bound_avg = (base + rep.D) / (2.0 * rep.c_omega);
    rep.bound_avg_paper = base / rep.c_omega;

    std::vector<double> avgs;
    avgs.reserve(per_trajectory.size());
    for (const auto& m : per_trajectory) avgs.push_back(m.mean_norm_gamma_sq());
    rep.time_avg_gamma_sq = stats::mean(avgs);
    rep.avg_halfwidth = stats::ci_halfwidth95(avgs);
    rep.avg_pass = rep.time_avg_gamma_sq + rep.avg_halfwidth <= rep.bound_avg;
    rep.pass = rep.avg_pass;

    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
        const double eps = eps_grid[e];
        TailEntry entry;
        entry.epsilon = eps;
        entry.radius = 1.0 / std::sqrt(eps);
        // The measures must have been built with matching tail radii.
        const auto& radii = per_trajectory[0].options().tail_radii;
        std::size_t idx = radii.size();
        for (std::size_t i = 0; i < radii.size(); ++i)
            if (std::abs(radii[i] - entry.radius) <= 1e-9 * entry.radius) idx = i;
        if (idx == radii.size())
            throw std::invalid_argument("tightness_check: measures lack a tail counter at 1/sqrt(eps)");

        std::vector<double> masses;
        masses.reserve(per_trajectory.size());
        for (const auto& m : per_trajectory) masses.push_back(m.tail_mass(idx));
        entry.empirical = stats::mean(masses);
        entry.halfwidth = stats::ci_halfwidth95(masses);
        entry.bound = eps * rep.bound_avg;
        entry.bound_paper = eps * rep.bound_avg_paper;
        entry.pass = entry.empirical + entry.halfwidth <= entry.bound;
        rep.pass = rep.pass && entry.pass;
        rep.tails.push_back(entry);
    }
    return rep;
}

namespace {

// Ensemble mean-square gap curve for one perturbation size.
struct GapCurve {
    std::vector<double> mean, halfwidth;
};

GapCurve mean_gap_curve(const SpectralField& x, double delta, std::span<const double> t_grid,
                        int ensemble, double dt, const OddPolynomial& f, const NoiseSpec& noise,
                        std::uint64_t seed, std::uint64_t salt) {
    SpectralField xp = x;
    xp.coeffs()[0] += delta;
    std::vector<std::vector<double>> samples(t_grid.size());
    for (auto& s : samples) s.reserve(ensemble);
    for (int i = 0; i < ensemble; ++i) {
        const auto gaps = coupled_gap_curve(x, xp, t_grid, dt, f, noise, seed,
                                            make_stream(stream_purpose::dynamics, salt + i));
        for (std::size_t h = 0; h < t_grid.size(); ++h) samples[h].push_back(gaps[h]);
    }
    GapCurve c;
    for (auto& s : samples) {
        c.mean.push_back(stats::mean(s));
        c.halfwidth.push_back(stats::ci_halfwidth95(s));
    }
    return c;
}

}  // namespace

FellerReport feller_experiment(const SpectralField& x, std::span<const double> deltas,
                               std::span<const double> t_grid, int ensemble, double dt,
                               const OddPolynomial& f, const NoiseSpec& noise,
                               const DriftCertificate& cert, std::uint64_t seed) {
    for (double d : deltas)
        if (!(d > 0.0)) throw std::invalid_argument("feller_experiment: perturbations must be positive");
    if (t_grid.empty()) throw std::invalid_argument("feller_experiment: empty time grid");

    FellerReport rep;
    rep.t_grid.assign(t_grid.begin(), t_grid.end());
    const double kappa = cert.split.kappa;
    const double omega = x.space()->omega();
    const double L = lipschitz_bound(noise, x.space()->length());
    rep.exponent = 2.0 * (kappa - omega) + L * L;
    rep.exponent_paper = 2.0 * (kappa - omega) + L;

    std::uint64_t salt = 0;
    rep.pass = true;
    for (double delta : deltas) {
        // Same streams for both sizes: common increments make the ratio of the
        // two means concentrate near the square of the perturbation ratio.
        const GapCurve full = mean_gap_curve(x, delta, t_grid, ensemble, dt, f, noise, seed, salt);
        const GapCurve half = mean_gap_curve(x, delta / 2.0, t_grid, ensemble, dt, f, noise, seed, salt);
        salt += static_cast<std::uint64_t>(ensemble);

        FellerCurve curve;
        curve.delta = delta;
        curve.gap_mean = full.mean;
        curve.gap_halfwidth = full.halfwidth;
        std::vector<double> ratios;
        for (std::size_t h = 0; h < t_grid.size(); ++h) {
            const double env = delta * delta * std::exp(rep.exponent * t_grid[h]);
            const double env_paper = delta * delta * std::exp(rep.exponent_paper * t_grid[h]);
            curve.envelope.push_back(env);
            curve.envelope_paper.push_back(env_paper);
            if (full.mean[h] + full.halfwidth[h] > env * (1.0 + 1e-12))
                curve.under_envelope = false;
            if (full.mean[h] - full.halfwidth[h] > env_paper * (1.0 + 1e-12))
                curve.under_paper = false;
            if (t_grid[h] > 0.0 && half.mean[h] > 0.0)
                ratios.push_back(full.mean[h] / half.mean[h]);
        }
        if (!ratios.empty()) {
            std::sort(ratios.begin(), ratios.end());
            curve.scaling_ratio = ratios[ratios.size() / 2];
            curve.scaling_ok = curve.scaling_ratio >= 3.0 && curve.scaling_ratio <= 5.0;
        }
        rep.pass = rep.pass && curve.under_envelope;
        if (!curve.under_paper) rep.paper_literal_violated = true;
        rep.curves.push_back(std::move(curve));
    }
    return rep;
}

InvarianceResult invariance_distance(const OccupationMeasure& measure, double delta_t,
                                     const OddPolynomial& f, const NoiseSpec& noise,
                                     int ensemble, double dt, int permutations,
                                     std::uint64_t seed) {
    if (measure.reservoir().empty())
        throw std::invalid_argument("invariance_distance: empty reservoir");
    if (!(delta_t > 0.0))
        throw std::invalid_argument("invariance_distance: propagation time must be positive");

    const auto reservoir = measure.reservoir();
    const int m = std::min<int>(ensemble, static_cast<int>(reservoir.size()));

    SimParams params;
    params.dt = dt;
    params.horizon = delta_t;
    params.seed = seed;

    const char* names[3] = {"norm0", "mode_1", "mode_2"};
    std::vector<std::vector<double>> pre(3, std::vector<double>(m));
    std::vector<std::vector<double>> post(3, std::vector<double>(m));
    auto observe = [](const SpectralField& u, int obs) {
        if (obs == 0) return u.norm0();
        if (obs == 1) return u.coeffs()[0];
        return u.modes() > 1 ? u.coeffs()[1] : 0.0;
    };

    for (int i = 0; i < m; ++i) {
        params.stream = make_stream(stream_purpose::invariance, i);
        SpectralField u = reservoir[i];
        simulate_stream(params, f, noise, u, [&](int, double, const SpectralField& s) { u = s; });
        for (int obs = 0; obs < 3; ++obs) {
            pre[obs][i] = observe(reservoir[i], obs);
            post[obs][i] = observe(u, obs);
        }
    }

    InvarianceResult res;
    res.delta_t = delta_t;
    res.sample_size = m;

    // Joint permutation: reshuffle the pre/post labels once per round and
    // recompute all three distances, so the max statistic gets a valid
    // family-wise threshold.
    GaussianStream rng(seed, make_stream(stream_purpose::permutation, 0));
    std::vector<double> observed(3);
    for (int obs = 0; obs < 3; ++obs) observed[obs] = stats::energy_distance(pre[obs], post[obs]);

    std::vector<std::vector<double>> null_per_obs(3, std::vector<double>(permutations));
    std::vector<double> null_max(permutations);
    std::vector<int> labels(2 * m);
    for (int i = 0; i < 2 * m; ++i) labels[i] = i;
    std::vector<double> a(m), b(m);
    for (int p = 0; p < permutations; ++p) {
        for (std::size_t i = labels.size(); i > 1; --i)
            std::swap(labels[i - 1], labels[rng.uniform_index(i)]);
        double mx = 0.0;
        for (int obs = 0; obs < 3; ++obs) {
            for (int i = 0; i < m; ++i) {
                const int la = labels[i], lb = labels[m + i];
                a[i] = la < m ? pre[obs][la] : post[obs][la - m];
                b[i] = lb < m ? pre[obs][lb] : post[obs][lb - m];
            }
            const double d = stats::energy_distance(a, b);
            null_per_obs[obs][p] = d;
            mx = std::max(mx, d);
        }
        null_max[p] = mx;
    }

    auto pct95 = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        const std::size_t idx = static_cast<std::size_t>(std::ceil(0.95 * v.size()));
        return v[std::min(idx == 0 ? 0 : idx - 1, v.size() - 1)];
    };

    for (int obs = 0; obs < 3; ++obs) {
        ObservableDistance od;
        od.name = names[obs];
        od.distance = observed[obs];
        od.threshold95 = pct95(null_per_obs[obs]);
        od.distinguishable = od.distance > od.threshold95;
        res.max_distance = std::max(res.max_distance, od.distance);
        res.observables.push_back(std::move(od));
    }
    res.max_threshold = pct95(null_max);
    res.distinguishable = res.max_distance > res.max_threshold;
    return res;
}

}  // namespace spdelab
