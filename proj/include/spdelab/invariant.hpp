#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spdelab/drift.hpp"
#include "spdelab/integrator.hpp"
#include "spdelab/noise.hpp"
#include "spdelab/spectral.hpp"

namespace spdelab {

struct HistogramSpec {
    double lo = 0.0;
    double hi = 1.0;
    int bins = 64;
};

// Fixed-range weighted histogram; out-of-range mass is kept in the two
// overflow cells so merging and totals stay exact.
class Histogram {
public:
    Histogram() = default;
    explicit Histogram(HistogramSpec spec);
    void add(double x, double w);
    void merge(const Histogram& other);
    const HistogramSpec& spec() const { return spec_; }
    std::span<const double> mass() const { return mass_; }
    double below() const { return below_; }
    double above() const { return above_; }
    double total() const;

private:
    HistogramSpec spec_;
    std::vector<double> mass_;
    double below_ = 0.0;
    double above_ = 0.0;
};

struct MeasureOptions {
    int reservoir_capacity = 256;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;  // reservoir subsampling stream
    HistogramSpec norm_hist{0.0, 2.0, 64};
    HistogramSpec mode_hist{-1.0, 1.0, 64};
    std::vector<double> tail_radii;  // thresholds on ||u||_gamma, ascending
};

// Time-average (occupation) measure of a trajectory window, kept as streaming
// accumulators plus a uniform-in-time reservoir of field snapshots. All moment
// and histogram state merges exactly (associative, order-fixed by the caller);
// the reservoir merge is a deterministic re-subsampling.
class OccupationMeasure {
public:
    OccupationMeasure(SpacePtr space, MeasureOptions options);

    void add_field(const SpectralField& u, double weight = 1.0);
    void merge(const OccupationMeasure& other);

    const SpacePtr& space() const { return space_; }
    const MeasureOptions& options() const { return options_; }
    std::int64_t count() const { return count_; }
    double total_weight() const { return weight_; }

    double mean_norm0_sq() const;
    double mean_norm_gamma_sq() const;
    double mode_mean(int n) const;           // 1-based
    double mode_second_moment(int n) const;  // 1-based
    double tail_mass(std::size_t i) const;   // fraction with ||u||_gamma > tail_radii[i]

    const Histogram& norm_histogram() const { return norm_hist_; }
    const Histogram& mode_histogram() const { return mode_hist_; }
    std::span<const SpectralField> reservoir() const { return reservoir_; }

private:
    SpacePtr space_;
    MeasureOptions options_;
    std::int64_t count_ = 0;
    double weight_ = 0.0;
    double sum_norm0_sq_ = 0.0;
    double sum_gamma_sq_ = 0.0;
    std::vector<double> sum_modes_;
    std::vector<double> sum_modes_sq_;
    std::vector<double> tail_weight_;
    Histogram norm_hist_;
    Histogram mode_hist_;
    std::vector<SpectralField> reservoir_;
    GaussianStream reservoir_rng_;
};

// Cesàro-averages the trajectory's snapshot sequence over t in (burn_in, T].
OccupationMeasure accumulate(const Trajectory& traj, double burn_in,
                             const MeasureOptions& options);

// Exact stationary variances of the linear additive equation: q_n^2 / (2 |l_n|).
std::vector<double> ou_oracle(const GalerkinSpace& space, std::span<const double> q_weights);

struct TailEntry {
    double epsilon = 0.0;
    double radius = 0.0;     // 1 / sqrt(epsilon)
    double empirical = 0.0;  // mean tail mass across trajectories
    double halfwidth = 0.0;
    double bound = 0.0;        // epsilon * (||x0||^2 + K + D) / (2 c_omega)
    double bound_paper = 0.0;  // epsilon * (||x0||^2 + K) / c_omega
    bool pass = false;
};

struct TightnessReport {
    double time_avg_gamma_sq = 0.0;
    double avg_halfwidth = 0.0;
    double bound_avg = 0.0;
    double bound_avg_paper = 0.0;
    bool avg_pass = false;
    std::vector<TailEntry> tails;
    bool pass = false;
    // certificate arithmetic echoed into the report
    double x0_norm_sq = 0.0;
    double lambda_star = 0.0;
    double k_lambda_star = 0.0;
    double D = 0.0;
    double c_omega = 0.0;
    int trajectories = 0;
};

// Bounds come from the certificate only; empirical side from per-trajectory
// measures (their spread gives the confidence half-width). Measures must carry
// tail radii 1/sqrt(eps) for the given grid. Requires lambda_star > D.
TightnessReport tightness_check(std::span<const OccupationMeasure> per_trajectory,
                                const DriftCertificate& cert, const SpectralField& x0,
                                std::span<const double> eps_grid);

struct FellerCurve {
    double delta = 0.0;
    std::vector<double> gap_mean;  // E ||u_pert(t) - u(t)||_0^2 at grid times
    std::vector<double> gap_halfwidth;
    std::vector<double> envelope;        // delta^2 e^{(2(kappa-omega)+L^2) t}
    std::vector<double> envelope_paper;  // exponent with L in place of L^2
    bool under_envelope = true;
    bool under_paper = true;
    double scaling_ratio = 0.0;  // median over t of gap(delta) / gap(delta/2)
    bool scaling_ok = false;     // within [3, 5]
};

struct FellerReport {
    std::vector<double> t_grid;
    double exponent = 0.0;
    double exponent_paper = 0.0;
    std::vector<FellerCurve> curves;
    bool pass = false;
    bool paper_literal_violated = false;
};

// Coupled-noise perturbation study: pairs started at x and x + delta e_1 share
// every increment; the mean-square gap must stay under the Gronwall envelope.
// Each delta also runs at delta/2 for the quadratic-scaling ratio.
FellerReport feller_experiment(const SpectralField& x, std::span<const double> deltas,
                               std::span<const double> t_grid, int ensemble, double dt,
                               const OddPolynomial& f, const NoiseSpec& noise,
                               const DriftCertificate& cert, std::uint64_t seed);

struct ObservableDistance {
    std::string name;
    double distance = 0.0;
    double threshold95 = 0.0;
    bool distinguishable = false;
};

struct InvarianceResult {
    double delta_t = 0.0;
    int sample_size = 0;
    std::vector<ObservableDistance> observables;
    double max_distance = 0.0;
    double max_threshold = 0.0;   // permutation 95% threshold of the max statistic
    bool distinguishable = false;
};

// Propagates the reservoir forward by delta_t with fresh noise and measures,
// per observable in {||u||_0, mode 1, mode 2}, the energy distance between the
// pre and post empirical laws, with a joint permutation test.
InvarianceResult invariance_distance(const OccupationMeasure& measure, double delta_t,
                                     const OddPolynomial& f, const NoiseSpec& noise,
                                     int ensemble, double dt, int permutations,
                                     std::uint64_t seed);

}  // namespace spdelab
