#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "spdelab/drift.hpp"
#include "spdelab/noise.hpp"
#include "spdelab/spectral.hpp"

namespace spdelab {

struct SimParams {
    double dt = 0.0;
    double horizon = 0.0;   // T
    double burn_in = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    int snapshot_stride = 1;

    void validate() const;
    int steps() const;  // round(horizon / dt)
};

struct Trajectory {
    double dt = 0.0;
    int recorded_modes = 0;
    int stride = 1;
    std::vector<double> times;       // k = 0..steps
    std::vector<double> norm0;       // per step
    std::vector<double> norm_gamma;  // per step, at the space's gamma
    std::vector<double> modes;       // row-major (steps+1) x recorded_modes
    std::vector<double> snapshot_times;
    std::vector<SpectralField> snapshots;  // every stride-th step, k = 0 included

    int steps() const { return static_cast<int>(times.size()) - 1; }
    double horizon() const { return times.empty() ? 0.0 : times.back(); }
    double max_norm0() const;
};

// One exponential-Euler step of the mild equation: per mode
//   u+_n = e^{l_n dt} u_n + l_n^{-1}(e^{l_n dt} - 1) F_n(u) + e^{l_n dt} (B(u) dW)_n
// with l_n the eigenvalues. Exact on the linear part; drift weight via expm1.
SpectralField step_exp_euler(const SpectralField& u, double dt, const OddPolynomial& f,
                             const NoiseSpec& noise, const WienerIncrement& dw);
// Convenience: draws the increment from the stream (one step's worth).
SpectralField step_exp_euler(const SpectralField& u, double dt, const OddPolynomial& f,
                             const NoiseSpec& noise, GaussianStream& rng);

// Visits (step index, time, state) for k = 0..steps without storing anything;
// increments come from the (params.seed, params.stream) Wiener stream, step k
// drawing from its own counter range. Throws BlowUpError on non-finite state.
using StepVisitor = std::function<void(int k, double t, const SpectralField& u)>;
void simulate_stream(const SimParams& params, const OddPolynomial& f,
                     const NoiseSpec& noise, const SpectralField& x0,
                     const StepVisitor& visit);

Trajectory simulate(const SimParams& params, const OddPolynomial& f,
                    const NoiseSpec& noise, const SpectralField& x0,
                    int recorded_modes = 4);

// A full increment path on the simulation grid, regenerable from (seed, stream).
struct WienerPath {
    double dt = 0.0;
    int n_modes = 0;
    std::vector<double> increments;  // row-major steps x n_modes

    int steps() const { return n_modes == 0 ? 0 : static_cast<int>(increments.size()) / n_modes; }
    WienerIncrement at(int k) const;
    static WienerPath draw(int steps, int n_modes, double dt, std::uint64_t seed,
                           std::uint64_t stream);
};

// The fixed-point map of the mild equation: solves
//   dz = (Az + F(z)) dt + B(v(t)) dW
// with the diffusion frozen along the input trajectory v and the given
// increments. v must carry a snapshot at every step (stride 1).
Trajectory picard_map(const Trajectory& v, const SpectralField& x0,
                      const OddPolynomial& f, const NoiseSpec& noise,
                      const WienerPath& path);

struct RatioEstimate {
    double t_horizon = 0.0;
    double ratio = 0.0;       // mean sup-gap^p of the mapped pairs / input pairs
    double lo = 0.0, hi = 0.0;  // bootstrap 95% interval
    double num_mean = 0.0, den_mean = 0.0;
};

struct ContractionResult {
    double p = 0.0;
    int pairs = 0;
    std::vector<RatioEstimate> ratios;      // one per horizon, ascending
    std::vector<std::vector<double>> num_sups;  // per horizon: per-pair sup^p of mapped gap
    std::vector<std::vector<double>> den_sups;  // per horizon: per-pair sup^p of input gap

    // 95th percentile of bootstrap(ratio[a] - ratio[b]); < 0 certifies
    // ratio[a] < ratio[b] at 95% confidence.
    double diff_upper95(std::size_t a, std::size_t b, std::uint64_t seed) const;
};

// Monte-Carlo contraction factor of the map above: pairs (v1, v2) of
// independent trajectories from x0, both mapped with a common frozen increment
// path, estimating E sup_{t<=T} ||z1-z2||^p / E sup_{t<=T} ||v1-v2||^p for each
// horizon in t_grid (one simulation per pair covers all horizons). p > 4.
ContractionResult contraction_experiment(const SpectralField& x0, const OddPolynomial& f,
                                         const NoiseSpec& noise, std::span<const double> t_grid,
                                         double dt, int pairs, double p, std::uint64_t seed);

struct ConvolutionEstimate {
    double t_horizon = 0.0;
    double sup_moment = 0.0;  // E sup_{t<=T} ||conv(t)||_gamma^p over grid times
    double halfwidth = 0.0;
    double ratio = 0.0;       // sup_moment / (T ||eta||_HS^p)
};

struct ConvolutionResult {
    double p = 0.0;
    double gamma = 0.0;
    double hs_eta = 0.0;
    std::vector<ConvolutionEstimate> coarse;  // at dt
    std::vector<ConvolutionEstimate> fine;    // at dt/2
    double refine_rel_change = 0.0;           // max over horizons
    bool refine_ok = false;                   // < 10%
};

// Stochastic convolution int_0^t e^{(t-s)A} eta dW_s for a constant diagonal
// eta, simulated with exact per-step Gaussian updates (the grid skeleton has
// the exact law). Estimates the sup-moment over each horizon in t_grid and its
// ratio to T ||eta||_HS^p; a dt/2 refinement of the same estimate is attached
// as a self-check.
ConvolutionResult convolution_experiment(const SpacePtr& space, std::span<const double> eta,
                                         std::span<const double> t_grid, double dt, int ensemble,
                                         double p, std::uint64_t seed);

// Terminal-time second moment E ||conv(T)||_0^2 (mean, not sup) for the same
// process; its exact value is sum_n eta_n^2 (1 - e^{2 l_n T}) / (2 |l_n|).
double convolution_mean_square(const SpacePtr& space, std::span<const double> eta,
                               double t_horizon, double dt, int ensemble, std::uint64_t seed);

// Advances the pair (x, x_pert) under identical increments (one draw feeds
// both states) and returns ||gap(t)||_0^2 at each requested grid time.
std::vector<double> coupled_gap_curve(const SpectralField& x, const SpectralField& x_pert,
                                      std::span<const double> t_grid, double dt,
                                      const OddPolynomial& f, const NoiseSpec& noise,
                                      std::uint64_t seed, std::uint64_t stream);

}  // namespace spdelab
