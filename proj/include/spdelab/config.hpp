#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spdelab/drift.hpp"
#include "spdelab/integrator.hpp"
#include "spdelab/io.hpp"
#include "spdelab/noise.hpp"
#include "spdelab/spectral.hpp"

namespace spdelab {

// One structured document drives every run. Parsing re-validates all module
// preconditions up front so downstream code never sees an inconsistent set.
struct ExperimentConfig {
    struct Model {
        double L = 1.0;
        int N = 12;
        int M = 0;  // 0: auto, max(4N, 2(d+1)N)
        double gamma = 0.3;
        bool operator==(const Model&) const = default;
    } model;

    struct Drift {
        std::vector<double> coefficients;  // a_1..a_d; empty = zero drift
        double lambda_star = 0.0;          // 0: auto, D + 1
        bool operator==(const Drift&) const = default;
    } drift;

    struct Sigma {
        std::string name = "const";  // const | sin | clipped-linear
        std::vector<double> params = {1.0};
        double lip_sigma = 0.0;  // 0: derive from the profile
        bool operator==(const Sigma&) const = default;
    };

    struct Noise {
        std::string kind = "additive-diagonal";  // or nemytskii-multiplicative, none
        double q0 = 1.0;
        double beta = 1.0;
        Sigma sigma;
        bool operator==(const Noise&) const = default;
    } noise;

    struct Sim {
        double dt = 0.01;
        double T = 1.0;
        double burn_in = 0.0;
        std::uint64_t seed = 0;
        std::uint64_t streams = 0;  // base stream index; member i runs on streams + i
        int snapshot_stride = 1;
        int ensemble = 1;
        std::vector<double> x0_modes;  // initial coefficients, zero-padded
        bool operator==(const Sim&) const = default;
    } sim;

    struct Experiment {
        std::vector<double> epsilon_grid = {1e-2, 1e-1, 1.0};
        std::vector<double> perturbations = {1e-2, 1e-1};
        std::vector<double> t_grid;   // feller observation times; empty = 0..2 step 0.25
        std::vector<double> T_grid;   // contraction/convolution/invariance horizons
        double p = 6.0;
        double delta_t = 0.5;         // invariance propagation time
        int pairs = 1000;
        int reservoir = 256;
        int permutations = 200;
        int modes_k = 4;              // trajectory CSV mode columns
        int hist_bins = 64;
        double hist_norm_max = 2.0;
        double hist_mode_max = 1.0;
        bool operator==(const Experiment&) const = default;
    } experiment;

    struct Output {
        std::string directory = "out";
        std::vector<std::string> formats = {"csv", "json"};
        bool operator==(const Output&) const = default;
    } output;

    bool operator==(const ExperimentConfig&) const = default;

    static ExperimentConfig from_json(const json& j);
    static ExperimentConfig load(const std::string& path);
    json to_json() const;

    // Shipped parameter sets: allen-cahn-like, linear-ou, cubic-strong.
    static ExperimentConfig preset(const std::string& name);
    static std::vector<std::string> preset_names();

    // Cross-field validation (throws ConfigError naming the offending field).
    void validate() const;

    int effective_M() const;
    SpacePtr make_space() const;
    OddPolynomial make_drift() const;
    NoiseSpec make_noise() const;
    SimParams make_sim_params(std::uint64_t stream_offset = 0) const;
    SpectralField make_x0(const SpacePtr& space) const;
};

}  // namespace spdelab
