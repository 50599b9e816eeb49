#include "spdelab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "spdelab/errors.hpp"

namespace spdelab {

namespace {

// Strict section reader: every key must be known, every value well-typed.
// Typos in config files should fail loudly, not silently fall back to defaults.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            throw ConfigError(path_ + ": expected an object");
    }

    ~Section() = default;

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key()))
                throw ConfigError(path_ + ": unknown key \"" + it.key() + "\"");
        }
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    double num(const std::string& key, double fallback) {
        seen_.insert(key);
        if (!j_.contains(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number())
            throw ConfigError(path_ + "." + key + ": expected a number");
        return v.get<double>();
    }

    int integer(const std::string& key, int fallback) {
        seen_.insert(key);
        if (!j_.contains(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number_integer())
            throw ConfigError(path_ + "." + key + ": expected an integer");
        return v.get<int>();
    }

    std::uint64_t u64(const std::string& key, std::uint64_t fallback) {
        seen_.insert(key);
        if (!j_.contains(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number_integer())
            throw ConfigError(path_ + "." + key + ": expected a nonnegative integer");
        if (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)
            throw ConfigError(path_ + "." + key + ": expected a nonnegative integer");
        return v.get<std::uint64_t>();
    }

    std::string str(const std::string& key, const std::string& fallback) {
        seen_.insert(key);
        if (!j_.contains(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_string())
            throw ConfigError(path_ + "." + key + ": expected a string");
        return v.get<std::string>();
    }

    std::vector<double> num_list(const std::string& key, std::vector<double> fallback) {
        seen_.insert(key);
        if (!j_.contains(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_array())
            throw ConfigError(path_ + "." + key + ": expected an array of numbers");
        std::vector<double> out;
        out.reserve(v.size());
        for (const auto& e : v) {
            if (!e.is_number())
                throw ConfigError(path_ + "." + key + ": expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::vector<std::string> str_list(const std::string& key, std::vector<std::string> fallback) {
        seen_.insert(key);
        if (!j_.contains(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_array())
            throw ConfigError(path_ + "." + key + ": expected an array of strings");
        std::vector<std::string> out;
        out.reserve(v.size());
        for (const auto& e : v) {
            if (!e.is_string())
                throw ConfigError(path_ + "." + key + ": expected an array of strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    }

    const json& child(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void check_positive(double v, const char* field) {
    if (!(v > 0.0)) throw ConfigError(std::string(field) + " must be positive");
}

void check_nonneg(double v, const char* field) {
    if (!(v >= 0.0)) throw ConfigError(std::string(field) + " must be nonnegative");
}

void check_ascending(const std::vector<double>& v, const char* field) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1]))
            throw ConfigError(std::string(field) + " must be strictly increasing");
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig c;
    Section root(j, "config");

    if (root.has("model")) {
        Section s(root.child("model"), "model");
        c.model.L = s.num("L", c.model.L);
        c.model.N = s.integer("N", c.model.N);
        c.model.M = s.integer("M", c.model.M);
        c.model.gamma = s.num("gamma", c.model.gamma);
        s.finish();
    }
    if (root.has("drift")) {
        Section s(root.child("drift"), "drift");
        c.drift.coefficients = s.num_list("coefficients", c.drift.coefficients);
        c.drift.lambda_star = s.num("lambda_star", c.drift.lambda_star);
        s.finish();
    }
    if (root.has("noise")) {
        Section s(root.child("noise"), "noise");
        c.noise.kind = s.str("kind", c.noise.kind);
        c.noise.q0 = s.num("q0", c.noise.q0);
        c.noise.beta = s.num("beta", c.noise.beta);
        if (s.has("sigma")) {
            Section sg(s.child("sigma"), "noise.sigma");
            c.noise.sigma.name = sg.str("name", c.noise.sigma.name);
            c.noise.sigma.params = sg.num_list("params", c.noise.sigma.params);
            c.noise.sigma.lip_sigma = sg.num("lip_sigma", c.noise.sigma.lip_sigma);
            sg.finish();
        }
        s.finish();
    }
    if (root.has("sim")) {
        Section s(root.child("sim"), "sim");
        c.sim.dt = s.num("dt", c.sim.dt);
        c.sim.T = s.num("T", c.sim.T);
        c.sim.burn_in = s.num("burn_in", c.sim.burn_in);
        c.sim.seed = s.u64("seed", c.sim.seed);
        c.sim.streams = s.u64("streams", c.sim.streams);
        c.sim.snapshot_stride = s.integer("snapshot_stride", c.sim.snapshot_stride);
        c.sim.ensemble = s.integer("ensemble", c.sim.ensemble);
        c.sim.x0_modes = s.num_list("x0_modes", c.sim.x0_modes);
        s.finish();
    }
    if (root.has("experiment")) {
        Section s(root.child("experiment"), "experiment");
        c.experiment.epsilon_grid = s.num_list("epsilon_grid", c.experiment.epsilon_grid);
        c.experiment.perturbations = s.num_list("perturbations", c.experiment.perturbations);
        c.experiment.t_grid = s.num_list("t_grid", c.experiment.t_grid);
        c.experiment.T_grid = s.num_list("T_grid", c.experiment.T_grid);
        c.experiment.p = s.num("p", c.experiment.p);
        c.experiment.delta_t = s.num("delta_t", c.experiment.delta_t);
        c.experiment.pairs = s.integer("pairs", c.experiment.pairs);
        c.experiment.reservoir = s.integer("reservoir", c.experiment.reservoir);
        c.experiment.permutations = s.integer("permutations", c.experiment.permutations);
        c.experiment.modes_k = s.integer("modes_k", c.experiment.modes_k);
        c.experiment.hist_bins = s.integer("hist_bins", c.experiment.hist_bins);
        c.experiment.hist_norm_max = s.num("hist_norm_max", c.experiment.hist_norm_max);
        c.experiment.hist_mode_max = s.num("hist_mode_max", c.experiment.hist_mode_max);
        s.finish();
    }
    if (root.has("output")) {
        Section s(root.child("output"), "output");
        c.output.directory = s.str("directory", c.output.directory);
        c.output.formats = s.str_list("formats", c.output.formats);
        s.finish();
    }
    root.finish();

    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // Convert the parser's byte offset into a line/column anchor.
        std::size_t line = 1, col = 1;
        const std::size_t stop = std::min(text.size(), e.byte > 0 ? e.byte - 1 : 0);
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') { ++line; col = 1; } else { ++col; }
        }
        std::ostringstream msg;
        msg << path << ":" << line << ":" << col << ": " << e.what();
        throw ConfigError(msg.str());
    }
    try {
        return from_json(j);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

json ExperimentConfig::to_json() const {
    json j;
    j["model"] = {{"L", model.L}, {"N", model.N}, {"M", model.M}, {"gamma", model.gamma}};
    j["drift"] = {{"coefficients", drift.coefficients}, {"lambda_star", drift.lambda_star}};
    j["noise"] = {{"kind", noise.kind},
                  {"q0", noise.q0},
                  {"beta", noise.beta},
                  {"sigma",
                   {{"name", noise.sigma.name},
                    {"params", noise.sigma.params},
                    {"lip_sigma", noise.sigma.lip_sigma}}}};
    j["sim"] = {{"dt", sim.dt},
                {"T", sim.T},
                {"burn_in", sim.burn_in},
                {"seed", sim.seed},
                {"streams", sim.streams},
                {"snapshot_stride", sim.snapshot_stride},
                {"ensemble", sim.ensemble},
                {"x0_modes", sim.x0_modes}};
    j["experiment"] = {{"epsilon_grid", experiment.epsilon_grid},
                       {"perturbations", experiment.perturbations},
                       {"t_grid", experiment.t_grid},
                       {"T_grid", experiment.T_grid},
                       {"p", experiment.p},
                       {"delta_t", experiment.delta_t},
                       {"pairs", experiment.pairs},
                       {"reservoir", experiment.reservoir},
                       {"permutations", experiment.permutations},
                       {"modes_k", experiment.modes_k},
                       {"hist_bins", experiment.hist_bins},
                       {"hist_norm_max", experiment.hist_norm_max},
                       {"hist_mode_max", experiment.hist_mode_max}};
    j["output"] = {{"directory", output.directory}, {"formats", output.formats}};
    return j;
}

ExperimentConfig ExperimentConfig::preset(const std::string& name) {
    constexpr double pi = std::numbers::pi;
    ExperimentConfig c;
    if (name == "allen-cahn-like") {
        c.model = {1.0, 12, 96, 0.3};
        c.drift.coefficients = {1.0, 0.0, -1.0};  // f(t) = t - t^3
        c.noise.kind = "nemytskii-multiplicative";
        c.noise.q0 = 0.5;
        c.noise.beta = 1.0;
        c.noise.sigma.name = "sin";
        c.noise.sigma.params = {0.4, 1.0, pi / 4.0};
        c.sim.dt = 0.005;
        c.sim.T = 500.0;
        c.sim.burn_in = 20.0;
        c.sim.seed = 42;
        c.sim.snapshot_stride = 100;
        c.sim.ensemble = 32;
    } else if (name == "linear-ou") {
        c.model = {pi, 8, 64, 0.3};
        c.drift.coefficients = {};  // pure Ornstein-Uhlenbeck dynamics
        c.noise.kind = "additive-diagonal";
        c.noise.q0 = 1.0;
        c.noise.beta = 1.0;
        c.sim.dt = 1e-3;
        c.sim.T = 2000.0;
        c.sim.burn_in = 20.0;
        c.sim.seed = 42;
        c.sim.snapshot_stride = 100;
        c.sim.ensemble = 1;
    } else if (name == "cubic-strong") {
        c.model = {pi, 12, 96, 0.3};
        c.drift.coefficients = {3.0, 0.0, -1.0};  // f(t) = 3t - t^3
        c.noise.kind = "additive-diagonal";
        c.noise.q0 = 0.5;
        c.noise.beta = 1.0;
        c.sim.dt = 0.005;
        c.sim.T = 500.0;
        c.sim.burn_in = 20.0;
        c.sim.seed = 42;
        c.sim.snapshot_stride = 100;
        c.sim.ensemble = 32;
    } else {
        throw ConfigError("unknown preset \"" + name +
                          "\" (available: allen-cahn-like, linear-ou, cubic-strong)");
    }
    c.validate();
    return c;
}

std::vector<std::string> ExperimentConfig::preset_names() {
    return {"allen-cahn-like", "linear-ou", "cubic-strong"};
}

int ExperimentConfig::effective_M() const {
    if (model.M > 0) return model.M;
    const OddPolynomial f = make_drift();
    const int d = f.is_zero() ? 0 : f.degree();
    return std::max(4 * model.N, 2 * (d + 1) * model.N);
}

void ExperimentConfig::validate() const {
    check_positive(model.L, "model.L");
    if (model.N < 1) throw ConfigError("model.N must be at least 1");
    if (model.M < 0) throw ConfigError("model.M must be 0 (auto) or positive");
    if (!(model.gamma > 0.25 && model.gamma < 0.5))
        throw ConfigError("model.gamma must lie strictly between 1/4 and 1/2");

    // Constructor enforces odd degree / negative leading coefficient.
    const OddPolynomial f = make_drift();
    check_nonneg(drift.lambda_star, "drift.lambda_star");

    const int M = effective_M();
    if (M < model.N) throw ConfigError("model.M must be at least model.N");
    if (!f.is_zero() && M < 2 * (f.degree() + 1) * model.N)
        throw ConfigError("model.M too small for the drift degree: need M >= 2(d+1)N");

    if (noise.kind != "additive-diagonal" && noise.kind != "nemytskii-multiplicative" &&
        noise.kind != "none")
        throw ConfigError("noise.kind must be additive-diagonal, nemytskii-multiplicative, or none");
    check_nonneg(noise.q0, "noise.q0");
    if (noise.kind == "nemytskii-multiplicative") {
        if (!(noise.beta > 0.5))
            throw ConfigError("noise.beta must exceed 1/2 for the multiplicative kind");
        if (noise.sigma.name != "const" && noise.sigma.name != "sin" &&
            noise.sigma.name != "clipped-linear")
            throw ConfigError("noise.sigma.name must be const, sin, or clipped-linear");
        // Arity and declared-Lipschitz checks live in the profile factories.
        make_noise();
    } else {
        check_nonneg(noise.beta, "noise.beta");
    }

    check_positive(sim.dt, "sim.dt");
    check_positive(sim.T, "sim.T");
    check_nonneg(sim.burn_in, "sim.burn_in");
    if (sim.burn_in >= sim.T) throw ConfigError("sim.burn_in must be below sim.T");
    if (sim.snapshot_stride < 1) throw ConfigError("sim.snapshot_stride must be at least 1");
    if (sim.ensemble < 1) throw ConfigError("sim.ensemble must be at least 1");
    if (static_cast<int>(sim.x0_modes.size()) > model.N)
        throw ConfigError("sim.x0_modes has more entries than model.N");

    for (double e : experiment.epsilon_grid) check_positive(e, "experiment.epsilon_grid");
    check_ascending(experiment.epsilon_grid, "experiment.epsilon_grid");
    for (double d : experiment.perturbations) check_positive(d, "experiment.perturbations");
    for (double t : experiment.t_grid) check_nonneg(t, "experiment.t_grid");
    check_ascending(experiment.t_grid, "experiment.t_grid");
    for (double t : experiment.T_grid) check_positive(t, "experiment.T_grid");
    check_ascending(experiment.T_grid, "experiment.T_grid");
    check_positive(experiment.p, "experiment.p");
    check_positive(experiment.delta_t, "experiment.delta_t");
    if (experiment.pairs < 2) throw ConfigError("experiment.pairs must be at least 2");
    if (experiment.reservoir < 2) throw ConfigError("experiment.reservoir must be at least 2");
    if (experiment.permutations < 19)
        throw ConfigError("experiment.permutations must be at least 19 for a 95% threshold");
    if (experiment.modes_k < 1 || experiment.modes_k > model.N)
        throw ConfigError("experiment.modes_k must lie in [1, model.N]");
    if (experiment.hist_bins < 1) throw ConfigError("experiment.hist_bins must be at least 1");
    check_positive(experiment.hist_norm_max, "experiment.hist_norm_max");
    check_positive(experiment.hist_mode_max, "experiment.hist_mode_max");

    if (output.directory.empty()) throw ConfigError("output.directory must not be empty");
    for (const auto& fmt : output.formats)
        if (fmt != "csv" && fmt != "json" && fmt != "binary")
            throw ConfigError("output.formats entries must be csv, json, or binary");
}

SpacePtr ExperimentConfig::make_space() const {
    return spdelab::make_space(model.L, model.N, effective_M(), model.gamma);
}

OddPolynomial ExperimentConfig::make_drift() const {
    return OddPolynomial(drift.coefficients);
}

NoiseSpec ExperimentConfig::make_noise() const {
    if (noise.kind == "none") return NoiseSpec::none(model.N);
    auto weights = NoiseSpec::power_law_weights(noise.q0, noise.beta, model.N);
    if (noise.kind == "additive-diagonal") return NoiseSpec::additive_diagonal(std::move(weights));

    const auto& sg = noise.sigma;
    SigmaProfile profile = SigmaProfile::constant(1.0);
    if (sg.name == "const") {
        if (sg.params.size() != 1)
            throw ConfigError("noise.sigma.params: const takes exactly 1 parameter");
        profile = SigmaProfile::constant(sg.params[0]);
    } else if (sg.name == "sin") {
        if (sg.params.size() != 2 && sg.params.size() != 3)
            throw ConfigError("noise.sigma.params: sin takes [amp, freq] or [amp, freq, phase]");
        profile = SigmaProfile::sine(sg.params[0], sg.params[1],
                                     sg.params.size() == 3 ? sg.params[2] : 0.0);
    } else if (sg.name == "clipped-linear") {
        if (sg.params.size() != 4)
            throw ConfigError("noise.sigma.params: clipped-linear takes [offset, slope, lo, hi]");
        profile = SigmaProfile::clipped_linear(sg.params[0], sg.params[1], sg.params[2], sg.params[3]);
    } else {
        throw ConfigError("noise.sigma.name must be const, sin, or clipped-linear");
    }
    if (sg.lip_sigma > 0.0) profile.declare_lipschitz(sg.lip_sigma);
    return NoiseSpec::nemytskii(std::move(weights), std::move(profile));
}

SimParams ExperimentConfig::make_sim_params(std::uint64_t stream_offset) const {
    SimParams p;
    p.dt = sim.dt;
    p.horizon = sim.T;
    p.burn_in = sim.burn_in;
    p.seed = sim.seed;
    p.stream = make_stream(stream_purpose::dynamics, sim.streams + stream_offset);
    p.snapshot_stride = sim.snapshot_stride;
    p.validate();
    return p;
}

SpectralField ExperimentConfig::make_x0(const SpacePtr& space) const {
    std::vector<double> coeffs(static_cast<std::size_t>(space->modes()), 0.0);
    std::copy(sim.x0_modes.begin(), sim.x0_modes.end(), coeffs.begin());
    return SpectralField(space, std::move(coeffs));
}

}  // namespace spdelab
