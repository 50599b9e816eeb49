#include "spdelab/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "spdelab/errors.hpp"
#include "spdelab/integrator.hpp"
#include "spdelab/invariant.hpp"
#include "spdelab/noise.hpp"
#include "spdelab/rng.hpp"

namespace spdelab {

namespace {

constexpr const char* kBuildId = "spdelab-0.1.0";

std::string hash_hex(std::uint64_t h) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::uint64_t hash_string(const std::string& s) {
    return fnv1a64({reinterpret_cast<const unsigned char*>(s.data()), s.size()});
}

std::string trajectory_csv(const Trajectory& traj) {
    std::string out;
    const std::size_t rows = traj.times.size();
    out.reserve(rows * (static_cast<std::size_t>(traj.recorded_modes) + 3) * 26 + 64);
    out += "t,norm0,norm_gamma";
    for (int m = 1; m <= traj.recorded_modes; ++m) out += ",mode_" + std::to_string(m);
    out += "\n";
    for (std::size_t k = 0; k < rows; ++k) {
        out += format_g17(traj.times[k]);
        out += ',';
        out += format_g17(traj.norm0[k]);
        out += ',';
        out += format_g17(traj.norm_gamma[k]);
        for (int m = 0; m < traj.recorded_modes; ++m) {
            out += ',';
            out += format_g17(traj.modes[k * traj.recorded_modes + m]);
        }
        out += '\n';
    }
    return out;
}

std::string histogram_csv(const Histogram& h) {
    std::string out = "bin_lo,bin_hi,mass\n";
    const auto& spec = h.spec();
    const double width = (spec.hi - spec.lo) / spec.bins;
    const double total = h.total();
    const double scale = total > 0.0 ? 1.0 / total : 0.0;
    out += "-inf," + format_g17(spec.lo) + "," + format_g17(h.below() * scale) + "\n";
    for (int b = 0; b < spec.bins; ++b) {
        out += format_g17(spec.lo + b * width) + "," + format_g17(spec.lo + (b + 1) * width) +
               "," + format_g17(h.mass()[b] * scale) + "\n";
    }
    out += format_g17(spec.hi) + ",inf," + format_g17(h.above() * scale) + "\n";
    return out;
}

// Random smooth field with a prescribed sup-norm: Gaussian coefficients with
// 1/n decay, rescaled so max_j |u(x_j)| equals the target.
SpectralField sample_field(const SpacePtr& space, GaussianStream& rng, double sup_target) {
    std::vector<double> coeffs(static_cast<std::size_t>(space->modes()));
    for (std::size_t n = 0; n < coeffs.size(); ++n)
        coeffs[n] = rng.normal() / static_cast<double>(n + 1);
    SpectralField u(space, std::move(coeffs));
    std::vector<double> values(static_cast<std::size_t>(space->grid_size()));
    space->to_grid(u.coeffs(), values);
    double sup = 0.0;
    for (double v : values) sup = std::max(sup, std::abs(v));
    if (sup > 0.0) u *= sup_target / sup;
    return u;
}

struct Tally {
    int samples = 0;
    int violations = 0;
    double worst_margin = std::numeric_limits<double>::infinity();

    void record(const HypothesisCheck& c) {
        ++samples;
        if (!c.pass) ++violations;
        worst_margin = std::min(worst_margin, c.margin);
    }
    json to_json() const {
        return {{"samples", samples},
                {"violations", violations},
                {"worst_margin", samples ? worst_margin : 0.0}};
    }
};

json tail_to_json(const TailEntry& t) {
    return {{"epsilon", t.epsilon},     {"radius", t.radius},
            {"empirical", t.empirical}, {"halfwidth", t.halfwidth},
            {"bound", t.bound},         {"bound_paper", t.bound_paper},
            {"pass", t.pass}};
}

MeasureOptions measure_options(const ExperimentConfig& c, std::uint64_t stream_index,
                               std::vector<double> tail_radii = {}) {
    MeasureOptions opts;
    opts.reservoir_capacity = c.experiment.reservoir;
    opts.seed = c.sim.seed;
    opts.stream = make_stream(stream_purpose::reservoir, stream_index);
    opts.norm_hist = {0.0, c.experiment.hist_norm_max, c.experiment.hist_bins};
    opts.mode_hist = {-c.experiment.hist_mode_max, c.experiment.hist_mode_max,
                      c.experiment.hist_bins};
    opts.tail_radii = std::move(tail_radii);
    return opts;
}

}  // namespace

DriftCertificate build_certificate(const ExperimentConfig& config) {
    const OddPolynomial f = config.make_drift();
    if (f.is_zero())
        throw ConfigError(
            "certificate requires a nonzero drift polynomial (drift.coefficients is empty)");
    const SpacePtr space = config.make_space();
    const NoiseSpec noise = config.make_noise();

    DriftCertificate cert;
    cert.split = split_drift(f);
    cert.diss.rho = rho_certificate(f, config.model.L);
    const GrowthConstants growth = d_constant(noise, space);
    cert.diss.D = growth.safe;
    cert.diss.D_paper = growth.undoubled;
    cert.diss.lambda_star =
        config.drift.lambda_star > 0.0 ? config.drift.lambda_star : cert.diss.D + 1.0;
    cert.diss.k_lambda_star = cert.diss.rho.k_lambda(cert.diss.lambda_star);
    cert.diss.c_omega = space->c_omega();
    return cert;
}

json certificate_to_json(const DriftCertificate& cert, const ExperimentConfig& config) {
    const DriftSplit& s = cert.split;
    const DissipativityData& d = cert.diss;
    const SpacePtr space = config.make_space();
    const OddPolynomial f = config.make_drift();

    json j;
    j["zeta1"] = s.zeta1;
    j["zeta2"] = s.zeta2;
    j["slope"] = s.slope;
    j["kappa"] = s.kappa;
    j["C"] = d.rho.C;
    j["lambda_star"] = d.lambda_star;
    j["K_lambda_star"] = d.k_lambda_star;
    j["c_omega"] = d.c_omega;
    j["D"] = d.D;

    json growth_rows = json::array();
    for (double r : {0.0, 0.5, 1.0, 2.0})
        growth_rows.push_back({{"r", r}, {"a", compute_a(f, r)}});
    j["detail"] = {{"intercept", s.intercept},
                   {"g2_sup", s.g2_sup},
                   {"degenerate", s.degenerate},
                   {"half_degree", d.rho.half_degree},
                   {"C_sharp", d.rho.C_sharp},
                   {"C_young", d.rho.C_young},
                   {"D_paper", d.D_paper},
                   {"omega", space->omega()},
                   {"growth_modulus", growth_rows}};
    return j;
}

Runner::Runner(ExperimentConfig config, std::filesystem::path out_dir, bool quiet)
    : config_(std::move(config)), out_(std::move(out_dir)), quiet_(quiet) {
    config_.validate();
}

const std::vector<std::string>& Runner::verbs() {
    static const std::vector<std::string> v = {"certify",     "simulate",    "invariant",
                                               "tightness",   "feller",      "contraction",
                                               "convolution", "ou-check"};
    return v;
}

RunOutcome Runner::run(const std::string& verb) {
    if (verb == "certify") return certify();
    if (verb == "simulate") return simulate_run();
    if (verb == "invariant") return invariant();
    if (verb == "tightness") return tightness();
    if (verb == "feller") return feller();
    if (verb == "contraction") return contraction();
    if (verb == "convolution") return convolution();
    if (verb == "ou-check") return ou_check();
    throw ConfigError("unknown experiment \"" + verb + "\"");
}

void Runner::note(const std::string& line) const {
    if (!quiet_) std::fputs((line + "\n").c_str(), stdout);
}

bool Runner::wants(const std::string& format) const {
    const auto& f = config_.output.formats;
    return std::find(f.begin(), f.end(), format) != f.end();
}

void Runner::emit(const std::string& name, const std::string& content) {
    write_text_file(out_ / name, content);
    written_.emplace_back(name, hash_string(content));
}

void Runner::write_manifest() {
    json m;
    m["build"] = kBuildId;
    m["config_hash"] = hash_hex(hash_string(dump_json_17(config_.to_json())));
    m["seed"] = config_.sim.seed;
    json files = json::object();
    for (const auto& [name, h] : written_) files[name] = hash_hex(h);
    m["files"] = files;
    write_text_file(out_ / "manifest.json", dump_json_17(m));
}

RunOutcome Runner::finish(json report) {
    RunOutcome outcome;
    outcome.verdict = report.at("verdict").get<std::string>();
    emit("config.json", dump_json_17(config_.to_json()));
    emit("report.json", dump_json_17(report));
    write_manifest();
    note("verdict: " + outcome.verdict);
    outcome.exit_code = outcome.verdict == "FAIL" ? 2 : 0;
    outcome.report = std::move(report);
    return outcome;
}

RunOutcome Runner::certify() {
    const DriftCertificate cert = build_certificate(config_);
    const SpacePtr space = config_.make_space();
    const OddPolynomial f = config_.make_drift();
    const json cert_json = certificate_to_json(cert, config_);
    emit("certificate.json", dump_json_17(cert_json));

    // Randomized validation of the structural inequalities the certificate
    // claims: dissipativity of the split, the sup-norm growth modulus, the
    // one-sided polynomial bound, and the Lyapunov inequality at lambda_star.
    const int n_samples = 1000;
    GaussianStream rng(config_.sim.seed,
                       make_stream(stream_purpose::sampling, config_.sim.streams));
    const auto a_fn = [&f](double r) { return compute_a(f, r); };

    Tally h2, h3, h4, lyap;
    for (int i = 0; i < n_samples; ++i) {
        const SpectralField u = sample_field(space, rng, 3.0 * rng.uniform());
        const SpectralField v = sample_field(space, rng, 3.0 * rng.uniform());
        const SpectralField z = sample_field(space, rng, 3.0 * rng.uniform());
        h3.record(check_h3(f, cert.split, u, v));
        h4.record(check_h4(f, cert.diss.rho, u));
        lyap.record(check_k_lambda(f, cert.diss.rho, cert.diss.lambda_star, v));
        h2.record(check_h2(f, u, z, a_fn));
    }

    const bool ok = h2.violations + h3.violations + h4.violations + lyap.violations == 0;
    json report;
    report["experiment"] = "certify";
    report["certificate"] = cert_json;
    report["validators"] = {{"growth_h2", h2.to_json()},
                            {"dissipative_split_h3", h3.to_json()},
                            {"one_sided_h4", h4.to_json()},
                            {"lyapunov_at_lambda_star", lyap.to_json()}};
    report["verdict"] = ok ? "PASS" : "FAIL";
    note("certify: kappa=" + format_g17(cert.split.kappa) + " C=" + format_g17(cert.diss.rho.C) +
         " K(lambda*)=" + format_g17(cert.diss.k_lambda_star));
    return finish(std::move(report));
}

RunOutcome Runner::simulate_run() {
    const SpacePtr space = config_.make_space();
    const OddPolynomial f = config_.make_drift();
    const NoiseSpec noise = config_.make_noise();
    const SpectralField x0 = config_.make_x0(space);
    const SimParams params = config_.make_sim_params(0);

    const Trajectory traj = simulate(params, f, noise, x0, config_.experiment.modes_k);
    if (wants("csv")) emit("trajectory.csv", trajectory_csv(traj));
    if (wants("binary")) {
        write_snapshots(out_ / "snapshots.bin", *space, traj.snapshots);
        written_.emplace_back("snapshots.bin", fnv1a64_file(out_ / "snapshots.bin"));
    }

    const std::size_t last = traj.times.size() - 1;
    json final_modes = json::array();
    for (int m = 0; m < traj.recorded_modes; ++m)
        final_modes.push_back(traj.modes[last * traj.recorded_modes + m]);
    json report;
    report["experiment"] = "simulate";
    report["steps"] = traj.steps();
    report["dt"] = traj.dt;
    report["horizon"] = traj.horizon();
    report["max_norm0"] = traj.max_norm0();
    report["snapshots"] = static_cast<int>(traj.snapshots.size());
    report["final"] = {{"t", traj.times[last]},
                       {"norm0", traj.norm0[last]},
                       {"norm_gamma", traj.norm_gamma[last]},
                       {"modes", final_modes}};
    report["verdict"] = "PASS";  // reaching the horizon with finite state is the claim
    note("simulate: " + std::to_string(traj.steps()) + " steps, max ||u||_0 = " +
         format_g17(traj.max_norm0()));
    return finish(std::move(report));
}

RunOutcome Runner::ou_check() {
    const SpacePtr space = config_.make_space();
    const OddPolynomial f = config_.make_drift();
    const NoiseSpec noise = config_.make_noise();
    if (!f.is_zero())
        throw ConfigError("ou-check requires an empty drift.coefficients (linear dynamics)");
    if (noise.kind() != NoiseKind::AdditiveDiagonal || noise.is_zero())
        throw ConfigError("ou-check requires nonzero additive-diagonal noise");

    const SpectralField x0 = config_.make_x0(space);
    const SimParams params = config_.make_sim_params(0);
    OccupationMeasure measure(space, measure_options(config_, config_.sim.streams));
    simulate_stream(params, f, noise, x0, [&](int, double t, const SpectralField& u) {
        if (t > params.burn_in) measure.add_field(u);
    });

    const std::vector<double> oracle = ou_oracle(*space, noise.weights());
    const int check_modes = std::min(config_.experiment.modes_k, space->modes());
    json rows = json::array();
    bool ok = true;
    for (int n = 1; n <= check_modes; ++n) {
        const double emp = measure.mode_second_moment(n);
        const double exact = oracle[static_cast<std::size_t>(n - 1)];
        const double rel = exact > 0.0 ? std::abs(emp - exact) / exact : std::abs(emp);
        const bool mode_ok = rel <= 0.10;
        ok = ok && mode_ok;
        rows.push_back({{"mode", n},
                        {"empirical", emp},
                        {"exact", exact},
                        {"rel_err", rel},
                        {"pass", mode_ok}});
        note("ou-check: mode " + std::to_string(n) + " empirical " + format_g17(emp) +
             " vs exact " + format_g17(exact));
    }
    if (wants("csv")) {
        emit("histogram.csv", histogram_csv(measure.norm_histogram()));
        emit("mode_histogram.csv", histogram_csv(measure.mode_histogram()));
    }

    json report;
    report["experiment"] = "ou-check";
    report["samples"] = measure.count();
    report["tolerance"] = 0.10;
    report["modes"] = rows;
    report["mean_norm0_sq"] = measure.mean_norm0_sq();
    report["verdict"] = ok ? "PASS" : "FAIL";
    return finish(std::move(report));
}

RunOutcome Runner::tightness() {
    const DriftCertificate cert = build_certificate(config_);
    if (!(cert.diss.lambda_star > cert.diss.D))
        throw ConfigError("tightness requires lambda_star > D (certificate has lambda_star = " +
                          format_g17(cert.diss.lambda_star) + ", D = " + format_g17(cert.diss.D) +
                          ")");
    const SpacePtr space = config_.make_space();
    const OddPolynomial f = config_.make_drift();
    const NoiseSpec noise = config_.make_noise();
    const SpectralField x0 = config_.make_x0(space);

    std::vector<double> radii;
    for (double eps : config_.experiment.epsilon_grid) radii.push_back(1.0 / std::sqrt(eps));
    std::sort(radii.begin(), radii.end());

    std::vector<OccupationMeasure> measures;
    measures.reserve(static_cast<std::size_t>(config_.sim.ensemble));
    for (int i = 0; i < config_.sim.ensemble; ++i) {
        const SimParams params = config_.make_sim_params(static_cast<std::uint64_t>(i));
        OccupationMeasure m(space,
                            measure_options(config_, config_.sim.streams + i, radii));
        simulate_stream(params, f, noise, x0, [&](int, double t, const SpectralField& u) {
            if (t > params.burn_in) m.add_field(u);
        });
        measures.push_back(std::move(m));
    }

    const TightnessReport rep =
        tightness_check(measures, cert, x0, config_.experiment.epsilon_grid);

    if (wants("csv")) {
        OccupationMeasure merged = measures.front();
        for (std::size_t i = 1; i < measures.size(); ++i) merged.merge(measures[i]);
        emit("histogram.csv", histogram_csv(merged.norm_histogram()));
    }

    json tails = json::array();
    for (const auto& t : rep.tails) tails.push_back(tail_to_json(t));
    json report;
    report["experiment"] = "tightness";
    report["trajectories"] = rep.trajectories;
    report["time_average"] = {{"empirical", rep.time_avg_gamma_sq},
                              {"halfwidth", rep.avg_halfwidth},
                              {"bound", rep.bound_avg},
                              {"bound_paper", rep.bound_avg_paper},
                              {"pass", rep.avg_pass}};
    report["tails"] = tails;
    report["constants"] = {{"x0_norm_sq", rep.x0_norm_sq},
                           {"lambda_star", rep.lambda_star},
                           {"K_lambda_star", rep.k_lambda_star},
                           {"D", rep.D},
                           {"c_omega", rep.c_omega}};
    report["verdict"] = rep.pass ? "PASS" : "FAIL";
    note("tightness: time-avg " + format_g17(rep.time_avg_gamma_sq) + " vs bound " +
         format_g17(rep.bound_avg));
    return finish(std::move(report));
}

RunOutcome Runner::feller() {
    const DriftCertificate cert = build_certificate(config_);
    const SpacePtr space = config_.make_space();
    const OddPolynomial f = config_.make_drift();
    const NoiseSpec noise = config_.make_noise();
    const SpectralField x0 = config_.make_x0(space);

    std::vector<double> t_grid = config_.experiment.t_grid;
    if (t_grid.empty())
        for (int k = 0; k <= 8; ++k) t_grid.push_back(0.25 * k);

    const FellerReport rep =
        feller_experiment(x0, config_.experiment.perturbations, t_grid, config_.sim.ensemble,
                          config_.sim.dt, f, noise, cert, config_.sim.seed);

    bool scaling_ok = true;
    json curves = json::array();
    for (const auto& c : rep.curves) {
        scaling_ok = scaling_ok && c.scaling_ok;
        curves.push_back({{"delta", c.delta},
                          {"gap_mean", c.gap_mean},
                          {"gap_halfwidth", c.gap_halfwidth},
                          {"envelope", c.envelope},
                          {"envelope_paper", c.envelope_paper},
                          {"under_envelope", c.under_envelope},
                          {"under_paper_literal", c.under_paper},
                          {"scaling_ratio", c.scaling_ratio},
                          {"scaling_ok", c.scaling_ok}});
        note("feller: delta " + format_g17(c.delta) + " scaling ratio " +
             format_g17(c.scaling_ratio));
    }

    json report;
    report["experiment"] = "feller";
    report["t_grid"] = rep.t_grid;
    report["exponent"] = rep.exponent;
    report["exponent_paper_literal"] = rep.exponent_paper;
    report["paper_literal_violated"] = rep.paper_literal_violated;
    report["ensemble"] = config_.sim.ensemble;
    report["curves"] = curves;
    report["verdict"] = (rep.pass && scaling_ok) ? "PASS" : "FAIL";
    return finish(std::move(report));
}

RunOutcome Runner::contraction() {
    const SpacePtr space = config_.make_space();
    const OddPolynomial f = config_.make_drift();
    const NoiseSpec noise = config_.make_noise();
    const SpectralField x0 = config_.make_x0(space);

    std::vector<double> t_grid = config_.experiment.T_grid;
    if (t_grid.empty()) t_grid = {0.05, 0.1, 0.2};

    const ContractionResult res =
        contraction_experiment(x0, f, noise, t_grid, config_.sim.dt, config_.experiment.pairs,
                               config_.experiment.p, config_.sim.seed);

    const RatioEstimate& first = res.ratios.front();
    const bool contracts = first.hi < 1.0;
    const double diff_hi =
        res.ratios.size() > 1
            ? res.diff_upper95(0, res.ratios.size() - 1, config_.sim.seed)
            : 0.0;
    const bool monotone = res.ratios.size() > 1 ? diff_hi < 0.0 : true;

    json rows = json::array();
    for (const auto& r : res.ratios) {
        rows.push_back({{"T", r.t_horizon},
                        {"ratio", r.ratio},
                        {"lo", r.lo},
                        {"hi", r.hi},
                        {"mapped_mean", r.num_mean},
                        {"input_mean", r.den_mean}});
        note("contraction: T " + format_g17(r.t_horizon) + " ratio " + format_g17(r.ratio) +
             " [" + format_g17(r.lo) + ", " + format_g17(r.hi) + "]");
    }

    json report;
    report["experiment"] = "contraction";
    report["p"] = res.p;
    report["pairs"] = res.pairs;
    report["ratios"] = rows;
    report["checks"] = {
        {"contracts_at_shortest", {{"pass", contracts}, {"upper95", first.hi}}},
        {"grows_with_horizon",
         {{"pass", monotone}, {"diff_upper95_first_minus_last", diff_hi}}}};
    report["verdict"] = (contracts && monotone) ? "PASS" : "FAIL";
    return finish(std::move(report));
}

RunOutcome Runner::convolution() {
    const SpacePtr space = config_.make_space();
    const NoiseSpec noise = config_.make_noise();
    const std::vector<double>& eta = noise.weights();
    if (noise.is_zero())
        throw ConfigError("convolution requires nonzero noise weights");

    std::vector<double> t_grid = config_.experiment.T_grid;
    if (t_grid.empty()) t_grid = {0.05, 0.1, 0.2, 0.4};

    const ConvolutionResult res =
        convolution_experiment(space, eta, t_grid, config_.sim.dt, config_.experiment.pairs,
                               config_.experiment.p, config_.sim.seed);

    bool monotone = true;
    for (std::size_t i = 1; i < res.coarse.size(); ++i)
        monotone = monotone && res.coarse[i].ratio > res.coarse[i - 1].ratio;

    // Quadratic-moment cross-check at the longest horizon against the exact
    // per-mode stationary-variance formula.
    const double t_max = t_grid.back();
    double exact_ms = 0.0;
    for (int n = 1; n <= space->modes(); ++n) {
        const double lam = space->abs_eigenvalue(n);
        const double q = eta[static_cast<std::size_t>(n - 1)];
        exact_ms += q * q * (1.0 - std::exp(-2.0 * lam * t_max)) / (2.0 * lam);
    }
    const int ms_ensemble = 8 * config_.experiment.pairs;
    const double emp_ms = convolution_mean_square(space, eta, t_max, config_.sim.dt,
                                                  ms_ensemble, config_.sim.seed);
    const double ms_rel = exact_ms > 0.0 ? std::abs(emp_ms - exact_ms) / exact_ms : 0.0;
    const bool ms_ok = ms_rel <= 0.05;

    json rows = json::array();
    for (std::size_t i = 0; i < res.coarse.size(); ++i) {
        rows.push_back({{"T", res.coarse[i].t_horizon},
                        {"sup_moment", res.coarse[i].sup_moment},
                        {"halfwidth", res.coarse[i].halfwidth},
                        {"ratio", res.coarse[i].ratio},
                        {"ratio_fine_dt", res.fine[i].ratio}});
        note("convolution: T " + format_g17(res.coarse[i].t_horizon) + " ratio " +
             format_g17(res.coarse[i].ratio));
    }

    json report;
    report["experiment"] = "convolution";
    report["p"] = res.p;
    report["gamma"] = res.gamma;
    report["hs_eta"] = res.hs_eta;
    report["paths"] = config_.experiment.pairs;
    report["horizons"] = rows;
    report["checks"] = {
        {"ratio_decreases_with_T",
         {{"pass", monotone}}},
        {"step_refinement",
         {{"pass", res.refine_ok}, {"rel_change", res.refine_rel_change}}},
        {"mean_square_vs_exact",
         {{"pass", ms_ok},
          {"empirical", emp_ms},
          {"exact", exact_ms},
          {"rel_err", ms_rel},
          {"ensemble", ms_ensemble}}}};
    report["verdict"] = (monotone && res.refine_ok && ms_ok) ? "PASS" : "FAIL";
    return finish(std::move(report));
}

RunOutcome Runner::invariant() {
    const SpacePtr space = config_.make_space();
    const OddPolynomial f = config_.make_drift();
    const NoiseSpec noise = config_.make_noise();
    const SpectralField x0 = config_.make_x0(space);

    std::vector<double> T_grid = config_.experiment.T_grid;
    if (T_grid.empty()) T_grid = {100.0, 400.0, 1600.0};

    // One long run; the occupation measure is interrogated at each checkpoint,
    // so the horizon comes from the checkpoint grid rather than sim.T.
    SimParams params = config_.make_sim_params(0);
    params.horizon = T_grid.back();
    params.validate();

    OccupationMeasure measure(space, measure_options(config_, config_.sim.streams));
    std::vector<InvarianceResult> results;
    std::size_t next_cp = 0;
    simulate_stream(params, f, noise, x0, [&](int, double t, const SpectralField& u) {
        if (t > params.burn_in) measure.add_field(u);
        while (next_cp < T_grid.size() && t >= T_grid[next_cp] - 1e-9) {
            const std::uint64_t cp_seed =
                config_.sim.seed ^ ((next_cp + 1) * 0x9E3779B97F4A7C15ull);
            results.push_back(invariance_distance(
                measure, config_.experiment.delta_t, f, noise, config_.experiment.reservoir,
                config_.sim.dt, config_.experiment.permutations, cp_seed));
            ++next_cp;
        }
    });

    bool trend_ok = true;
    for (std::size_t k = 1; k < results.size(); ++k) {
        const double band =
            std::max(results[k - 1].max_threshold, results[k].max_threshold);
        trend_ok = trend_ok && results[k].max_distance <= results[k - 1].max_distance + band;
    }
    const bool final_ok = results.empty() ? false : !results.back().distinguishable;

    json checkpoints = json::array();
    for (std::size_t k = 0; k < results.size(); ++k) {
        const auto& r = results[k];
        json obs = json::array();
        for (const auto& o : r.observables)
            obs.push_back({{"name", o.name},
                           {"distance", o.distance},
                           {"threshold95", o.threshold95},
                           {"distinguishable", o.distinguishable}});
        checkpoints.push_back({{"T", T_grid[k]},
                               {"sample_size", r.sample_size},
                               {"observables", obs},
                               {"max_distance", r.max_distance},
                               {"max_threshold95", r.max_threshold},
                               {"distinguishable", r.distinguishable}});
        note("invariant: T " + format_g17(T_grid[k]) + " max distance " +
             format_g17(r.max_distance) + " (threshold " + format_g17(r.max_threshold) + ")");
    }

    if (wants("csv")) {
        emit("histogram.csv", histogram_csv(measure.norm_histogram()));
        emit("mode_histogram.csv", histogram_csv(measure.mode_histogram()));
    }

    json report;
    report["experiment"] = "invariant";
    report["delta_t"] = config_.experiment.delta_t;
    report["checkpoints"] = checkpoints;
    report["trend_non_increasing"] = trend_ok;
    report["final_indistinguishable"] = final_ok;
    report["verdict"] = (trend_ok && final_ok) ? "PASS" : "FAIL";
    return finish(std::move(report));
}

}  // namespace spdelab
