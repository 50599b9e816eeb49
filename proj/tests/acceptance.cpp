// Acceptance gate for the laboratory: nine end-to-end claims, each printed as
// a single PASS/FAIL line. The process exit code is the number of failures,
// so CTest reports green only when every claim holds at its stated tolerance.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "spdelab/config.hpp"
#include "spdelab/drift.hpp"
#include "spdelab/invariant.hpp"
#include "spdelab/io.hpp"
#include "spdelab/rng.hpp"
#include "spdelab/runner.hpp"
#include "spdelab/spectral.hpp"

using namespace spdelab;
namespace fs = std::filesystem;

namespace {

fs::path scratch_root() {
    static const fs::path root = [] {
        fs::path p = fs::temp_directory_path() /
                     ("spdelab_accept_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return root;
}

bool close_to(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

SpectralField random_field(const SpacePtr& space, GaussianStream& rng, double amplitude) {
    std::vector<double> c(static_cast<std::size_t>(space->modes()));
    for (std::size_t n = 0; n < c.size(); ++n)
        c[n] = amplitude * rng.normal() / static_cast<double>(n + 1);
    return SpectralField(space, std::move(c));
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

RunOutcome run_verb(ExperimentConfig cfg, const std::string& verb, const std::string& tag) {
    const fs::path out = scratch_root() / tag;
    cfg.output.directory = out.string();
    Runner runner(std::move(cfg), out, /*quiet=*/true);
    return runner.run(verb);
}

// ---------------------------------------------------------------------------

bool exact_identities(std::string& detail) {
    const auto start = std::chrono::steady_clock::now();
    const double L = 1.0;
    auto space = make_space(L, 12, 96, 0.3);
    GaussianStream rng(2026, make_stream(stream_purpose::sampling, 100));
    bool ok = true;
    double worst = 0.0;

    for (int n = 1; n <= space->modes(); ++n) {
        const double exact = -std::pow(n * std::numbers::pi / L, 2);
        ok = ok && close_to(space->eigenvalue(n), exact, 1e-13);
    }
    ok = ok && close_to(space->omega(), std::numbers::pi * std::numbers::pi, 1e-13);
    ok = ok && close_to(space->c_omega(),
                        std::pow(std::numbers::pi * std::numbers::pi, 1.0 - 2.0 * 0.3), 1e-13);

    for (int trial = 0; trial < 20; ++trial) {
        const SpectralField u = random_field(space, rng, 1.0 + trial * 0.1);

        // Transform round-trip.
        const std::vector<double> grid = to_grid(u);
        const SpectralField back = from_grid(grid, space);
        for (int n = 0; n < u.modes(); ++n) {
            const double d = std::abs(back.coeffs()[n] - u.coeffs()[n]);
            worst = std::max(worst, d);
            ok = ok && d <= 1e-12;
        }

        // Quadrature Parseval.
        double quad = 0.0;
        for (double v : grid) quad += v * v;
        quad *= space->quad_weight();
        const double coeff_sq = u.norm0() * u.norm0();
        ok = ok && close_to(quad, coeff_sq, 1e-12);

        // Semigroup composition law and identity at t = 0.
        const SpectralField two_step = semigroup_apply(semigroup_apply(u, 0.3), 0.7);
        const SpectralField one_step = semigroup_apply(u, 1.0);
        for (int n = 0; n < u.modes(); ++n)
            ok = ok && close_to(two_step.coeffs()[n], one_step.coeffs()[n], 1e-13);
        const SpectralField frozen = semigroup_apply(u, 0.0);
        ok = ok && frozen.coeffs() == u.coeffs();
    }

    // The drift splits into a dissipative part plus a compactly supported
    // remainder that reassemble exactly.
    for (const std::vector<double>& coeffs :
         {std::vector<double>{1.0, 0.0, -1.0}, std::vector<double>{3.0, 0.0, -1.0}}) {
        const OddPolynomial f(coeffs);
        const DriftSplit split = split_drift(f);
        for (int k = 0; k <= 1200; ++k) {
            const double t = -3.0 + 6.0 * k / 1200.0;
            const double resid = std::abs(split.g1(t) + split.g2(t) - f(t));
            ok = ok && resid <= 1e-11 * std::max(1.0, std::abs(f(t)));
        }
    }

    const double secs = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - start).count();
    ok = ok && secs < 5.0;
    detail = "max round-trip error " + fmt(worst) + ", " + fmt(secs) + "s";
    return ok;
}

bool certificate_suite(std::string& detail) {
    const auto start = std::chrono::steady_clock::now();
    bool ok = true;

    const OddPolynomial f({1.0, 0.0, -1.0});
    const DriftSplit split = split_drift(f);
    ok = ok && close_to(split.kappa, 32.0 / 9.0, 1e-12);
    ok = ok && close_to(split.zeta2, 4.0 / 3.0, 1e-12);
    ok = ok && close_to(split.slope, -7.0 / 9.0, 1e-12);

    const RhoBound rho = rho_certificate(f, 1.0);
    ok = ok && close_to(rho.C, 0.5, 1e-12);          // sharp constant
    ok = ok && close_to(rho.rho(1.0), 0.0, 1e-12);   // rho(r) = 1/2 - r^2/2
    ok = ok && close_to(rho.rho(2.0), -1.5, 1e-12);
    ok = ok && close_to(rho.k_lambda(1.0), 1.0, 1e-12);
    ok = ok && close_to(rho.k_lambda(2.0), 2.5, 1e-12);

    // Randomized validation of the structural inequalities.
    const DriftCertificate cert = build_certificate(ExperimentConfig::preset("allen-cahn-like"));
    auto space = make_space(1.0, 12, 96, 0.3);
    GaussianStream rng(2026, make_stream(stream_purpose::sampling, 101));
    const auto a_fn = [&f](double r) { return compute_a(f, r); };
    int violations = 0;
    const int n_samples = 1000;
    for (int i = 0; i < n_samples; ++i) {
        const SpectralField u = random_field(space, rng, 3.0 * rng.uniform());
        const SpectralField v = random_field(space, rng, 3.0 * rng.uniform());
        const SpectralField z = random_field(space, rng, 3.0 * rng.uniform());
        if (!check_h3(f, cert.split, u, v).pass) ++violations;
        if (!check_h4(f, cert.diss.rho, u).pass) ++violations;
        if (!check_k_lambda(f, cert.diss.rho, cert.diss.lambda_star, v).pass) ++violations;
        if (!check_h2(f, u, z, a_fn).pass) ++violations;
    }
    ok = ok && violations == 0;

    const double secs = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - start).count();
    ok = ok && secs < 30.0;
    detail = std::to_string(violations) + " violations in " + std::to_string(4 * n_samples) +
             " checks, " + fmt(secs) + "s";
    return ok;
}

bool linear_stationary_law(std::string& detail) {
    ExperimentConfig cfg = ExperimentConfig::preset("linear-ou");
    // The claim is pinned to these exact parameters; fail loudly if the preset drifts.
    if (cfg.model.L != std::numbers::pi || cfg.sim.dt != 1e-3 || cfg.sim.T != 2000.0 ||
        cfg.sim.burn_in != 20.0 || cfg.noise.q0 != 1.0 || cfg.noise.beta != 1.0) {
        detail = "preset parameters changed";
        return false;
    }
    const RunOutcome out = run_verb(std::move(cfg), "ou-check", "c3");
    double worst = 0.0;
    for (const auto& row : out.report.at("modes"))
        worst = std::max(worst, row.at("rel_err").get<double>());
    detail = "worst mode error " + fmt(worst) + " (tolerance 0.10)";
    return out.exit_code == 0;
}

bool tightness_bounds(std::string& detail) {
    ExperimentConfig cfg = ExperimentConfig::preset("allen-cahn-like");
    if (cfg.sim.T != 500.0 || cfg.sim.ensemble != 32 ||
        cfg.experiment.epsilon_grid != std::vector<double>{1e-2, 1e-1, 1.0}) {
        detail = "preset parameters changed";
        return false;
    }
    const RunOutcome out = run_verb(std::move(cfg), "tightness", "c4");
    const auto& avg = out.report.at("time_average");
    detail = "time average " + fmt(avg.at("empirical").get<double>()) + " + " +
             fmt(avg.at("halfwidth").get<double>()) + " vs bound " +
             fmt(avg.at("bound").get<double>());
    return out.exit_code == 0;
}

bool coupled_gap_envelope(std::string& detail) {
    ExperimentConfig cfg = ExperimentConfig::preset("allen-cahn-like");
    if (cfg.experiment.perturbations != std::vector<double>{1e-2, 1e-1}) {
        detail = "preset parameters changed";
        return false;
    }
    const RunOutcome out = run_verb(std::move(cfg), "feller", "c5");
    detail = "scaling ratios";
    for (const auto& curve : out.report.at("curves"))
        detail += " " + fmt(curve.at("scaling_ratio").get<double>());
    return out.exit_code == 0;
}

bool contraction_of_map(std::string& detail) {
    ExperimentConfig cfg = ExperimentConfig::preset("allen-cahn-like");
    cfg.experiment.T_grid = {0.05, 0.2};
    if (cfg.experiment.p != 6.0 || cfg.experiment.pairs != 1000) {
        detail = "preset parameters changed";
        return false;
    }
    const RunOutcome out = run_verb(std::move(cfg), "contraction", "c6");
    const auto& rows = out.report.at("ratios");
    detail = "ratio " + fmt(rows[0].at("ratio").get<double>()) + " at T=0.05, " +
             fmt(rows[1].at("ratio").get<double>()) + " at T=0.2";
    return out.exit_code == 0;
}

bool convolution_scaling(std::string& detail) {
    // The pure-convolution claim lives in the small-horizon regime, so it runs
    // on the wide-domain linear preset whose relaxation time covers T = 0.4;
    // on the unit domain the sup-moment saturates well before that horizon.
    ExperimentConfig cfg = ExperimentConfig::preset("linear-ou");
    if (cfg.experiment.pairs != 1000 || cfg.experiment.p != 6.0) {
        detail = "preset parameters changed";
        return false;
    }
    const RunOutcome out = run_verb(std::move(cfg), "convolution", "c7");
    const auto& ms = out.report.at("checks").at("mean_square_vs_exact");
    detail = "quadratic-moment error " + fmt(ms.at("rel_err").get<double>()) +
             " (tolerance 0.05), grid sensitivity " +
             fmt(out.report.at("checks").at("step_refinement").at("rel_change").get<double>());
    return out.exit_code == 0;
}

bool invariance_distance_trend(std::string& detail) {
    ExperimentConfig cfg = ExperimentConfig::preset("allen-cahn-like");
    if (cfg.experiment.delta_t != 0.5) {
        detail = "preset parameters changed";
        return false;
    }
    const RunOutcome out = run_verb(std::move(cfg), "invariant", "c8");
    const auto& last = out.report.at("checkpoints").back();
    detail = "final distance " + fmt(last.at("max_distance").get<double>()) +
             " vs threshold " + fmt(last.at("max_threshold95").get<double>());
    return out.exit_code == 0;
}

bool stability_and_reproducibility(std::string& detail) {
    ExperimentConfig cfg = ExperimentConfig::preset("allen-cahn-like");
    cfg.sim.T = 1000.0;

    const fs::path dir_a = scratch_root() / "c9_a";
    const fs::path dir_b = scratch_root() / "c9_b";
    int codes[2];
    const fs::path dirs[2] = {dir_a, dir_b};
    for (int i = 0; i < 2; ++i) {
        cfg.output.directory = dirs[i].string();
        const fs::path cfg_path = scratch_root() / ("c9_" + std::to_string(i) + ".json");
        write_text_file(cfg_path, dump_json_17(cfg.to_json()));
        const std::string cmd = std::string(SPDELAB_CLI_BIN) + " simulate --quiet --config " +
                                cfg_path.string() + " >/dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        codes[i] = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }
    if (codes[0] != 0 || codes[1] != 0) {
        detail = "exit codes " + std::to_string(codes[0]) + "/" + std::to_string(codes[1]);
        return false;
    }

    const bool same_traj =
        fnv1a64_file(dir_a / "trajectory.csv") == fnv1a64_file(dir_b / "trajectory.csv");
    const bool same_report =
        fnv1a64_file(dir_a / "report.json") == fnv1a64_file(dir_b / "report.json");
    std::ifstream in(dir_a / "report.json");
    const json report = json::parse(in);
    const double max_norm = report.at("max_norm0").get<double>();
    detail = "max norm " + fmt(max_norm) + ", reruns " +
             (same_traj && same_report ? "byte-identical" : "DIFFER");
    return same_traj && same_report && std::isfinite(max_norm);
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<bool(std::string&)> body;
    };
    const Criterion criteria[] = {
        {1, "exact spectral and splitting identities", exact_identities},
        {2, "drift certificate constants and inequality validators", certificate_suite},
        {3, "linear stationary variances match the exact law", linear_stationary_law},
        {4, "time-averaged norms and tails under certificate bounds", tightness_bounds},
        {5, "coupled-gap envelope with quadratic perturbation scaling", coupled_gap_envelope},
        {6, "fixed-point map contracts over short horizons", contraction_of_map},
        {7, "stochastic convolution sup-moment scaling", convolution_scaling},
        {8, "occupation measure invariant under propagation", invariance_distance_trend},
        {9, "long-horizon stability and byte-identical reruns", stability_and_reproducibility},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        std::string detail;
        bool pass = false;
        try {
            pass = c.body(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        if (!pass) ++failures;
        std::printf("criterion %d (%s): %s%s%s\n", c.id, c.name, pass ? "PASS" : "FAIL",
                    detail.empty() ? "" : " — ", detail.c_str());
        std::fflush(stdout);
    }

    std::error_code ec;
    fs::remove_all(scratch_root(), ec);
    std::printf("%d of 9 criteria passed\n", 9 - failures);
    return failures;
}
