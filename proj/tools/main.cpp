#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "spdelab/config.hpp"
#include "spdelab/errors.hpp"
#include "spdelab/runner.hpp"

namespace {

struct CliArgs {
    std::string verb;
    std::string config_path;
    std::string preset;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool quiet = false;
};

// SPDE_SEED (for CI sweeps) beats --seed beats the config file.
void apply_seed_overrides(spdelab::ExperimentConfig& cfg, const CliArgs& args) {
    if (const char* env = std::getenv("SPDE_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0')
            throw spdelab::ConfigError(std::string("SPDE_SEED is not an integer: ") + env);
        cfg.sim.seed = v;
    } else if (args.seed_given) {
        cfg.sim.seed = args.seed;
    }
}

int run(const CliArgs& args) {
    if (args.config_path.empty() == args.preset.empty())
        throw spdelab::ConfigError("pass exactly one of --config PATH or --preset NAME");

    spdelab::ExperimentConfig cfg = args.config_path.empty()
                                        ? spdelab::ExperimentConfig::preset(args.preset)
                                        : spdelab::ExperimentConfig::load(args.config_path);
    apply_seed_overrides(cfg, args);

    const std::string out_dir = args.out.empty() ? cfg.output.directory : args.out;
    spdelab::Runner runner(std::move(cfg), out_dir, args.quiet);
    return runner.run(args.verb).exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral-Galerkin laboratory for dissipative stochastic reaction-diffusion equations"};
    app.require_subcommand(1);

    CliArgs args;
    const std::pair<const char*, const char*> verbs[] = {
        {"certify", "Build the drift/noise certificate and validate its inequalities"},
        {"simulate", "Integrate one trajectory and write its observables"},
        {"invariant", "Test an occupation measure for invariance under the dynamics"},
        {"tightness", "Compare time-averaged norms and tail masses to certificate bounds"},
        {"feller", "Mean-square gap of coupled pairs against the Gronwall envelope"},
        {"contraction", "Monte-Carlo contraction factor of the fixed-point map"},
        {"convolution", "Sup-moment ratio of the stochastic convolution over short horizons"},
        {"ou-check", "Stationary mode variances of the linear equation vs the exact law"},
    };
    for (const auto& [name, help] : verbs) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", args.config_path, "JSON config file");
        sub->add_option("--preset", args.preset,
                        "named preset: allen-cahn-like, linear-ou, cubic-strong");
        sub->add_option("--out", args.out, "output directory (default: config output.directory)");
        sub->add_option("--seed", args.seed, "override sim.seed")
            ->each([&args](const std::string&) { args.seed_given = true; });
        sub->add_flag("--quiet", args.quiet, "suppress progress lines");
        sub->callback([&args, name = std::string(name)] { args.verb = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        return run(args);
    } catch (const spdelab::BlowUpError& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 3;
    } catch (const spdelab::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
