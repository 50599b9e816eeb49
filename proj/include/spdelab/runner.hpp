#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "spdelab/config.hpp"
#include "spdelab/drift.hpp"
#include "spdelab/io.hpp"

namespace spdelab {

// Certificate assembly shared by the certify verb, the occupation-measure
// checks, and the bindings. lambda_star falls back to D + 1 when the config
// leaves it at 0.
DriftCertificate build_certificate(const ExperimentConfig& config);
json certificate_to_json(const DriftCertificate& cert, const ExperimentConfig& config);

struct RunOutcome {
    int exit_code = 0;     // 0 pass, 2 a checked claim failed
    std::string verdict;   // PASS | FAIL
    json report;           // document also written to <out>/report.json
};

// Executes one verb against a config, writing all artifacts (report.json,
// CSV tables, optional binary snapshots, manifest.json) under out_dir.
// Throws ConfigError (exit 1 at the CLI) and BlowUpError (exit 3).
class Runner {
public:
    Runner(ExperimentConfig config, std::filesystem::path out_dir, bool quiet = false);

    RunOutcome run(const std::string& verb);
    static const std::vector<std::string>& verbs();

private:
    RunOutcome certify();
    RunOutcome simulate_run();
    RunOutcome ou_check();
    RunOutcome tightness();
    RunOutcome feller();
    RunOutcome contraction();
    RunOutcome convolution();
    RunOutcome invariant();

    void emit(const std::string& name, const std::string& content);
    void write_manifest();
    RunOutcome finish(json report);  // attaches verdict, writes report + manifest
    void note(const std::string& line) const;
    bool wants(const std::string& format) const;

    ExperimentConfig config_;
    std::filesystem::path out_;
    bool quiet_ = false;
    std::vector<std::pair<std::string, std::uint64_t>> written_;  // name -> content hash
};

}  // namespace spdelab
