#pragma once

#include <stdexcept>
#include <string>

namespace spdelab {

// Invalid or inconsistent configuration (bad ranges, aliasing, non-summable
// weights...). The CLI maps this to exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The state left the representable range mid-run. Exit code 3 at the CLI.
struct BlowUpError : std::runtime_error {
    BlowUpError(const std::string& msg, int step_index, double t)
        : std::runtime_error(msg), step(step_index), time(t) {}
    int step;
    double time;
};

}  // namespace spdelab
