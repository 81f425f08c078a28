#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qtomo/state.hpp"
#include "qtomo/tomography.hpp"

namespace qtomo {

// Fully validated description of one CLI experiment.
struct ExperimentSpec {
    enum class Mode { Trajectory, Sweep };
    Mode mode = Mode::Sweep;

    DensityMatrix state;
    std::string state_arg; // input text, echoed in the manifest

    // trajectory mode
    double sigma = 0.0;
    std::uint64_t steps = 0;

    // sweep mode
    int ensemble = 0;
    std::vector<double> epsilon_grid;
    std::string epsilon_arg;
    double discard = 0.0;
    Scheme scheme = Scheme::Weak;
    Binning binning = Binning::Signed;
    int repetitions = 100000;

    std::uint64_t seed = 0;
    int threads = 0; // 0 = all hardware threads
    std::string out; // CSV path; manifest lands at out + ".manifest.txt"
};

// Thrown by parse_args when the user asked for --help; carries the text.
struct help_requested {
    std::string text;
};

// Parses `<subcommand> [flags...]` (argv minus the program name). Values are
// merged in precedence order: flags, then --config file entries, then the
// QTOMO_SEED environment fallback, then defaults. Throws
// std::invalid_argument naming the offending key on any problem.
ExperimentSpec parse_args(const std::vector<std::string>& args);

struct RunSummary {
    std::string csv_path;
    std::string manifest_path;
    std::size_t rows = 0;
    int degenerate_total = 0;
    long long duration_ms = 0;
};

RunSummary run_trajectory(const ExperimentSpec& spec);
RunSummary run_sweep(const ExperimentSpec& spec);
RunSummary run(const ExperimentSpec& spec);

// Rebuilds the flag string recorded in the manifest; parse_args on its
// space-split tokens reproduces the spec (and therefore the CSV bytes).
std::string canonical_command(const ExperimentSpec& spec);

// main() body of the qtomo binary.
int run_cli(int argc, char** argv);

} // namespace qtomo
