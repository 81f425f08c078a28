#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qtomo/measurement.hpp"
#include "qtomo/random.hpp"
#include "qtomo/state.hpp"

namespace qtomo {

enum class Scheme { Weak, Projective };

// Signed: a valid meter reading contributes its sign (+1/-1) relative to the
// discard region; readings inside (-a, a) are discarded from the tally (the
// state update still happens). Raw: every reading contributes its value and
// the discard parameter is ignored.
enum class Binning { Signed, Raw };

// Full description of one tomography experiment.
struct TomographyConfig {
    DensityMatrix state;
    int ensemble = 30;          // qubits per repetition, n
    double epsilon = 0.5;       // weak-measurement strength, sigma = 1/sqrt(eps)
    double discard = 0.0;       // half-width a of the discarded meter band
    Scheme scheme = Scheme::Weak;
    Binning binning = Binning::Signed;
    int repetitions = 100000;   // protocol reruns, N
    std::uint64_t seed = 0;
};

// Estimated Bloch components. Correction factors can push these outside the
// unit sphere; they are reported raw.
struct EstimateTriple {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

inline BlochVector as_bloch(const EstimateTriple& e) {
    return BlochVector{e.x, e.y, e.z, /*physical=*/false};
}

// Running sum and valid-outcome count for one Pauli component.
struct TallyPair {
    double sum = 0.0;
    double count = 0.0;
};

// Per-run tallies of the weak scheme, exposed for audit and tests.
struct RunTallies {
    TallyPair z;
    TallyPair x;
    int y_plus = 0;      // +1 outcomes of the final projective stage
    int discarded_z = 0; // readings inside the discard band
    int discarded_x = 0;
};

struct SweepRow {
    double epsilon;
    double mean_fidelity;
    double std_fidelity; // population std dev over repetitions
};

struct ScoreResult {
    double mean_fidelity;
    double std_fidelity;
    int degenerate_runs; // repetitions excluded for empty tallies
};

// A repetition whose z or x tally ended up empty (possible at large discard
// parameters); the sweep layer excludes and counts these.
struct degenerate_run_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Every repetition of a score was degenerate; no statistics exist.
struct empty_statistics_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The weak scheme: per qubit, a weak z measurement, a weak x measurement
// (via R_y(-90) conjugation and back), then a projective y measurement (via
// R_x(90) conjugation). Estimators: z = Sz/Cz, x = (Sx/Cx) e^{eps/2},
// y = (2 N+/n - 1) e^{eps}. Throws degenerate_run_error if Cz or Cx is zero.
EstimateTriple weak_tomography_run(const TomographyConfig& cfg, RandomStream& rs,
                                   RunTallies* tallies = nullptr);

// The projective MUB baseline: the ensemble is split into thirds measured
// projectively along z, x, y; each component is 2 N+/(n/3) - 1 with no
// correction factor. Requires cfg.ensemble divisible by 3.
EstimateTriple projective_tomography_run(const TomographyConfig& cfg,
                                         RandomStream& rs);

// f = 1 - |actual - est|^2 (squared Euclidean distance of Bloch vectors).
// Unclamped; can be negative.
double fidelity(const BlochVector& actual, const EstimateTriple& est);

// Runs the configured scheme cfg.repetitions times on independent streams
// (stream id = stream_base + repetition index) and scores each run against
// bloch_from_density(cfg.state). Reduction is sequential in repetition order,
// so the result is bit-identical for any worker count.
ScoreResult repeat_and_score(const TomographyConfig& cfg,
                             std::uint64_t stream_base = 0, int threads = 1);

// One SweepRow per grid point; repetition r of grid point g draws from
// stream id (g << 32) + r. Grid must be non-empty and strictly increasing.
// Per-point degenerate-run counts are reported through `degenerate_out` when
// non-null.
std::vector<SweepRow> sweep(const TomographyConfig& base,
                            const std::vector<double>& epsilon_grid,
                            int threads = 1,
                            std::vector<int>* degenerate_out = nullptr);

} // namespace qtomo
