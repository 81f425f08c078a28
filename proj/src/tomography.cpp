#include "qtomo/tomography.hpp"

#include <cmath>
#include <sstream>

#include "qtomo/parallel.hpp"

namespace qtomo {

namespace {

void check_config(const TomographyConfig& cfg) {
    require_valid(cfg.state);
    if (cfg.ensemble < 1) {
        throw std::invalid_argument("ensemble size must be >= 1");
    }
    if (!(cfg.epsilon > 0.0)) {
        throw std::invalid_argument("epsilon must be > 0");
    }
    if (cfg.discard < 0.0) {
        throw std::invalid_argument("discard parameter must be >= 0");
    }
    if (cfg.repetitions < 1) {
        throw std::invalid_argument("repetitions must be >= 1");
    }
    if (cfg.scheme == Scheme::Projective && cfg.ensemble % 3 != 0) {
        std::ostringstream msg;
        msg << "projective scheme splits the ensemble three ways; n = "
            << cfg.ensemble << " is not divisible by 3";
        throw std::invalid_argument(msg.str());
    }
}

// Binning gate of the weak stages. For signed binning a reading of exactly
// +a (or 0 when a = 0) lands in the +1 bin; the -1 test only runs when the
// first fails.
void bin_reading(const TomographyConfig& cfg, double reading, TallyPair& tally,
                 int& discarded) {
    if (cfg.binning == Binning::Raw) {
        tally.sum += reading;
        tally.count += 1.0;
    } else if (reading >= cfg.discard) {
        tally.sum += 1.0;
        tally.count += 1.0;
    } else if (reading <= -cfg.discard) {
        tally.sum -= 1.0;
        tally.count += 1.0;
    } else {
        ++discarded;
    }
}

} // namespace

EstimateTriple weak_tomography_run(const TomographyConfig& cfg, RandomStream& rs,
                                   RunTallies* tallies) {
    check_config(cfg);
    const double sigma = 1.0 / std::sqrt(cfg.epsilon);
    RunTallies t;
    for (int q = 0; q < cfg.ensemble; ++q) {
        // Weak z measurement on the fresh copy.
        auto [mz, rho1] = weak_measure_sigma(cfg.state, sigma, rs);
        bin_reading(cfg, mz.reading, t.z, t.discarded_z);

        // Weak x measurement: bring the x-axis to the measurement (z) axis.
        const DensityMatrix rho1_x = rotate(rho1, {Axis::Y, -90.0});
        auto [mx, rho2_x] = weak_measure_sigma(rho1_x, sigma, rs);
        bin_reading(cfg, mx.reading, t.x, t.discarded_x);

        // Undo the x-basis rotation, then bring the y-axis up for the final
        // projective measurement. Every qubit reaches this stage, discarded
        // readings included.
        const DensityMatrix rho2 = rotate(rho2_x, {Axis::Y, 90.0});
        const DensityMatrix rho2_y = rotate(rho2, {Axis::X, 90.0});
        if (projective_measure(rho2_y, rs) > 0) ++t.y_plus;
    }
    if (t.z.count == 0.0 || t.x.count == 0.0) {
        throw degenerate_run_error(
            "all meter readings fell inside the discard band");
    }
    EstimateTriple est;
    est.z = t.z.sum / t.z.count;
    est.x = (t.x.sum / t.x.count) * std::exp(cfg.epsilon / 2.0);
    est.y = (2.0 * t.y_plus / cfg.ensemble - 1.0) * std::exp(cfg.epsilon);
    if (tallies) *tallies = t;
    return est;
}

EstimateTriple projective_tomography_run(const TomographyConfig& cfg,
                                         RandomStream& rs) {
    check_config(cfg);
    const int part = cfg.ensemble / 3;
    const DensityMatrix in_x = rotate(cfg.state, {Axis::Y, -90.0});
    const DensityMatrix in_y = rotate(cfg.state, {Axis::X, 90.0});

    const auto count_plus = [&](const DensityMatrix& rho) {
        int plus = 0;
        for (int q = 0; q < part; ++q) {
            if (projective_measure(rho, rs) > 0) ++plus;
        }
        return plus;
    };
    // Consumption order fixed as z, x, y.
    const int plus_z = count_plus(cfg.state);
    const int plus_x = count_plus(in_x);
    const int plus_y = count_plus(in_y);

    EstimateTriple est;
    est.x = 2.0 * plus_x / part - 1.0;
    est.y = 2.0 * plus_y / part - 1.0;
    est.z = 2.0 * plus_z / part - 1.0;
    return est;
}

double fidelity(const BlochVector& actual, const EstimateTriple& est) {
    const double dx = actual.x - est.x;
    const double dy = actual.y - est.y;
    const double dz = actual.z - est.z;
    return 1.0 - (dx * dx + dy * dy + dz * dz);
}

ScoreResult repeat_and_score(const TomographyConfig& cfg,
                             std::uint64_t stream_base, int threads) {
    check_config(cfg);
    const int n_reps = cfg.repetitions;
    const BlochVector actual = bloch_from_density(cfg.state);

    std::vector<double> fids(static_cast<std::size_t>(n_reps), 0.0);
    std::vector<char> degenerate(static_cast<std::size_t>(n_reps), 0);
    parallel_for(n_reps, threads, [&](std::int64_t i) {
        RandomStream rs(cfg.seed, stream_base + static_cast<std::uint64_t>(i));
        try {
            const EstimateTriple est = cfg.scheme == Scheme::Weak
                                           ? weak_tomography_run(cfg, rs)
                                           : projective_tomography_run(cfg, rs);
            fids[static_cast<std::size_t>(i)] = fidelity(actual, est);
        } catch (const degenerate_run_error&) {
            degenerate[static_cast<std::size_t>(i)] = 1;
        }
    });

    // Reduce in repetition order; the worker count cannot change the bytes.
    double sum = 0.0;
    long valid = 0;
    for (int i = 0; i < n_reps; ++i) {
        if (!degenerate[static_cast<std::size_t>(i)]) {
            sum += fids[static_cast<std::size_t>(i)];
            ++valid;
        }
    }
    if (valid == 0) {
        throw empty_statistics_error("every repetition was degenerate");
    }
    const double mean = sum / static_cast<double>(valid);
    double ss = 0.0;
    for (int i = 0; i < n_reps; ++i) {
        if (!degenerate[static_cast<std::size_t>(i)]) {
            const double d = fids[static_cast<std::size_t>(i)] - mean;
            ss += d * d;
        }
    }
    return {mean, std::sqrt(ss / static_cast<double>(valid)),
            static_cast<int>(n_reps - valid)};
}

std::vector<SweepRow> sweep(const TomographyConfig& base,
                            const std::vector<double>& epsilon_grid,
                            int threads, std::vector<int>* degenerate_out) {
    if (epsilon_grid.empty()) {
        throw std::invalid_argument("epsilon grid is empty");
    }
    for (std::size_t i = 1; i < epsilon_grid.size(); ++i) {
        if (!(epsilon_grid[i] > epsilon_grid[i - 1])) {
            throw std::invalid_argument("epsilon grid must be strictly increasing");
        }
    }
    std::vector<SweepRow> rows;
    rows.reserve(epsilon_grid.size());
    if (degenerate_out) degenerate_out->clear();
    for (std::size_t g = 0; g < epsilon_grid.size(); ++g) {
        TomographyConfig cfg = base;
        cfg.epsilon = epsilon_grid[g];
        const ScoreResult r =
            repeat_and_score(cfg, static_cast<std::uint64_t>(g) << 32, threads);
        rows.push_back({cfg.epsilon, r.mean_fidelity, r.std_fidelity});
        if (degenerate_out) degenerate_out->push_back(r.degenerate_runs);
    }
    return rows;
}

} // namespace qtomo
