#include "qtomo/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "qtomo/measurement.hpp"
#include "qtomo/parallel.hpp"
#include "qtomo/version.hpp"

namespace qtomo {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_real(const std::string& text, const std::string& key) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::invalid_argument("option '" + key + "': not a number: '" +
                                    text + "'");
    }
}

long long parse_integer(const std::string& text, const std::string& key,
                        long long min_value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument("");
        if (v < min_value) {
            throw std::out_of_range("");
        }
        return v;
    } catch (...) {
        throw std::invalid_argument("option '" + key + "': expected integer >= " +
                                    std::to_string(min_value) + ", got '" + text +
                                    "'");
    }
}

std::uint64_t parse_seed(const std::string& text, const std::string& key) {
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
        throw std::invalid_argument("option '" + key +
                                    "': expected unsigned 64-bit decimal, got '" +
                                    text + "'");
    }
    try {
        return std::stoull(text);
    } catch (...) {
        throw std::invalid_argument("option '" + key + "': value out of range: '" +
                                    text + "'");
    }
}

std::vector<double> parse_reals_csv(const std::string& text,
                                    const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) {
        out.push_back(parse_real(trim(field), key));
    }
    if (!text.empty() && text.back() == ',') {
        throw std::invalid_argument("option '" + key + "': trailing comma in '" +
                                    text + "'");
    }
    return out;
}

DensityMatrix parse_state(const std::string& text) {
    const std::vector<double> v = parse_reals_csv(text, "state");
    if (v.size() == 3) {
        return density_from_bloch({v[0], v[1], v[2]});
    }
    if (v.size() == 8) {
        const DensityMatrix rho{cplx{v[0], v[1]}, cplx{v[2], v[3]},
                                cplx{v[4], v[5]}, cplx{v[6], v[7]}};
        require_valid(rho);
        return rho;
    }
    throw std::invalid_argument(
        "option 'state': expected a Bloch triple x,y,z or 8 reals "
        "r00re,r00im,r01re,r01im,r10re,r10im,r11re,r11im; got " +
        std::to_string(v.size()) + " fields");
}

std::vector<double> parse_epsilon(const std::string& text) {
    std::vector<double> grid;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        std::string field;
        while (std::getline(ss, field, ':')) parts.push_back(trim(field));
        if (parts.size() != 3) {
            throw std::invalid_argument(
                "option 'epsilon': grid must be start:stop:step, got '" + text +
                "'");
        }
        const double start = parse_real(parts[0], "epsilon");
        const double stop = parse_real(parts[1], "epsilon");
        const double step = parse_real(parts[2], "epsilon");
        if (!(start > 0.0) || !(step > 0.0) || stop < start) {
            throw std::invalid_argument(
                "option 'epsilon': grid requires start > 0, step > 0, "
                "stop >= start");
        }
        const auto count =
            static_cast<std::size_t>((stop - start) / step + 1e-9) + 1;
        for (std::size_t k = 0; k < count; ++k) {
            grid.push_back(start + static_cast<double>(k) * step);
        }
    } else {
        const double eps = parse_real(trim(text), "epsilon");
        if (!(eps > 0.0)) {
            throw std::invalid_argument("option 'epsilon': must be > 0");
        }
        grid.push_back(eps);
    }
    return grid;
}

Scheme parse_scheme(const std::string& text) {
    if (text == "weak") return Scheme::Weak;
    if (text == "projective") return Scheme::Projective;
    throw std::invalid_argument("option 'scheme': expected weak|projective, got '" +
                                text + "'");
}

Binning parse_binning(const std::string& text) {
    if (text == "signed") return Binning::Signed;
    if (text == "raw") return Binning::Raw;
    throw std::invalid_argument("option 'binning': expected signed|raw, got '" +
                                text + "'");
}

// Flag values collected as raw text; conversion happens after the config
// file and environment fallbacks are merged.
using KeyValues = std::map<std::string, std::string>;

KeyValues read_config_file(const std::string& path,
                           const std::set<std::string>& allowed) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot read config file: " + path);
    }
    KeyValues kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!allowed.count(key)) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": unknown config key '" + key + "'");
        }
        kv[key] = value;
    }
    return kv;
}

const std::set<std::string> kTrajectoryKeys = {"state", "sigma",   "steps",
                                               "seed",  "threads", "out"};
const std::set<std::string> kSweepKeys = {"state",   "ensemble", "epsilon",
                                          "reps",    "discard",  "scheme",
                                          "binning", "seed",     "threads",
                                          "out"};

const std::string& require_key(const KeyValues& kv, const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) {
        throw std::invalid_argument("missing required option '--" + key + "'");
    }
    return it->second;
}

void ensure_parent_dir(const std::string& path) {
    const std::filesystem::path parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
        if (ec) {
            throw std::runtime_error("cannot create directory " + parent.string() +
                                     ": " + ec.message());
        }
    }
}

std::ofstream open_output(const std::string& path) {
    ensure_parent_dir(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open output file: " + path);
    }
    return out;
}

void finish_output(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) {
        throw std::runtime_error("failed writing output file: " + path);
    }
}

struct ManifestExtras {
    std::size_t rows = 0;
    int threads_used = 1;
    long long duration_ms = 0;
    std::vector<int> degenerate_per_point; // sweep only
};

void write_manifest(const ExperimentSpec& spec, const ManifestExtras& extras,
                    const std::string& path) {
    std::ofstream out = open_output(path);
    out << "tool: qtomo " << kVersion << "\n";
    out << "mode: "
        << (spec.mode == ExperimentSpec::Mode::Trajectory ? "trajectory" : "sweep")
        << "\n";
    out << "command: " << canonical_command(spec) << "\n";
    out << "seed: " << spec.seed << "\n";
    out << "state: " << spec.state_arg << "\n";
    if (spec.mode == ExperimentSpec::Mode::Trajectory) {
        out << "sigma: " << fmt17(spec.sigma) << "\n";
        out << "steps: " << spec.steps << "\n";
    } else {
        out << "ensemble: " << spec.ensemble << "\n";
        out << "epsilon_grid: " << spec.epsilon_arg << "\n";
        out << "grid_points: " << spec.epsilon_grid.size() << "\n";
        out << "discard: " << fmt17(spec.discard) << "\n";
        out << "scheme: " << (spec.scheme == Scheme::Weak ? "weak" : "projective")
            << "\n";
        out << "binning: "
            << (spec.binning == Binning::Signed ? "signed" : "raw") << "\n";
        out << "repetitions: " << spec.repetitions << "\n";
    }
    out << "threads_requested: " << spec.threads << "\n";
    out << "threads_used: " << extras.threads_used << "\n";
    out << "output: " << spec.out << "\n";
    out << "rows: " << extras.rows << "\n";
    if (spec.mode == ExperimentSpec::Mode::Sweep) {
        int total = 0;
        std::string per_point;
        for (std::size_t i = 0; i < extras.degenerate_per_point.size(); ++i) {
            total += extras.degenerate_per_point[i];
            if (i) per_point += ',';
            per_point += std::to_string(extras.degenerate_per_point[i]);
        }
        out << "degenerate_runs_total: " << total << "\n";
        out << "degenerate_runs_per_point: " << per_point << "\n";
    }
    out << "duration_ms: " << extras.duration_ms << "\n";
    finish_output(out, path);
}

} // namespace

ExperimentSpec parse_args(const std::vector<std::string>& args) {
    CLI::App app{"Monte Carlo simulator of single-qubit weak and projective "
                 "measurements"};
    app.name("qtomo");
    app.require_subcommand(1);

    struct RawOptions {
        std::string state, sigma, steps, ensemble, epsilon, reps, discard,
            scheme, binning, seed, threads, out, config;
    };
    RawOptions traj_raw, sweep_raw;

    CLI::App* traj = app.add_subcommand(
        "trajectory", "Repeated weak measurements on one qubit; writes t,p00,p11");
    traj->add_option("--state", traj_raw.state,
                     "Initial state: Bloch x,y,z or 8 reals (re/im pairs)");
    traj->add_option("--sigma", traj_raw.sigma, "Pointer spread of each measurement");
    traj->add_option("--steps", traj_raw.steps, "Number of measurements");
    traj->add_option("--seed", traj_raw.seed, "Master seed (unsigned 64-bit)");
    traj->add_option("--threads", traj_raw.threads, "Worker count, 0 = auto");
    traj->add_option("--out", traj_raw.out, "Output CSV path");
    traj->add_option("--config", traj_raw.config, "key=value file; flags win");

    CLI::App* sw = app.add_subcommand(
        "sweep", "Tomography fidelity sweep over measurement strengths; writes "
                 "epsilon,fidelity,std_dev");
    sw->add_option("--state", sweep_raw.state,
                   "State under tomography: Bloch x,y,z or 8 reals");
    sw->add_option("--ensemble", sweep_raw.ensemble, "Qubits per repetition");
    sw->add_option("--epsilon", sweep_raw.epsilon,
                   "Strength value or start:stop:step grid");
    sw->add_option("--reps", sweep_raw.reps, "Repetitions per grid point");
    sw->add_option("--discard", sweep_raw.discard,
                   "Half-width of the discarded meter band");
    sw->add_option("--scheme", sweep_raw.scheme, "weak|projective");
    sw->add_option("--binning", sweep_raw.binning, "signed|raw");
    sw->add_option("--seed", sweep_raw.seed, "Master seed (unsigned 64-bit)");
    sw->add_option("--threads", sweep_raw.threads, "Worker count, 0 = auto");
    sw->add_option("--out", sweep_raw.out, "Output CSV path");
    sw->add_option("--config", sweep_raw.config, "key=value file; flags win");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw help_requested{app.help()};
    } catch (const CLI::CallForAllHelp&) {
        throw help_requested{app.help("", CLI::AppFormatMode::All)};
    } catch (const CLI::ParseError& e) {
        throw std::invalid_argument(e.what());
    }

    const bool is_traj = traj->parsed();
    CLI::App* sub = is_traj ? traj : sw;
    const RawOptions& raw = is_traj ? traj_raw : sweep_raw;
    const std::set<std::string>& allowed = is_traj ? kTrajectoryKeys : kSweepKeys;

    // Flag values first, then config entries for keys the flags left unset.
    KeyValues kv;
    const auto flag_given = [&](const char* key) {
        const CLI::Option* opt = sub->get_option_no_throw(std::string("--") + key);
        return opt != nullptr && opt->count() > 0;
    };
    const auto put_flag = [&](const char* key, const std::string& value) {
        if (flag_given(key)) kv[key] = value;
    };
    put_flag("state", raw.state);
    put_flag("sigma", raw.sigma);
    put_flag("steps", raw.steps);
    put_flag("ensemble", raw.ensemble);
    put_flag("epsilon", raw.epsilon);
    put_flag("reps", raw.reps);
    put_flag("discard", raw.discard);
    put_flag("scheme", raw.scheme);
    put_flag("binning", raw.binning);
    put_flag("seed", raw.seed);
    put_flag("threads", raw.threads);
    put_flag("out", raw.out);
    if (flag_given("config")) {
        for (const auto& [key, value] : read_config_file(raw.config, allowed)) {
            kv.emplace(key, value); // no overwrite: flags win
        }
    }
    if (!kv.count("seed")) {
        if (const char* env = std::getenv("QTOMO_SEED")) {
            kv["seed"] = env;
        }
    }

    ExperimentSpec spec;
    spec.mode = is_traj ? ExperimentSpec::Mode::Trajectory
                        : ExperimentSpec::Mode::Sweep;
    spec.state_arg = require_key(kv, "state");
    spec.state = parse_state(spec.state_arg);
    spec.out = require_key(kv, "out");
    if (kv.count("seed")) spec.seed = parse_seed(kv.at("seed"), "seed");
    if (kv.count("threads")) {
        spec.threads = static_cast<int>(parse_integer(kv.at("threads"), "threads", 0));
    }

    if (is_traj) {
        spec.sigma = parse_real(require_key(kv, "sigma"), "sigma");
        if (!(spec.sigma > 0.0)) {
            throw std::invalid_argument("option 'sigma': must be > 0");
        }
        spec.steps = static_cast<std::uint64_t>(
            parse_integer(require_key(kv, "steps"), "steps", 1));
    } else {
        spec.ensemble =
            static_cast<int>(parse_integer(require_key(kv, "ensemble"), "ensemble", 1));
        spec.epsilon_arg = require_key(kv, "epsilon");
        spec.epsilon_grid = parse_epsilon(spec.epsilon_arg);
        if (kv.count("reps")) {
            spec.repetitions = static_cast<int>(parse_integer(kv.at("reps"), "reps", 1));
        }
        if (kv.count("discard")) {
            spec.discard = parse_real(kv.at("discard"), "discard");
            if (spec.discard < 0.0) {
                throw std::invalid_argument("option 'discard': must be >= 0");
            }
        }
        if (kv.count("scheme")) spec.scheme = parse_scheme(kv.at("scheme"));
        if (kv.count("binning")) spec.binning = parse_binning(kv.at("binning"));
        if (spec.scheme == Scheme::Projective && spec.ensemble % 3 != 0) {
            throw std::invalid_argument(
                "option 'ensemble': projective scheme splits the ensemble three "
                "ways; " +
                std::to_string(spec.ensemble) + " is not divisible by 3");
        }
    }
    return spec;
}

std::string canonical_command(const ExperimentSpec& spec) {
    std::ostringstream cmd;
    if (spec.mode == ExperimentSpec::Mode::Trajectory) {
        cmd << "trajectory --state " << spec.state_arg << " --sigma "
            << fmt17(spec.sigma) << " --steps " << spec.steps;
    } else {
        cmd << "sweep --state " << spec.state_arg << " --ensemble "
            << spec.ensemble << " --epsilon " << spec.epsilon_arg << " --reps "
            << spec.repetitions << " --discard " << fmt17(spec.discard)
            << " --scheme " << (spec.scheme == Scheme::Weak ? "weak" : "projective")
            << " --binning "
            << (spec.binning == Binning::Signed ? "signed" : "raw");
    }
    cmd << " --seed " << spec.seed << " --threads " << spec.threads << " --out "
        << spec.out;
    return cmd.str();
}

RunSummary run_trajectory(const ExperimentSpec& spec) {
    const auto started = std::chrono::steady_clock::now();
    RandomStream rs(spec.seed, 0);
    const Trajectory tr = trajectory(spec.state, spec.sigma, spec.steps, rs);

    std::ofstream csv = open_output(spec.out);
    csv << "t,p00,p11\n";
    for (std::size_t t = 0; t < tr.states.size(); ++t) {
        csv << t << ',' << fmt17(tr.states[t].p00()) << ','
            << fmt17(tr.states[t].p11()) << '\n';
    }
    finish_output(csv, spec.out);

    ManifestExtras extras;
    extras.rows = tr.states.size();
    extras.threads_used = 1;
    extras.duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();
    const std::string manifest_path = spec.out + ".manifest.txt";
    write_manifest(spec, extras, manifest_path);
    return {spec.out, manifest_path, extras.rows, 0, extras.duration_ms};
}

RunSummary run_sweep(const ExperimentSpec& spec) {
    const auto started = std::chrono::steady_clock::now();
    TomographyConfig cfg;
    cfg.state = spec.state;
    cfg.ensemble = spec.ensemble;
    cfg.discard = spec.discard;
    cfg.scheme = spec.scheme;
    cfg.binning = spec.binning;
    cfg.repetitions = spec.repetitions;
    cfg.seed = spec.seed;

    const int threads = spec.threads > 0 ? spec.threads : default_thread_count();
    std::vector<int> degenerate;
    const std::vector<SweepRow> rows =
        sweep(cfg, spec.epsilon_grid, threads, &degenerate);

    std::ofstream csv = open_output(spec.out);
    csv << "epsilon,fidelity,std_dev\n";
    for (const SweepRow& row : rows) {
        csv << fmt17(row.epsilon) << ',' << fmt17(row.mean_fidelity) << ','
            << fmt17(row.std_fidelity) << '\n';
    }
    finish_output(csv, spec.out);

    ManifestExtras extras;
    extras.rows = rows.size();
    extras.threads_used = threads;
    extras.degenerate_per_point = degenerate;
    extras.duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();
    const std::string manifest_path = spec.out + ".manifest.txt";
    write_manifest(spec, extras, manifest_path);

    int total = 0;
    for (int d : degenerate) total += d;
    return {spec.out, manifest_path, extras.rows, total, extras.duration_ms};
}

RunSummary run(const ExperimentSpec& spec) {
    return spec.mode == ExperimentSpec::Mode::Trajectory ? run_trajectory(spec)
                                                         : run_sweep(spec);
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    args.reserve(static_cast<std::size_t>(argc > 1 ? argc - 1 : 0));
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    try {
        const ExperimentSpec spec = parse_args(args);
        const RunSummary summary = run(spec);
        std::cout << "wrote " << summary.csv_path << " (" << summary.rows
                  << " rows) and " << summary.manifest_path << " in "
                  << summary.duration_ms << " ms";
        if (summary.degenerate_total > 0) {
            std::cout << "; excluded " << summary.degenerate_total
                      << " degenerate repetitions";
        }
        std::cout << "\n";
        return 0;
    } catch (const help_requested& h) {
        std::cout << h.text;
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "qtomo: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "qtomo: " << e.what() << "\n";
        return 1;
    }
}

} // namespace qtomo
