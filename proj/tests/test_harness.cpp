#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "common.hpp"
#include "qtomo/harness.hpp"

using namespace qtomo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("qtomo_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream ss(s);
    std::vector<std::string> out;
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

std::string manifest_command(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    REQUIRE(in.good());
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("command: ", 0) == 0) return line.substr(9);
    }
    FAIL("manifest has no command line");
    return "";
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("parse_args state forms") {
    SUBCASE("Bloch triple") {
        const auto spec = parse_args({"sweep", "--state", "0,0,1", "--ensemble",
                                      "30", "--epsilon", "0.4", "--out", "x.csv"});
        CHECK(spec.state.r00 == cplx{1, 0});
        CHECK(spec.state.r11 == cplx{0, 0});
        CHECK(spec.state_arg == "0,0,1");
    }
    SUBCASE("matrix entries") {
        const auto spec = parse_args(
            {"sweep", "--state",
             "0.6995,0,-0.1925,0.021,-0.1925,-0.021,0.3005,0", "--ensemble",
             "30", "--epsilon", "0.4", "--out", "x.csv"});
        CHECK(spec.state.r00.real() == doctest::Approx(0.6995));
        CHECK(spec.state.r01.imag() == doctest::Approx(0.021));
    }
    SUBCASE("rejects bad vectors") {
        CHECK_THROWS_AS(parse_args({"sweep", "--state", "1,2", "--ensemble", "30",
                                    "--epsilon", "0.4", "--out", "x.csv"}),
                        std::invalid_argument);
        CHECK_THROWS_AS(parse_args({"sweep", "--state", "2,0,0", "--ensemble",
                                    "30", "--epsilon", "0.4", "--out", "x.csv"}),
                        std::domain_error);
        CHECK_THROWS_AS(parse_args({"sweep", "--state", "0,0,oops", "--ensemble",
                                    "30", "--epsilon", "0.4", "--out", "x.csv"}),
                        std::invalid_argument);
    }
}

TEST_CASE("parse_args defaults and validation") {
    const auto spec = parse_args({"sweep", "--state", "0,0,1", "--ensemble", "30",
                                  "--epsilon", "0.4", "--out", "x.csv"});
    CHECK(spec.discard == 0.0);
    CHECK(spec.binning == Binning::Signed);
    CHECK(spec.scheme == Scheme::Weak);
    CHECK(spec.repetitions == 100000);
    CHECK(spec.seed == 0);
    CHECK(spec.threads == 0);

    SUBCASE("projective divisibility") {
        CHECK_THROWS_WITH_AS(
            parse_args({"sweep", "--state", "0,0,1", "--ensemble", "31",
                        "--epsilon", "0.4", "--scheme", "projective", "--out",
                        "x.csv"}),
            doctest::Contains("divisible by 3"), std::invalid_argument);
    }
    SUBCASE("missing required flags") {
        CHECK_THROWS_WITH_AS(parse_args({"sweep", "--state", "0,0,1", "--epsilon",
                                         "0.4", "--out", "x.csv"}),
                             doctest::Contains("--ensemble"),
                             std::invalid_argument);
        CHECK_THROWS_AS(parse_args({"trajectory", "--state", "0,0,1", "--steps",
                                    "10", "--out", "x.csv"}),
                        std::invalid_argument);
    }
    SUBCASE("scheme and binning values") {
        CHECK_THROWS_AS(parse_args({"sweep", "--state", "0,0,1", "--ensemble",
                                    "30", "--epsilon", "0.4", "--scheme", "odop",
                                    "--out", "x.csv"}),
                        std::invalid_argument);
        const auto raw = parse_args({"sweep", "--state", "0,0,1", "--ensemble",
                                     "30", "--epsilon", "0.4", "--binning", "raw",
                                     "--out", "x.csv"});
        CHECK(raw.binning == Binning::Raw);
    }
}

TEST_CASE("parse_args epsilon grids") {
    SUBCASE("start:stop:step inclusive") {
        const auto spec =
            parse_args({"sweep", "--state", "0,0,1", "--ensemble", "30",
                        "--epsilon", "0.1:1.0:0.05", "--out", "x.csv"});
        CHECK(spec.epsilon_grid.size() == 19);
        CHECK(spec.epsilon_grid.front() == doctest::Approx(0.1));
        CHECK(spec.epsilon_grid.back() == doctest::Approx(1.0));
    }
    SUBCASE("single value") {
        const auto spec = parse_args({"sweep", "--state", "0,0,1", "--ensemble",
                                      "30", "--epsilon", "0.625", "--out", "x.csv"});
        CHECK(spec.epsilon_grid == std::vector<double>{0.625});
    }
    SUBCASE("invalid grids") {
        for (const char* bad : {"0:1:0.1", "0.5:0.1:0.1", "0.1:1.0:-0.1", "a:b:c"}) {
            CHECK_THROWS_AS(parse_args({"sweep", "--state", "0,0,1", "--ensemble",
                                        "30", "--epsilon", bad, "--out", "x.csv"}),
                            std::invalid_argument);
        }
    }
}

TEST_CASE("parse_args config file and environment") {
    TempDir tmp;
    const std::string cfg_path = tmp.file("run.cfg");
    {
        std::ofstream cfg(cfg_path);
        cfg << "# sweep settings\n";
        cfg << "state = 0,0,1\n";
        cfg << "ensemble = 30\n";
        cfg << "epsilon = 0.4\n";
        cfg << "seed = 77\n";
        cfg << "out = from_config.csv\n";
    }
    SUBCASE("config supplies unset flags") {
        const auto spec = parse_args({"sweep", "--config", cfg_path});
        CHECK(spec.seed == 77);
        CHECK(spec.ensemble == 30);
        CHECK(spec.out == "from_config.csv");
    }
    SUBCASE("flags win over config") {
        const auto spec =
            parse_args({"sweep", "--config", cfg_path, "--seed", "123"});
        CHECK(spec.seed == 123);
    }
    SUBCASE("unknown config key is named") {
        const std::string bad_path = tmp.file("bad.cfg");
        std::ofstream(bad_path) << "sigma = 5\n";
        CHECK_THROWS_WITH_AS(parse_args({"sweep", "--config", bad_path}),
                             doctest::Contains("sigma"), std::invalid_argument);
    }
    SUBCASE("QTOMO_SEED is the fallback") {
        ::setenv("QTOMO_SEED", "424242", 1);
        const auto spec = parse_args({"sweep", "--state", "0,0,1", "--ensemble",
                                      "30", "--epsilon", "0.4", "--out", "x.csv"});
        CHECK(spec.seed == 424242);
        const auto onflag =
            parse_args({"sweep", "--state", "0,0,1", "--ensemble", "30",
                        "--epsilon", "0.4", "--seed", "5", "--out", "x.csv"});
        CHECK(onflag.seed == 5);
        ::unsetenv("QTOMO_SEED");
    }
}

TEST_CASE("trajectory run output") {
    TempDir tmp;
    SUBCASE("eigenstate stays put") {
        ExperimentSpec spec = parse_args({"trajectory", "--state", "0,0,1",
                                          "--sigma", "5", "--steps", "50",
                                          "--seed", "3", "--out",
                                          tmp.file("traj.csv")});
        const RunSummary s = run(spec);
        CHECK(s.rows == 51);
        const std::string csv = read_file(s.csv_path);
        std::istringstream lines(csv);
        std::string line;
        std::getline(lines, line);
        CHECK(line == "t,p00,p11");
        std::size_t t = 0;
        while (std::getline(lines, line)) {
            std::istringstream row(line);
            std::string tf, p00f, p11f;
            std::getline(row, tf, ',');
            std::getline(row, p00f, ',');
            std::getline(row, p11f, ',');
            CHECK(tf == std::to_string(t));
            CHECK(std::stod(p00f) == 1.0);
            CHECK(std::stod(p11f) == 0.0);
            ++t;
        }
        CHECK(t == 51);
        CHECK(read_file(s.manifest_path).find("seed: 3") != std::string::npos);
    }
    SUBCASE("balanced state collapses and rows sum to one") {
        ExperimentSpec spec = parse_args(
            {"trajectory", "--state", "0.5,0,0.5,0,0.5,0,0.5,0", "--sigma", "5",
             "--steps", "100", "--seed", "1", "--out", tmp.file("traj2.csv")});
        const RunSummary s = run(spec);
        const std::string csv = read_file(s.csv_path);
        std::istringstream lines(csv);
        std::string line;
        std::getline(lines, line); // header
        double last_p00 = 0.5;
        while (std::getline(lines, line)) {
            std::istringstream row(line);
            std::string tf, p00f, p11f;
            std::getline(row, tf, ',');
            std::getline(row, p00f, ',');
            std::getline(row, p11f, ',');
            const double p00 = std::stod(p00f), p11 = std::stod(p11f);
            CHECK(std::abs(p00 + p11 - 1.0) < 1e-12);
            last_p00 = p00;
        }
        CHECK((last_p00 < 0.01 || last_p00 > 0.99));
    }
}

TEST_CASE("sweep run output") {
    TempDir tmp;
    const std::vector<std::string> args = {
        "sweep",   "--state", "-0.385,-0.042,0.399",
        "--ensemble", "30",   "--epsilon", "0.2:0.6:0.2",
        "--reps",  "400",     "--seed",    "11",
        "--out",   tmp.file("sweep.csv")};

    ExperimentSpec spec = parse_args(args);
    const RunSummary s = run(spec);
    CHECK(s.rows == 3);
    const std::string csv = read_file(s.csv_path);
    CHECK(csv.rfind("epsilon,fidelity,std_dev\n", 0) == 0);

    SUBCASE("numbers round-trip at full precision") {
        TomographyConfig cfg;
        cfg.state = spec.state;
        cfg.ensemble = 30;
        cfg.repetitions = 400;
        cfg.seed = 11;
        const auto rows = sweep(cfg, spec.epsilon_grid, 2);
        std::istringstream lines(csv);
        std::string line;
        std::getline(lines, line);
        for (const auto& row : rows) {
            REQUIRE(std::getline(lines, line));
            std::istringstream fields(line);
            std::string e, f, sd;
            std::getline(fields, e, ',');
            std::getline(fields, f, ',');
            std::getline(fields, sd, ',');
            CHECK(std::stod(e) == row.epsilon);
            CHECK(std::stod(f) == row.mean_fidelity);
            CHECK(std::stod(sd) == row.std_fidelity);
        }
    }

    SUBCASE("byte-identical across worker counts") {
        ExperimentSpec one = spec;
        one.threads = 1;
        one.out = tmp.file("sweep_t1.csv");
        ExperimentSpec eight = spec;
        eight.threads = 8;
        eight.out = tmp.file("sweep_t8.csv");
        run(one);
        run(eight);
        CHECK(read_file(one.out) == read_file(eight.out));
        CHECK(read_file(one.out) == csv);
    }

    SUBCASE("re-running the manifest command reproduces the bytes") {
        std::vector<std::string> cmd = split_ws(manifest_command(s.manifest_path));
        for (std::size_t i = 0; i + 1 < cmd.size(); ++i) {
            if (cmd[i] == "--out") cmd[i + 1] = tmp.file("rerun.csv");
        }
        const RunSummary rerun = run(parse_args(cmd));
        CHECK(read_file(rerun.csv_path) == csv);
    }
}

TEST_CASE("sweep with one repetition has a zero std_dev column") {
    TempDir tmp;
    ExperimentSpec spec = parse_args({"sweep", "--state", "0,0,1", "--ensemble",
                                      "30", "--epsilon", "0.2:0.4:0.1", "--reps",
                                      "1", "--seed", "2", "--out",
                                      tmp.file("one.csv")});
    run(spec);
    std::istringstream lines(read_file(spec.out));
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) {
        const auto pos = line.rfind(',');
        CHECK(std::stod(line.substr(pos + 1)) == 0.0);
    }
}

TEST_CASE("manifest reports degenerate repetitions") {
    TempDir tmp;
    ExperimentSpec spec = parse_args({"sweep", "--state", "0,0,1", "--ensemble",
                                      "1", "--epsilon", "1.0", "--discard", "2.5",
                                      "--reps", "300", "--seed", "8", "--out",
                                      tmp.file("degen.csv")});
    const RunSummary s = run(spec);
    CHECK(s.degenerate_total > 0);
    const std::string manifest = read_file(s.manifest_path);
    CHECK(manifest.find("degenerate_runs_total: " +
                        std::to_string(s.degenerate_total)) != std::string::npos);
}

TEST_CASE("cli binary end to end") {
    const char* bin = std::getenv("QTOMO_BIN");
    if (!bin) {
        MESSAGE("QTOMO_BIN not set; skipping CLI binary test");
        return;
    }
    TempDir tmp;
    const std::string out = tmp.file("cli.csv");
    const std::string cmd = std::string(bin) +
                            " sweep --state 0,0,1 --ensemble 30 --epsilon 0.4 "
                            "--reps 50 --seed 1 --out " +
                            out + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(fs::exists(out));
    CHECK(fs::exists(out + ".manifest.txt"));

    const std::string bad = std::string(bin) + " sweep --state 0,0,1 > /dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system(bad.c_str())) == 2);

    // every repetition degenerate -> empty statistics -> runtime failure
    const std::string degen = std::string(bin) +
                              " sweep --state 0,0,1 --ensemble 3 --epsilon 0.4 "
                              "--discard 1000 --reps 5 --seed 1 --out " +
                              tmp.file("degen.csv") + " > /dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system(degen.c_str())) == 1);

    const std::string help = std::string(bin) + " --help > /dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system(help.c_str())) == 0);
}

} // TEST_SUITE("harness")
