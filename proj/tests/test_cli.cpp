// End-to-end runs of the command-line front end in a scratch directory.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "wavestrip/io.hpp"

using namespace std::string_literals;
namespace fs = std::filesystem;

namespace {

const std::string kCli = WAVESTRIP_CLI_PATH;

fs::path scratch() {
    fs::path p = fs::temp_directory_path() / "wavestrip_cli_test";
    return p;
}

int run(const std::string& args, const std::string& log = "log.txt") {
    const std::string cmd = kCli + " " + args + " > " + (scratch() / log).string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

std::string base_config(const std::string& vorticity, const std::string& mode,
                        const std::string& mode_block, int n = 12, int m = 48) {
    std::ostringstream ss;
    ss << R"({
  "physical": {"g": 9.81, "h": 1.0, "L": 6.283185307179586},
  "vorticity": )" << vorticity << R"(,
  "numerics": {"N": )" << n << R"(, "M": )" << m << R"(},
  "mode": ")" << mode << R"(",
  "output_dir": ")" << (scratch() / mode).string() << R"(",
  ")" << mode << R"(": )" << mode_block << "\n}\n";
    return ss.str();
}

} // namespace

TEST_CASE("laminar sweep emits the closed-form mass flux") {
    fs::remove_all(scratch());
    fs::create_directories(scratch());

    const fs::path cfg = scratch() / "laminar.json";
    write(cfg, base_config(R"({"kind": "constant", "gamma0": 0.5})", "laminar",
                           R"({"lambda_min": -2.0, "lambda_max": 2.0, "count": 9})"));
    REQUIRE(run("laminar --config " + cfg.string()) == 0);

    std::ifstream csv(scratch() / "laminar" / "laminar.csv");
    REQUIRE(csv.good());
    std::string header;
    std::getline(csv, header);
    CHECK(header == "lambda,m,psi_y_min,psi_y_max,critical_layer_count");
    int rows = 0;
    std::string line;
    while (std::getline(csv, line)) {
        double lambda, m;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf", &lambda, &m) == 2);
        // m(lambda) = gamma0 h^2/2 + lambda h
        CHECK(m == doctest::Approx(0.25 + lambda).epsilon(1e-11));
        ++rows;
    }
    CHECK(rows == 9);
}

TEST_CASE("malformed config exits with code 2 and names the key") {
    const fs::path cfg = scratch() / "bad.json";
    write(cfg, R"({
  "physical": {"g": 9.81, "h": -1.0, "L": 6.283185307179586},
  "vorticity": {"kind": "constant"},
  "numerics": {"N": 8, "M": 32},
  "mode": "laminar"
})");
    CHECK(run("laminar --config " + cfg.string(), "bad.txt") == 2);
    CHECK(slurp(scratch() / "bad.txt").find("physical.h") != std::string::npos);

    CHECK(run("laminar --config " + (scratch() / "missing.json").string(), "missing.txt") == 2);
}

TEST_CASE("dispersion grid and bifurcation roots") {
    const fs::path dcfg = scratch() / "dispersion.json";
    write(dcfg, base_config(R"({"kind": "constant", "gamma0": 0.0})", "dispersion",
                            R"({"k_min": 1, "k_max": 2, "lambda_min": 0.5, "lambda_max": 4.0, "lambda_count": 7})"));
    REQUIRE(run("dispersion --config " + dcfg.string()) == 0);
    CHECK(fs::exists(scratch() / "dispersion" / "dispersion.csv"));

    const fs::path bcfg = scratch() / "bifurcate.json";
    write(bcfg, base_config(R"({"kind": "constant", "gamma0": 0.0})", "bifurcate",
                            R"({"k": 1, "bracket": [0.5, 5.0]})"));
    REQUIRE(run("bifurcate --config " + bcfg.string()) == 0);
    const std::string roots = slurp(scratch() / "bifurcate" / "bifurcation_roots.csv");
    // root at sqrt(9.81 tanh 1) = 2.7333...
    CHECK(roots.find("2.7333") != std::string::npos);
}

TEST_CASE("continuation run: outputs, determinism, resume, check") {
    auto cont_cfg = [&](const std::string& outdir) {
        std::ostringstream ss;
        ss << R"({
  "physical": {"g": 9.81, "h": 1.0, "L": 6.283185307179586},
  "vorticity": {"kind": "constant", "gamma0": 0.0},
  "numerics": {"N": 12, "M": 48},
  "mode": "continue",
  "output_dir": ")" << (scratch() / outdir).string() << R"(",
  "thresholds": {"initial_step": 0.01, "max_step": 0.01, "snapshot_every": 2},
  "continue": {"k0": 1, "bracket": [0.5, 5.0], "budget": 6}
}
)";
        return ss.str();
    };
    const fs::path cfg1 = scratch() / "cont1.json";
    const fs::path cfg2 = scratch() / "cont2.json";
    write(cfg1, cont_cfg("cont1"));
    write(cfg2, cont_cfg("cont2"));

    REQUIRE(run("continue --config " + cfg1.string()) == 0);
    const fs::path out1 = scratch() / "cont1";
    REQUIRE(fs::exists(out1 / "branch.csv"));
    REQUIRE(fs::exists(out1 / "summary.json"));
    REQUIRE(fs::exists(out1 / "checkpoint.json"));
    REQUIRE(fs::exists(out1 / "state_last.json"));
    REQUIRE(fs::exists(out1 / "profile_000000.csv"));

    const std::string branch = slurp(out1 / "branch.csv");
    CHECK(branch.find("s,lambda,q,wave_height,min_K,greatest_height_margin,"
                      "bed_clearance,newton_iters,verdict_so_far") == 0);
    CHECK(branch.find("budget_exhausted") != std::string::npos);

    // identical config, second directory: byte-identical outputs
    REQUIRE(run("continue --config " + cfg2.string()) == 0);
    CHECK(slurp(out1 / "branch.csv") == slurp(scratch() / "cont2" / "branch.csv"));
    CHECK(slurp(out1 / "summary.json") == slurp(scratch() / "cont2" / "summary.json"));
    CHECK(slurp(out1 / "profile_000000.csv")
          == slurp(scratch() / "cont2" / "profile_000000.csv"));

    // rerun in place: also byte-identical (criterion: determinism)
    const std::string before = slurp(out1 / "branch.csv");
    REQUIRE(run("continue --config " + cfg1.string()) == 0);
    CHECK(slurp(out1 / "branch.csv") == before);

    // resume continues from the checkpoint without a tangent derivation
    const fs::path rcfg = scratch() / "resume.json";
    write(rcfg, cont_cfg("resumed"));
    REQUIRE(run("continue --config " + rcfg.string() + " --resume "
                + (out1 / "checkpoint.json").string()) == 0);
    CHECK(fs::exists(scratch() / "resumed" / "branch.csv"));

    // verify the persisted final state
    REQUIRE(run("check " + (out1 / "state_last.json").string(), "check.txt") == 0);
    const std::string check_out = slurp(scratch() / "check.txt");
    CHECK(check_out.find("state check") != std::string::npos);
    CHECK(check_out.find("bernoulli gap") != std::string::npos);

    // truncated state file: schema error, exit 2
    const fs::path trunc = scratch() / "trunc.json";
    const std::string full = slurp(out1 / "state_last.json");
    write(trunc, full.substr(0, full.size() / 2));
    CHECK(run("check " + trunc.string(), "trunc.txt") == 2);
    CHECK(slurp(scratch() / "trunc.txt").find("byte") != std::string::npos);
}

TEST_CASE("resolution override validation") {
    const fs::path cfg = scratch() / "laminar2.json";
    write(cfg, base_config(R"({"kind": "constant", "gamma0": 0.0})", "laminar",
                           R"({"lambda_min": -1.0, "lambda_max": 1.0, "count": 3})"));
    CHECK(run("laminar --config " + cfg.string() + " --resolution nonsense", "res.txt") == 2);
    CHECK(run("laminar --config " + cfg.string() + " --resolution 16,64") == 0);
}

TEST_CASE("continuation refusals and both half branches") {
    // bracket without a bifurcation point: numerical failure, exit 3
    const fs::path nocfg = scratch() / "noroot.json";
    write(nocfg, R"({
  "physical": {"g": 9.81, "h": 1.0, "L": 6.283185307179586},
  "vorticity": {"kind": "constant", "gamma0": 0.0},
  "numerics": {"N": 12, "M": 48},
  "mode": "continue",
  "output_dir": ")" + (scratch() / "noroot").string() + R"(",
  "continue": {"k0": 1, "bracket": [5.0, 9.0], "budget": 4}
})");
    CHECK(run("continue --config " + nocfg.string(), "noroot.txt") == 3);
    CHECK(slurp(scratch() / "noroot.txt").find("no bifurcation point") != std::string::npos);

    // both halves produce the mirrored output set
    const fs::path bcfg = scratch() / "both.json";
    write(bcfg, R"({
  "physical": {"g": 9.81, "h": 1.0, "L": 6.283185307179586},
  "vorticity": {"kind": "constant", "gamma0": 0.0},
  "numerics": {"N": 12, "M": 48},
  "mode": "continue",
  "output_dir": ")" + (scratch() / "both").string() + R"(",
  "thresholds": {"initial_step": 0.01, "max_step": 0.01},
  "continue": {"k0": 1, "bracket": [0.5, 5.0], "budget": 4}
})");
    REQUIRE(run("continue --config " + bcfg.string()
                + " --both-half-branches") == 0);
    CHECK(fs::exists(scratch() / "both" / "branch.csv"));
    CHECK(fs::exists(scratch() / "both" / "branch_minus.csv"));
    CHECK(fs::exists(scratch() / "both" / "summary_minus.json"));
    CHECK(fs::exists(scratch() / "both" / "state_last_minus.json"));
}

TEST_CASE("check reports a small gap for a persisted converged wave") {
    // state persisted by the small continuation run above
    const fs::path state = scratch() / "both" / "state_last.json";
    REQUIRE(fs::exists(state));
    REQUIRE(run("check " + state.string(), "gap.txt") == 0);
    const std::string out = slurp(scratch() / "gap.txt");
    const auto pos = out.find("bernoulli gap");
    REQUIRE(pos != std::string::npos);
    double gap = -1.0;
    REQUIRE(std::sscanf(out.c_str() + pos, "bernoulli gap %lf", &gap) == 1);
    CHECK(gap >= 0.0);
    CHECK(gap < 1e-9);  // small amplitude, fully resolved at N = 12
}

TEST_CASE("outputs do not depend on the thread count") {
    const fs::path cfg = scratch() / "threads.json";
    write(cfg, R"({
  "physical": {"g": 9.81, "h": 1.0, "L": 6.283185307179586},
  "vorticity": {"kind": "constant", "gamma0": 0.3},
  "numerics": {"N": 12, "M": 48},
  "mode": "continue",
  "output_dir": ")" + (scratch() / "threads_out").string() + R"(",
  "thresholds": {"initial_step": 0.01, "max_step": 0.01},
  "continue": {"k0": 1, "bracket": [0.5, 5.0], "budget": 4}
})");
    auto run_threads = [&](const char* nt, const char* out) {
        const std::string cmd = "OMP_NUM_THREADS="s + nt + " " + kCli
            + " continue --config " + cfg.string() + " --out "
            + (scratch() / out).string() + " > /dev/null 2>&1";
        return WEXITSTATUS(std::system(cmd.c_str()));
    };
    REQUIRE(run_threads("1", "t1") == 0);
    REQUIRE(run_threads("2", "t2") == 0);
    CHECK(slurp(scratch() / "t1" / "branch.csv") == slurp(scratch() / "t2" / "branch.csv"));
    CHECK(slurp(scratch() / "t1" / "state_last.json")
          == slurp(scratch() / "t2" / "state_last.json"));
}

TEST_CASE("check on a persisted trivial state reports near-zero residuals") {
    wavestrip::Problem p;
    p.phys = wavestrip::Physics{9.81, 1.0, 2.0 * M_PI};
    p.res = wavestrip::Resolution{8, 48};
    p.gamma = wavestrip::VorticityModel::affine(-0.5, 0.2);
    const fs::path file = scratch() / "trivial_state.json";
    wavestrip::save_state(file.string(), p, wavestrip::State::trivial(p, 1.4));

    REQUIRE(run("check " + file.string(), "trivial_check.txt") == 0);
    const std::string out = slurp(scratch() / "trivial_check.txt");
    const auto pos = out.find("||F||_inf");
    REQUIRE(pos != std::string::npos);
    double fnorm = -1.0;
    REQUIRE(std::sscanf(out.c_str() + pos, "||F||_inf %lf", &fnorm) == 1);
    CHECK(fnorm < 1e-11);
}
