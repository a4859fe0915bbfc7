#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "slereg/io.hpp"

// End-to-end checks of the installed command-line surface. The binary path
// and a scratch directory arrive through the environment (set by CTest).

namespace {

namespace fs = std::filesystem;

std::string cli() {
    const char* p = std::getenv("SLEREG_CLI");
    REQUIRE(p != nullptr);
    return p;
}

fs::path scratch() {
    const char* p = std::getenv("SLEREG_TMP");
    REQUIRE(p != nullptr);
    fs::create_directories(p);
    return p;
}

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

RunResult run(const std::string& args) {
    const fs::path out = scratch() / "stdout.txt";
    const fs::path err = scratch() / "stderr.txt";
    const std::string cmd = cli() + " " + args + " > " + out.string() + " 2> " + err.string();
    const int rc = std::system(cmd.c_str());
    RunResult res;
    res.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    res.out = slereg::read_text_file(out.string());
    res.err = slereg::read_text_file(err.string());
    return res;
}

}  // namespace

TEST_CASE("exponents command prints the closed forms") {
    const RunResult res = run("exponents --kappa 2");
    REQUIRE(res.exit_code == 0);
    CHECK(res.out.find("p_star") != std::string::npos);
    CHECK(res.out.find("1.25") != std::string::npos);
    CHECK(res.out.find("hausdorff_bound") != std::string::npos);
}

TEST_CASE("exponents at kappa 8 reports the empty admissible set") {
    const RunResult res = run("exponents --kappa 8");
    REQUIRE(res.exit_code == 0);
    CHECK(res.out.find("no admissible r") != std::string::npos);
    CHECK(res.out.find("no (empty admissible set)") != std::string::npos);
}

TEST_CASE("exponents reports the moment order at a requested p") {
    const RunResult res = run("exponents --kappa 4 --q-moment-at-p 1.6");
    REQUIRE(res.exit_code == 0);
    CHECK(res.out.find("Q(p=1.6)") != std::string::npos);
    CHECK(res.out.find("1.77778") != std::string::npos);
}

TEST_CASE("non-positive kappa is a usage error with exit code 2") {
    CHECK(run("exponents --kappa -1").exit_code == 2);
    CHECK(run("exponents --kappa 0").exit_code == 2);
    CHECK(run("bogus-subcommand").exit_code == 2);
    CHECK(run("exponents --kappa 4 --q-moment-at-p 0.5").exit_code == 2);
}

TEST_CASE("regions emits figure CSV with an explicit empty row at kappa 8") {
    const fs::path out = scratch() / "regions.csv";
    const RunResult res =
        run("regions --from 4 --to 12 --steps 5 --out " + out.string());
    REQUIRE(res.exit_code == 0);
    const std::string csv = slereg::read_text_file(out.string());
    CHECK(csv.find("kappa,set_name,lo,hi") != std::string::npos);
    CHECK(csv.find("8,I_J2,,") != std::string::npos);
    CHECK(csv.find("nan") == std::string::npos);
    CHECK(fs::exists(out.string() + ".manifest.json"));
}

TEST_CASE("simulate honors the zero-driving oracle flag") {
    const fs::path prefix = scratch() / "zero";
    const RunResult res = run("simulate --zero-driving --T 1 --dt 0.0001 --y-eval 0.0001 "
                              "--stride 100 --out " + prefix.string());
    REQUIRE(res.exit_code == 0);
    const slereg::SampledPath path = slereg::read_trace_csv(prefix.string() + ".csv");
    for (std::size_t i = 0; i < path.size(); ++i) {
        const std::complex<double> exact{0.0, 2.0 * std::sqrt(path.times[i])};
        REQUIRE(std::abs(path.points[i] - exact) < 1e-3);
    }
}

TEST_CASE("simulate is deterministic and hashes its config") {
    const fs::path p1 = scratch() / "runA";
    const fs::path p2 = scratch() / "runB";
    REQUIRE(run("simulate --kappa 2 --T 1 --dt 0.001 --seed 7 --binary --out " +
                p1.string()).exit_code == 0);
    REQUIRE(run("simulate --kappa 2 --T 1 --dt 0.001 --seed 7 --binary --out " +
                p2.string()).exit_code == 0);
    CHECK(slereg::read_text_file(p1.string() + ".csv") ==
          slereg::read_text_file(p2.string() + ".csv"));
    CHECK(slereg::read_text_file(p1.string() + ".bin") ==
          slereg::read_text_file(p2.string() + ".bin"));
    const auto m1 = nlohmann::json::parse(
        slereg::read_text_file(p1.string() + ".manifest.json"));
    const auto m2 = nlohmann::json::parse(
        slereg::read_text_file(p2.string() + ".manifest.json"));
    CHECK(m1["config_hash"] == m2["config_hash"]);
    CHECK(m1["tool_version"] == "slereg 0.1.0");

    const fs::path p3 = scratch() / "runC";
    REQUIRE(run("simulate --kappa 2 --T 1 --dt 0.001 --seed 8 --out " +
                p3.string()).exit_code == 0);
    const auto m3 = nlohmann::json::parse(
        slereg::read_text_file(p3.string() + ".manifest.json"));
    CHECK(m3["config_hash"] != m1["config_hash"]);
}

TEST_CASE("norms produces a monotone p-variation sweep") {
    const fs::path prefix = scratch() / "ntrace";
    REQUIRE(run("simulate --kappa 2 --T 1 --dt 0.00390625 --seed 3 --out " +
                prefix.string()).exit_code == 0);
    const fs::path out = scratch() / "norms.jsonl";
    std::string args = "norms --input " + prefix.string() + ".csv --out " + out.string();
    for (double p = 1.0; p <= 3.01; p += 0.1) args += " --pvar " + std::to_string(p);
    REQUIRE(run(args).exit_code == 0);

    std::istringstream lines(slereg::read_text_file(out.string()));
    std::string line;
    double prev = 1e300;
    int count = 0;
    while (std::getline(lines, line)) {
        const auto j = nlohmann::json::parse(line);
        REQUIRE(j["kind"] == "pvar");
        const double v = j["value"].get<double>();
        CHECK(v <= prev * (1.0 + 1e-12));
        prev = v;
        ++count;
    }
    CHECK(count == 21);
}

TEST_CASE("norms refuses an inadmissible Besov delta by naming the window") {
    const fs::path prefix = scratch() / "wtrace";
    REQUIRE(run("simulate --kappa 2 --T 1 --dt 0.0078125 --seed 3 --out " +
                prefix.string()).exit_code == 0);
    const fs::path out = scratch() / "norms2.jsonl";
    const RunResult res = run("norms --input " + prefix.string() +
                              ".csv --besov 0.95,1.44 --window-r 1.2 --kappa 2 --out " +
                              out.string());
    CHECK(res.exit_code == 1);
    CHECK(res.err.find("window") != std::string::npos);

    // both Hoelder windows in one invocation, with the subsample echo
    const RunResult res2 = run("norms --input " + prefix.string() +
                               ".csv --hoelder 0.25 --hoelder-stride 2 --window 0,1 "
                               "--window 0.1,1 --out " + out.string());
    REQUIRE(res2.exit_code == 0);
    std::istringstream lines(slereg::read_text_file(out.string()));
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) {
        CHECK(nlohmann::json::parse(line)["subsample_stride"] == 2);
        ++count;
    }
    CHECK(count == 2);
}

TEST_CASE("norms reports missing input as a runtime error") {
    CHECK(run("norms --input does_not_exist.csv --pvar 2 --out x.jsonl").exit_code == 1);
}

TEST_CASE("norms accepts the packed binary format") {
    const fs::path prefix = scratch() / "btrace";
    REQUIRE(run("simulate --kappa 2 --T 1 --dt 0.0078125 --seed 5 --binary --out " +
                prefix.string()).exit_code == 0);
    const fs::path out = scratch() / "bin_norms.jsonl";
    REQUIRE(run("norms --input " + prefix.string() + ".bin --pvar 2 --out " +
                out.string()).exit_code == 0);
    const auto j = nlohmann::json::parse(slereg::read_text_file(out.string()));
    CHECK(j["kind"] == "pvar");
    CHECK(j["value"].get<double>() > 0.0);
}

TEST_CASE("experiment runs from a config file and refuses a hash mismatch") {
    const fs::path cfg_path = scratch() / "exp.json";
    const fs::path out_dir = scratch() / "expout";
    fs::remove_all(out_dir);
    nlohmann::json cfg = {{"schema_version", 1},
                          {"kind", "derivative_moment"},
                          {"kappa", 2.0},
                          {"n_traces", 50},
                          {"dt", 1.0 / 512},
                          {"seed", 12},
                          {"r", 1.0},
                          {"grid", {{0.5, 0.25}, {1.0, 0.25}}}};
    slereg::write_text_file(cfg_path.string(), cfg.dump());
    REQUIRE(run("experiment --config " + cfg_path.string() + " --out-dir " +
                out_dir.string()).exit_code == 0);
    CHECK(fs::exists(out_dir / "derivative_moment.csv"));
    CHECK(fs::exists(out_dir / "results.jsonl"));
    CHECK(fs::exists(out_dir / "manifest.json"));

    // identical rerun resumes cleanly and reproduces the table bytes
    const std::string first =
        slereg::read_text_file((out_dir / "derivative_moment.csv").string());
    REQUIRE(run("experiment --config " + cfg_path.string() + " --out-dir " +
                out_dir.string()).exit_code == 0);
    CHECK(slereg::read_text_file((out_dir / "derivative_moment.csv").string()) == first);

    // a changed config against the same directory is refused
    cfg["seed"] = 13;
    slereg::write_text_file(cfg_path.string(), cfg.dump());
    const RunResult res = run("experiment --config " + cfg_path.string() + " --out-dir " +
                              out_dir.string());
    CHECK(res.exit_code == 1);
    CHECK(res.err.find("hash mismatch") != std::string::npos);
}

TEST_CASE("experiment dispatches the Besov finiteness kind") {
    const fs::path cfg_path = scratch() / "besov.json";
    const fs::path out_dir = scratch() / "besovout";
    fs::remove_all(out_dir);
    const double q = slereg::q_of_r(1.2, slereg::Kappa{2.0});
    nlohmann::json cfg = {{"schema_version", 1},
                          {"kind", "besov_finiteness"},
                          {"kappa", 2.0},
                          {"n_traces", 6},
                          {"dt", 1.0 / 256},
                          {"seed", 9},
                          {"r", 1.2},
                          {"delta", 0.4},
                          {"q", q},
                          {"epsilon", 0.0},
                          {"grid_n", 64}};
    slereg::write_text_file(cfg_path.string(), cfg.dump());
    REQUIRE(run("experiment --config " + cfg_path.string() + " --out-dir " +
                out_dir.string()).exit_code == 0);
    const auto res = nlohmann::json::parse(
        slereg::read_text_file((out_dir / "results.jsonl").string()));
    CHECK(res["kind"] == "besov_finiteness");
    CHECK(res["mean"].get<double>() > 0.0);
    CHECK(res["values"].size() == 6);
}

TEST_CASE("experiment schema violations exit with usage code") {
    const fs::path cfg_path = scratch() / "bad.json";
    slereg::write_text_file(cfg_path.string(), "{\"kind\": \"derivative_moment\"}");
    const RunResult res = run("experiment --config " + cfg_path.string());
    CHECK(res.exit_code == 2);
    CHECK(res.err.find("$.") != std::string::npos);

    slereg::write_text_file(cfg_path.string(), "not json at all");
    CHECK(run("experiment --config " + cfg_path.string()).exit_code == 2);
}
