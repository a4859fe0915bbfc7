// Command-line front door: exponent queries, admissible-region scans,
// trace simulation, seminorm estimation on stored paths, and experiment
// batches. Every command is deterministic given its full flag set, and
// every file-producing run writes a manifest with the config hash.
//
// Exit codes: 0 success, 1 runtime/IO error, 2 usage error.

#include <complex>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "slereg/driving.hpp"
#include "slereg/experiments.hpp"
#include "slereg/exponents.hpp"
#include "slereg/io.hpp"
#include "slereg/loewner.hpp"
#include "slereg/parallel.hpp"
#include "slereg/regularity.hpp"

namespace {

constexpr const char* kVersion = "slereg 0.1.0";

std::size_t thread_count(std::size_t flag_value) {
    // the environment variable overrides the flag
    if (const char* env = std::getenv("SLE_REG_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n >= 1) return static_cast<std::size_t>(n);
    }
    return flag_value ? flag_value : 1;
}

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

void write_manifest(const std::string& path, const std::string& command_line,
                    const nlohmann::json& config, std::uint64_t seed,
                    const std::string& started,
                    const std::vector<std::string>& outputs) {
    slereg::RunManifest m;
    m.command_line = command_line;
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(slereg::fnv1a64(config.dump())));
    m.config_hash = buf;
    m.tool_version = kVersion;
    m.seed = seed;
    m.started_at = started;
    m.finished_at = slereg::iso8601_now();
    m.outputs = outputs;
    m.embedded_config = config;
    slereg::write_text_file(path, slereg::manifest_to_json(m).dump(2) + "\n");
}

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// --- exponents --------------------------------------------------------------

int run_exponents(double kappa_value, std::optional<double> q_at_p,
                  const std::string& json_path) {
    const slereg::Kappa k{kappa_value};
    const auto [r1m, r1p] = slereg::r_one_pm(k);
    const auto pvar_set = slereg::admissible_pvar(k);

    const auto print_row = [](const std::string& name, const std::string& value) {
        std::printf("%-18s %s\n", name.c_str(), value.c_str());
    };
    print_row("kappa", fmt6(k.value));
    print_row("r_c", fmt6(slereg::r_critical(k)));
    print_row("r_1-", fmt6(r1m));
    print_row("r_1+", fmt6(r1p));
    if (k.value <= 1.0) {
        const auto [j1m, j1p] = slereg::j_one_pm(k);
        print_row("j_1-", fmt6(j1m));
        print_row("j_1+", fmt6(j1p));
    }
    print_row("I", slereg::interval_i(k).str());
    print_row("I_J1", slereg::admissible_besov(k).str());
    print_row("I_J2", slereg::admissible_hoelder(k).str());
    print_row("I_J1_J2", pvar_set.is_empty() ? "{} (no admissible r)" : pvar_set.str());
    print_row("p_star", fmt6(slereg::p_star(k)));
    print_row("alpha_star", fmt6(slereg::alpha_star(k)));
    print_row("alpha_zero", fmt6(slereg::alpha_zero(k)));
    print_row("hausdorff_bound", fmt6(slereg::hausdorff_upper(k)));
    print_row("attainable", slereg::attainable(k) ? "yes" : "no (empty admissible set)");
    if (q_at_p)
        print_row("Q(p=" + fmt6(*q_at_p) + ")", fmt6(slereg::moment_order_q(*q_at_p, k)));

    if (!json_path.empty()) {
        nlohmann::json j;
        j["kappa"] = k.value;
        j["r_c"] = slereg::r_critical(k);
        j["r_1m"] = r1m;
        j["r_1p"] = r1p;
        if (k.value <= 1.0) {
            const auto [j1m, j1p] = slereg::j_one_pm(k);
            j["j_1m"] = j1m;
            j["j_1p"] = j1p;
        }
        j["I"] = slereg::interval_union_to_json(slereg::interval_i(k));
        j["I_J1"] = slereg::interval_union_to_json(slereg::admissible_besov(k));
        j["I_J2"] = slereg::interval_union_to_json(slereg::admissible_hoelder(k));
        j["I_J1_J2"] = slereg::interval_union_to_json(pvar_set);
        j["p_star"] = slereg::p_star(k);
        j["alpha_star"] = slereg::alpha_star(k);
        j["alpha_zero"] = slereg::alpha_zero(k);
        j["hausdorff_bound"] = slereg::hausdorff_upper(k);
        j["attainable"] = slereg::attainable(k);
        if (q_at_p) {
            j["q_moment_at_p"] = *q_at_p;
            j["Q"] = slereg::moment_order_q(*q_at_p, k);
        }
        slereg::write_text_file(json_path, j.dump(2) + "\n");
    }
    return 0;
}

// --- regions ------------------------------------------------------------------

int run_regions(double from, double to, int steps, const std::string& out_csv,
                const std::string& out_json, const std::string& command_line) {
    const std::string started = slereg::iso8601_now();
    const auto rows = slereg::region_scan(from, to, steps);
    std::vector<std::string> outputs;
    slereg::write_text_file(out_csv, slereg::region_scan_to_csv(rows));
    outputs.push_back(out_csv);
    if (!out_json.empty()) {
        slereg::write_text_file(out_json, slereg::region_scan_to_json(rows).dump(2) + "\n");
        outputs.push_back(out_json);
    }
    nlohmann::json config = {
        {"command", "regions"}, {"from", from}, {"to", to}, {"steps", steps}};
    write_manifest(out_csv + ".manifest.json", command_line, config, 0, started, outputs);
    return 0;
}

// --- simulate -------------------------------------------------------------------

int run_simulate(double kappa_value, double T, double dt, std::uint64_t seed,
                 const std::string& out_prefix, bool zero, double y_eval,
                 std::size_t stride, bool binary, const std::string& command_line) {
    const std::string started = slereg::iso8601_now();
    const auto n_steps = static_cast<std::size_t>(std::llround(T / dt));
    if (n_steps < 1) throw CLI::ValidationError("simulate", "T/dt must be at least 1");

    const slereg::DrivingPath d =
        zero ? slereg::zero_driving(T, n_steps)
             : slereg::sample_driving(slereg::Kappa{kappa_value}, T, n_steps, seed);
    const slereg::TracePath tr = slereg::trace_with_stride(d, stride, y_eval);

    std::vector<std::string> outputs;
    const std::string csv_path = out_prefix + ".csv";
    slereg::write_trace_csv(tr, csv_path);
    outputs.push_back(csv_path);
    if (binary) {
        const std::string bin_path = out_prefix + ".bin";
        slereg::write_trace_binary(tr, bin_path);
        outputs.push_back(bin_path);
    }

    nlohmann::json config = {{"command", "simulate"},
                             {"kappa", zero ? 0.0 : kappa_value},
                             {"T", T},
                             {"dt", dt},
                             {"seed", seed},
                             {"zero_driving", zero},
                             {"y_eval", tr.y_eval},
                             {"stride", stride}};
    write_manifest(out_prefix + ".manifest.json", command_line, config, seed, started,
                   outputs);
    std::printf("trace: %zu points, %zu branch clamps, %zu near-tip flags\n",
                tr.points.size(), tr.diagnostics.branch_clamps,
                tr.diagnostics.near_tip_flags);
    return 0;
}

// --- norms ----------------------------------------------------------------------

slereg::SampledPath load_path(const std::string& input) {
    if (input.size() > 4 && input.substr(input.size() - 4) == ".bin")
        return slereg::SampledPath::from_trace(slereg::read_trace_binary(input));
    return slereg::read_trace_csv(input);
}

int run_norms(const std::string& input, const std::vector<double>& pvar_ps,
              const std::vector<double>& hoelder_alphas, std::size_t hoelder_stride,
              const std::vector<std::pair<double, double>>& besov_params,
              std::vector<std::pair<double, double>> windows, double window_r,
              double kappa_value, const std::string& out_path,
              const std::string& command_line) {
    const std::string started = slereg::iso8601_now();
    const slereg::SampledPath path = load_path(input);
    if (windows.empty()) windows = {{path.t_begin(), path.t_end()}};

    // the admissibility refusal path: delta must sit inside the window of
    // the supplied r before any Besov evaluation happens
    if (window_r != 0.0) {
        const slereg::Kappa k{kappa_value};
        const slereg::DeltaWindow win =
            slereg::besov_window(window_r, k, slereg::BesovMode::besov);
        for (const auto& [delta, q] : besov_params) {
            if (win.empty() || delta >= win.hi) {
                std::fprintf(stderr,
                             "norms: delta = %g is inadmissible for r = %g: the window "
                             "(0, (zeta+q)/(2q)) = (0, %g) excludes it\n",
                             delta, window_r, win.hi);
                return 1;
            }
        }
    }

    std::string lines;
    const auto echo = [&](slereg::SeminormResult res) {
        nlohmann::json j = slereg::seminorm_to_json(res);
        j["input"] = input;
        lines += j.dump() + "\n";
    };
    for (const auto& [a, b] : windows) {
        const slereg::SampledPath sub = path.window(a, b);
        if (sub.size() < 2) continue;
        for (double p : pvar_ps) echo(slereg::p_variation(sub, p));
        for (double alpha : hoelder_alphas)
            echo(slereg::hoelder_norm(sub, alpha, hoelder_stride));
        for (const auto& [delta, q] : besov_params)
            echo(slereg::besov_seminorm(sub, slereg::BesovParams{delta, q}));
    }
    slereg::write_text_file(out_path, lines);

    nlohmann::json config = {{"command", "norms"}, {"input", input}};
    write_manifest(out_path + ".manifest.json", command_line, config, 0, started,
                   {out_path});
    return 0;
}

// --- experiment -------------------------------------------------------------------

int run_experiment(const std::string& config_path, std::string out_dir,
                   std::size_t threads, const std::string& command_line) {
    const std::string started = slereg::iso8601_now();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(slereg::read_text_file(config_path));
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("config: " + std::string(e.what()));
    }
    slereg::ExperimentConfig cfg = slereg::config_from_json(j);
    cfg.threads = thread_count(threads);
    if (out_dir.empty()) out_dir = cfg.output_path.empty() ? "." : cfg.output_path;
    std::filesystem::create_directories(out_dir);

    const std::string hash = slereg::config_hash(cfg);
    const std::string manifest_path = out_dir + "/manifest.json";
    if (std::filesystem::exists(manifest_path)) {
        const nlohmann::json prev = nlohmann::json::parse(slereg::read_text_file(manifest_path));
        if (prev.contains("config_hash") && prev["config_hash"] != hash)
            throw std::runtime_error("config hash mismatch with existing run in " + out_dir +
                                     " (found " + prev["config_hash"].get<std::string>() +
                                     ", current " + hash + "); refusing to resume");
    }

    std::vector<std::string> outputs;
    nlohmann::json result;
    if (cfg.kind == "derivative_moment" || cfg.kind == "increment_moment") {
        const slereg::MomentTable table = cfg.kind == "derivative_moment"
                                              ? slereg::derivative_moment_scan(cfg)
                                              : slereg::increment_moment_scan(cfg);
        const std::string csv_path = out_dir + "/" + cfg.kind + ".csv";
        slereg::write_text_file(csv_path, "# config_hash=" + hash + "\n" + table.to_csv());
        outputs.push_back(csv_path);
        result = slereg::moment_table_to_json(table);
    } else if (cfg.kind == "besov_finiteness") {
        const slereg::BesovFinitenessReport rep = slereg::besov_finiteness(
            cfg, slereg::BesovParams{cfg.delta, cfg.q}, cfg.epsilon);
        result["kind"] = cfg.kind;
        result["config_hash"] = hash;
        result["mean"] = rep.mean_value;
        result["variance"] = rep.variance;
        result["first_half_mean"] = rep.first_half_mean;
        result["stability_rel_change"] = rep.stability_rel_change;
        result["values"] = rep.values;
    } else if (cfg.kind == "critical_pvar") {
        const auto est = slereg::critical_pvar_estimate(
            slereg::Kappa{cfg.kappa}, cfg.n_traces, cfg.dt, cfg.max_level, cfg.seed, 7,
            cfg.threads);
        result["kind"] = cfg.kind;
        result["config_hash"] = hash;
        result["p_hat"] = est.estimate;
        result["ci"] = {est.ci_lo, est.ci_hi};
        result["flagged_non_monotone"] = est.flagged_non_monotone;
        result["p_grid"] = est.p_grid;
        result["mean_slope"] = est.mean_slope;
    } else if (cfg.kind == "critical_hoelder") {
        // evaluation grid capped at 2^12 points and at the path resolution
        int lvl = 0;
        while ((std::size_t{1} << (lvl + 1)) <= static_cast<std::size_t>(1.0 / cfg.dt) &&
               lvl < 12)
            ++lvl;
        const int hi = std::min(9, lvl - 3);
        const auto est = slereg::critical_hoelder_estimate(
            slereg::Kappa{cfg.kappa}, cfg.n_traces, cfg.epsilon, cfg.seed, cfg.dt, lvl, 4,
            hi, cfg.threads);
        result["kind"] = cfg.kind;
        result["config_hash"] = hash;
        result["alpha_hat"] = est.estimate;
        result["ci"] = {est.ci_lo, est.ci_hi};
    } else {
        throw std::runtime_error("config: unknown $.kind '" + cfg.kind + "'");
    }

    const std::string jsonl_path = out_dir + "/results.jsonl";
    slereg::write_text_file(jsonl_path, result.dump() + "\n");
    outputs.push_back(jsonl_path);
    write_manifest(manifest_path, command_line, slereg::config_to_json(cfg), cfg.seed,
                   started, outputs);
    return 0;
}

std::vector<std::pair<double, double>> parse_pairs(const std::vector<std::string>& specs,
                                                   const char* what) {
    std::vector<std::pair<double, double>> out;
    for (const std::string& s : specs) {
        double a, b;
        if (std::sscanf(s.c_str(), "%lf,%lf", &a, &b) != 2)
            throw CLI::ValidationError(what, "expected 'a,b' but got '" + s + "'");
        out.emplace_back(a, b);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SLE trace regularity toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // exponents
    auto* cmd_exp = app.add_subcommand("exponents", "closed-form exponent table for one kappa");
    double kappa = 2.0;
    double q_at_p = 0.0;
    std::string json_out;
    cmd_exp->add_option("--kappa", kappa, "SLE parameter, > 0")->required();
    cmd_exp->add_option("--q-moment-at-p", q_at_p, "report the moment order Q at this p");
    cmd_exp->add_option("--json", json_out, "also write the table as JSON");

    // regions
    auto* cmd_reg = app.add_subcommand("regions", "admissible-set scan over a kappa range");
    double from = 0.05, to = 16.0;
    int steps = 640;
    std::string reg_csv = "regions.csv", reg_json;
    cmd_reg->add_option("--from", from, "lower kappa")->required();
    cmd_reg->add_option("--to", to, "upper kappa")->required();
    cmd_reg->add_option("--steps", steps, "grid size")->required();
    cmd_reg->add_option("--out", reg_csv, "CSV output path")->required();
    cmd_reg->add_option("--json", reg_json, "also write the table as JSON");

    // simulate
    auto* cmd_sim = app.add_subcommand("simulate", "sample a driving path and its trace");
    double T = 1.0, dt = 1e-4, y_eval = 0.0;
    std::uint64_t seed = 1;
    std::string out_prefix = "trace";
    bool zero = false, binary = false;
    std::size_t stride = 1;
    cmd_sim->add_option("--kappa", kappa, "SLE parameter, > 0");
    cmd_sim->add_option("--T", T, "time horizon");
    cmd_sim->add_option("--dt", dt, "capacity-time step");
    cmd_sim->add_option("--seed", seed, "RNG seed");
    cmd_sim->add_option("--out", out_prefix, "output prefix")->required();
    cmd_sim->add_flag("--zero-driving", zero, "use the zero driving oracle path");
    cmd_sim->add_option("--y-eval", y_eval, "evaluation height (default sqrt(dt))");
    cmd_sim->add_option("--stride", stride, "evaluate every stride-th grid point");
    cmd_sim->add_flag("--binary", binary, "also write the packed binary trace");

    // norms
    auto* cmd_norms = app.add_subcommand("norms", "seminorms of a stored path");
    std::string input, norms_out = "norms.jsonl";
    std::vector<double> pvar_ps, hoelder_alphas;
    std::vector<std::string> besov_specs, window_specs;
    double window_r = 0.0;
    cmd_norms->add_option("--input", input, "trace CSV or .bin file")->required();
    cmd_norms->add_option("--pvar", pvar_ps, "variation indices p >= 1");
    cmd_norms->add_option("--hoelder", hoelder_alphas, "Hoelder exponents in (0,1]");
    std::size_t hoelder_stride = 1;
    cmd_norms->add_option("--hoelder-stride", hoelder_stride,
                          "subsample factor for the pair maximum on long paths");
    cmd_norms->add_option("--besov", besov_specs, "Besov parameters as 'delta,q'");
    cmd_norms->add_option("--window", window_specs, "restrict to time windows 'a,b'");
    cmd_norms->add_option("--window-r", window_r,
                          "validate Besov delta against the window of this r");
    cmd_norms->add_option("--kappa", kappa, "kappa for --window-r validation");
    cmd_norms->add_option("--out", norms_out, "JSON-lines output path");

    // experiment
    auto* cmd_expt = app.add_subcommand("experiment", "run a configured experiment batch");
    std::string config_path, out_dir;
    std::size_t threads = 0;
    cmd_expt->add_option("--config", config_path, "JSON config file")->required();
    cmd_expt->add_option("--out-dir", out_dir, "output directory");
    cmd_expt->add_option("--threads", threads, "parallelism degree (SLE_REG_THREADS overrides)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string command_line = join_args(argc, argv);
    try {
        if (*cmd_exp)
            return run_exponents(kappa,
                                 cmd_exp->count("--q-moment-at-p")
                                     ? std::optional<double>(q_at_p)
                                     : std::nullopt,
                                 json_out);
        if (*cmd_reg) return run_regions(from, to, steps, reg_csv, reg_json, command_line);
        if (*cmd_sim)
            return run_simulate(kappa, T, dt, seed, out_prefix, zero, y_eval, stride, binary,
                                command_line);
        if (*cmd_norms)
            return run_norms(input, pvar_ps, hoelder_alphas, hoelder_stride,
                             parse_pairs(besov_specs, "--besov"),
                             parse_pairs(window_specs, "--window"), window_r, kappa,
                             norms_out, command_line);
        if (*cmd_expt) return run_experiment(config_path, out_dir, threads, command_line);
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
