#pragma once

// File formats and run metadata: trace CSV ("t,re,im") and the packed
// binary layout (kappa, dt, n, seed as little-endian 64-bit fields, then
// float64 pairs), seminorm results as JSON lines, region-scan tables as
// CSV/JSON, experiment configs with a stable FNV-1a content hash, and the
// per-run manifest. Machine formats print floats with 17 significant
// digits so values round-trip exactly.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "slereg/experiments.hpp"
#include "slereg/exponents.hpp"
#include "slereg/loewner.hpp"
#include "slereg/regularity.hpp"

namespace slereg {

inline std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// --- trace files ---------------------------------------------------------

inline void write_trace_csv(const TracePath& tr, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "t,re,im\n";
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        out << format_g17(tr.times[i]) << ',' << format_g17(tr.points[i].real()) << ','
            << format_g17(tr.points[i].imag()) << '\n';
    }
    if (!out) throw std::runtime_error("write failed on " + path);
}

inline SampledPath read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> times;
    std::vector<std::complex<double>> pts;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        double t, re, im;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &re, &im) != 3)
            throw std::runtime_error(path + ": malformed row " + std::to_string(row) + ": " +
                                     line);
        times.push_back(t);
        pts.emplace_back(re, im);
    }
    return SampledPath(std::move(times), std::move(pts));
}

namespace detail {

inline void put_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_f64(std::string& buf, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(buf, bits);
}

inline std::uint64_t get_u64(const char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
}

inline double get_f64(const char* p) {
    const std::uint64_t bits = get_u64(p);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace detail

inline void write_trace_binary(const TracePath& tr, const std::string& path) {
    std::string buf;
    buf.reserve(32 + 16 * tr.points.size());
    detail::put_f64(buf, tr.kappa);
    detail::put_f64(buf, tr.dt);
    detail::put_u64(buf, tr.points.size());
    detail::put_u64(buf, tr.seed);
    for (const auto& z : tr.points) {
        detail::put_f64(buf, z.real());
        detail::put_f64(buf, z.imag());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error("write failed on " + path);
}

inline TracePath read_trace_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < 32) throw std::runtime_error(path + ": truncated trace header");
    TracePath tr;
    tr.kappa = detail::get_f64(buf.data());
    tr.dt = detail::get_f64(buf.data() + 8);
    const std::uint64_t n = detail::get_u64(buf.data() + 16);
    tr.seed = detail::get_u64(buf.data() + 24);
    if (buf.size() != 32 + 16 * n) throw std::runtime_error(path + ": truncated trace body");
    tr.times.resize(n);
    tr.points.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        tr.times[i] = tr.dt * static_cast<double>(i);
        tr.points[i] = {detail::get_f64(buf.data() + 32 + 16 * i),
                        detail::get_f64(buf.data() + 32 + 16 * i + 8)};
    }
    return tr;
}

// --- seminorm JSON lines --------------------------------------------------

inline nlohmann::json seminorm_to_json(const SeminormResult& res) {
    nlohmann::json j;
    switch (res.kind) {
        case SeminormKind::pvar:
            j["kind"] = "pvar";
            j["p"] = res.p;
            break;
        case SeminormKind::hoelder:
            j["kind"] = "hoelder";
            j["alpha"] = res.alpha;
            break;
        case SeminormKind::besov:
            j["kind"] = "besov";
            j["delta"] = res.besov.delta;
            j["q"] = res.besov.q;
            break;
    }
    j["value"] = res.value;
    j["window"] = {res.window_lo, res.window_hi};
    j["n_samples"] = res.n_samples;
    j["mesh"] = res.mesh;
    j["excluded_cells"] = res.excluded_cells;
    j["excluded_measure"] = res.excluded_measure;
    j["subsample_stride"] = res.subsample_stride;
    return j;
}

// --- region scan -----------------------------------------------------------

inline std::string region_scan_to_csv(const std::vector<RegionRow>& rows) {
    std::string out = "kappa,set_name,lo,hi\n";
    const auto emit = [&](double kappa, const char* name, const IntervalUnion& set) {
        if (set.is_empty()) {
            out += format_g17(kappa);
            out += ",";
            out += name;
            out += ",,\n";
            return;
        }
        for (const Interval& c : set.components()) {
            out += format_g17(kappa);
            out += ",";
            out += name;
            out += "," + format_g17(c.lo) + "," + format_g17(c.hi) + "\n";
        }
    };
    for (const RegionRow& row : rows) {
        emit(row.kappa, "I", row.set_i);
        emit(row.kappa, "I_J1", row.set_i_j1);
        emit(row.kappa, "I_J2", row.set_i_j2);
        emit(row.kappa, "I_J1_J2", row.set_i_j1_j2);
        out += format_g17(row.kappa);
        out += ",hoelder_maximizer,";
        if (row.hoelder_maximizer) {
            out += format_g17(*row.hoelder_maximizer) + "," + format_g17(*row.hoelder_maximizer);
        } else {
            out += ",";
        }
        out += "\n";
    }
    return out;
}

inline nlohmann::json interval_union_to_json(const IntervalUnion& set) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Interval& c : set.components()) {
        // JSON has no infinity literal; bounded sets stay numeric
        nlohmann::json lo = std::isfinite(c.lo) ? nlohmann::json(c.lo) : nlohmann::json("-inf");
        nlohmann::json hi = std::isfinite(c.hi) ? nlohmann::json(c.hi) : nlohmann::json("inf");
        arr.push_back({{"lo", lo}, {"hi", hi}});
    }
    return arr;
}

inline nlohmann::json region_scan_to_json(const std::vector<RegionRow>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const RegionRow& row : rows) {
        nlohmann::json j;
        j["kappa"] = row.kappa;
        j["I"] = interval_union_to_json(row.set_i);
        j["I_J1"] = interval_union_to_json(row.set_i_j1);
        j["I_J2"] = interval_union_to_json(row.set_i_j2);
        j["I_J1_J2"] = interval_union_to_json(row.set_i_j1_j2);
        if (row.hoelder_maximizer)
            j["hoelder_maximizer"] = *row.hoelder_maximizer;
        else
            j["hoelder_maximizer"] = nullptr;
        out.push_back(std::move(j));
    }
    return out;
}

// --- experiment config ------------------------------------------------------

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["kind"] = cfg.kind;
    j["kappa"] = cfg.kappa;
    j["n_traces"] = cfg.n_traces;
    j["dt"] = cfg.dt;
    j["seed"] = cfg.seed;
    j["r"] = cfg.r;
    j["r_tilde"] = cfg.r_tilde;
    j["grid"] = cfg.grid;
    j["output_path"] = cfg.output_path;
    j["delta"] = cfg.delta;
    j["q"] = cfg.q;
    j["epsilon"] = cfg.epsilon;
    j["max_level"] = cfg.max_level;
    j["grid_n"] = cfg.grid_n;
    return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object at $");
    const auto need = [&](const char* key) -> const nlohmann::json& {
        if (!j.contains(key))
            throw std::invalid_argument(std::string("config: missing field $.") + key);
        return j.at(key);
    };
    ExperimentConfig cfg;
    if (j.contains("schema_version") && j["schema_version"].get<int>() != 1)
        throw std::invalid_argument("config: unsupported $.schema_version");
    cfg.kind = need("kind").get<std::string>();
    cfg.kappa = need("kappa").get<double>();
    cfg.n_traces = need("n_traces").get<int>();
    cfg.dt = need("dt").get<double>();
    cfg.seed = need("seed").get<std::uint64_t>();
    cfg.r = j.value("r", 1.0);
    cfg.r_tilde = j.value("r_tilde", 0.0);
    if (j.contains("grid")) {
        for (const auto& g : j["grid"]) {
            if (!g.is_array() || g.size() != 2)
                throw std::invalid_argument("config: $.grid entries must be [a, b] pairs");
            cfg.grid.push_back({g[0].get<double>(), g[1].get<double>()});
        }
    }
    cfg.output_path = j.value("output_path", std::string{});
    cfg.delta = j.value("delta", 0.0);
    cfg.q = j.value("q", 0.0);
    cfg.epsilon = j.value("epsilon", 0.0);
    cfg.max_level = j.value("max_level", 0);
    cfg.grid_n = j.value("grid_n", 1024);
    return cfg;
}

// FNV-1a 64 over the canonical (sorted-key) JSON dump
inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string config_hash(const ExperimentConfig& cfg) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config_to_json(cfg).dump())));
    return buf;
}

// --- moment table JSON -------------------------------------------------------

inline nlohmann::json moment_table_to_json(const MomentTable& table) {
    nlohmann::json j;
    j["kind"] = table.kind;
    j["config"] = config_to_json(table.config);
    j["config_hash"] = config_hash(table.config);
    j["fitted_c"] = table.fitted_c;
    j["notes"] = table.notes;
    j["rows"] = nlohmann::json::array();
    for (const MomentRow& row : table.rows) {
        j["rows"].push_back({{"s", row.a},
                             {table.second_column, row.b},
                             {"mean", row.mean},
                             {"std_error", row.std_error},
                             {"median_of_means", row.median_means},
                             {"envelope", row.envelope},
                             {"flagged", row.flagged},
                             {"n", row.n},
                             {"unreliable", row.unreliable}});
    }
    j["fits"] = nlohmann::json::array();
    for (const ExponentFit& f : table.fits)
        j["fits"].push_back({{"s", f.fixed_abscissa},
                             {"slope", f.slope},
                             {"intercept", f.intercept},
                             {"points", f.points}});
    return j;
}

// --- run manifest -------------------------------------------------------------

struct RunManifest {
    std::string command_line;
    std::string config_hash;
    std::string tool_version;
    std::uint64_t seed = 0;
    std::string started_at;
    std::string finished_at;
    std::vector<std::string> outputs;
    nlohmann::json embedded_config;
};

inline std::string iso8601_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

inline nlohmann::json manifest_to_json(const RunManifest& m) {
    nlohmann::json j;
    j["command_line"] = m.command_line;
    j["config_hash"] = m.config_hash;
    j["tool_version"] = m.tool_version;
    j["seed"] = m.seed;
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
    j["outputs"] = m.outputs;
    j["config"] = m.embedded_config;
    return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed on " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace slereg
