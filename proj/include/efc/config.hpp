#pragma once
// JSON configuration for the model inputs and the simulation/experiment
// drivers, plus the canonical-digest helper used to stamp outputs.
//
// A config file is one JSON object.  Measure keys (all optional, all may
// coexist):
//   "kingman": w0                          Kingman mass (atom of Lambda at 0)
//   "atoms":   [[x, w], ...]               point atoms of Lambda in (0,1)
//   "density": {"family": ..., ...}        absolutely continuous part:
//       {"family":"uniform",      "c": c}
//       {"family":"power_beta",   "c": c, "beta": beta}         f = c x^-beta
//       {"family":"log_singular", "c": c, "gamma": g, "x0": x0}
//       {"family":"custom_table", "table": [[x, f], ...]}
//   "mu": {"family": ..., ...}             splitting measure:
//       {"family":"none"}
//       {"family":"pmf",       "pmf": [mu(1), mu(2), ...]}
//       {"family":"power",     "b": b, "alpha": a}         mu = b k^{-1-a}
//       {"family":"log",       "b": b, "alpha": a}         mu = b (log k)^a k^{-2}
//       {"family":"geometric", "A": A, "r": r}             mu = A r^k
// Driver keys:
//   "sim":  {"initial_n","horizon_T","ceiling","floor_m","stop_p",
//            "absorb_at_floor","record_path","budget"}
//   "name", "replicas", "seed_root", "workers"
//   "sweep": {"family","alpha","ratios","d","replicas","explosion_start",
//             "explosion_T","ceiling","ladder","cdi_floor","cdi_T"}

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "efc/measures.hpp"
#include "efc/simulate.hpp"

namespace efc::cfg {

using json = nlohmann::json;

// All machine-readable outputs (CSV headers, JSONL rows, verdict objects)
// carry this version so downstream parsers can pin what they accept.
inline constexpr int kSchemaVersion = 1;

// Shortest round-trip decimal form; locale-free and deterministic, so output
// bytes do not depend on the environment.
inline std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error("cannot parse " + path + ": " + e.what());
    }
    if (!j.is_object()) throw std::runtime_error(path + ": top level must be an object");
    return j;
}

namespace detail {

[[noreturn]] inline void bad(const std::string& what) {
    throw std::runtime_error("config error: " + what);
}

inline double num(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) bad(std::string(key) + " must be a number");
    return j.at(key).get<double>();
}

inline double req_num(const json& j, const char* key, const char* ctx) {
    if (!j.contains(key) || !j.at(key).is_number())
        bad(std::string(ctx) + " needs numeric \"" + key + "\"");
    return j.at(key).get<double>();
}

} // namespace detail

// ---------------------------------------------------------------------------
// Density / coalescence measure
// ---------------------------------------------------------------------------

inline measures::Density density_from_json(const json& j) {
    using measures::Density;
    using measures::DensityFamily;
    if (!j.is_object()) detail::bad("\"density\" must be an object");
    const std::string fam = j.value("family", std::string{});
    Density d;
    if (fam == "uniform") {
        d.family = DensityFamily::Uniform;
        d.c = detail::req_num(j, "c", "uniform density");
    } else if (fam == "power_beta") {
        d.family = DensityFamily::Power;
        d.c = detail::req_num(j, "c", "power_beta density");
        d.beta = detail::req_num(j, "beta", "power_beta density");
    } else if (fam == "log_singular") {
        d.family = DensityFamily::LogSingular;
        d.c = detail::req_num(j, "c", "log_singular density");
        d.gamma = detail::req_num(j, "gamma", "log_singular density");
        d.x0 = detail::num(j, "x0", 1.0);
    } else if (fam == "custom_table") {
        if (!j.contains("table") || !j.at("table").is_array())
            detail::bad("custom_table density needs \"table\": [[x, f], ...]");
        std::vector<double> xs, fs;
        for (const auto& row : j.at("table")) {
            if (!row.is_array() || row.size() != 2)
                detail::bad("custom_table rows must be [x, f] pairs");
            xs.push_back(row[0].get<double>());
            fs.push_back(row[1].get<double>());
        }
        return measures::Density::custom_table(std::move(xs), std::move(fs));
    } else {
        detail::bad("unknown density family \"" + fam +
                    "\" (uniform | power_beta | log_singular | custom_table)");
    }
    d.validate();
    return d;
}

inline json density_to_json(const measures::Density& d) {
    using measures::DensityFamily;
    json j;
    switch (d.family) {
        case DensityFamily::None: return json();  // null: no density
        case DensityFamily::Uniform:
            j["family"] = "uniform";
            j["c"] = d.c;
            break;
        case DensityFamily::Power:
            j["family"] = "power_beta";
            j["c"] = d.c;
            j["beta"] = d.beta;
            break;
        case DensityFamily::LogSingular:
            j["family"] = "log_singular";
            j["c"] = d.c;
            j["gamma"] = d.gamma;
            j["x0"] = d.x0;
            break;
        case DensityFamily::CustomTable: {
            j["family"] = "custom_table";
            json rows = json::array();
            for (std::size_t i = 0; i < d.xs.size(); ++i)
                rows.push_back(json::array({d.xs[i], d.fs[i]}));
            j["table"] = std::move(rows);
            break;
        }
    }
    return j;
}

// Reads the measure keys ("kingman", "atoms", "density") from a config
// object; absent keys mean "that part of Lambda is zero".
inline measures::CoalescenceMeasure coalescence_from_json(const json& root) {
    measures::CoalescenceMeasure lam;
    lam.kingman = detail::num(root, "kingman", 0.0);
    if (root.contains("atoms")) {
        if (!root.at("atoms").is_array())
            detail::bad("\"atoms\" must be an array of [x, w] pairs");
        for (const auto& row : root.at("atoms")) {
            if (!row.is_array() || row.size() != 2)
                detail::bad("atoms rows must be [x, w] pairs");
            lam.atoms.push_back({row[0].get<double>(), row[1].get<double>()});
        }
    }
    if (root.contains("density") && !root.at("density").is_null())
        lam.density = density_from_json(root.at("density"));
    lam.validate();
    return lam;
}

inline json coalescence_to_json(const measures::CoalescenceMeasure& lam) {
    json j;
    j["kingman"] = lam.kingman;
    json atoms = json::array();
    for (const auto& a : lam.atoms) atoms.push_back(json::array({a.x, a.w}));
    j["atoms"] = std::move(atoms);
    j["density"] = density_to_json(lam.density);
    return j;
}

// ---------------------------------------------------------------------------
// Splitting measure
// ---------------------------------------------------------------------------

inline measures::SplittingMeasure mu_from_json(const json& j) {
    using measures::SplittingMeasure;
    if (j.is_null()) return SplittingMeasure{};
    if (!j.is_object()) detail::bad("\"mu\" must be an object");
    const std::string fam = j.value("family", std::string{});
    if (fam == "none") return SplittingMeasure{};
    if (fam == "pmf") {
        if (!j.contains("pmf") || !j.at("pmf").is_array())
            detail::bad("pmf mu needs \"pmf\": [mu(1), mu(2), ...]");
        std::vector<double> head;
        for (const auto& v : j.at("pmf")) head.push_back(v.get<double>());
        return SplittingMeasure::from_pmf(std::move(head));
    }
    if (fam == "power")
        return SplittingMeasure::power_tail(detail::req_num(j, "b", "power mu"),
                                            detail::req_num(j, "alpha", "power mu"));
    if (fam == "log")
        return SplittingMeasure::log_tail(detail::req_num(j, "b", "log mu"),
                                          detail::req_num(j, "alpha", "log mu"));
    if (fam == "geometric")
        return SplittingMeasure::geometric(detail::req_num(j, "A", "geometric mu"),
                                           detail::req_num(j, "r", "geometric mu"));
    detail::bad("unknown mu family \"" + fam +
                "\" (none | pmf | power | log | geometric)");
}

inline json mu_to_json(const measures::SplittingMeasure& mu) {
    using measures::TailFamily;
    json j;
    switch (mu.tail()) {
        case TailFamily::None: {
            if (mu.head_end() == 0) {
                j["family"] = "none";
            } else {
                j["family"] = "pmf";
                json pmf = json::array();
                for (long k = 1; k <= mu.head_end(); ++k) pmf.push_back(mu.pmf_at(k));
                j["pmf"] = std::move(pmf);
            }
            break;
        }
        case TailFamily::Power:
            j["family"] = "power";
            j["b"] = mu.tail_b();
            j["alpha"] = mu.tail_alpha();
            break;
        case TailFamily::Log:
            j["family"] = "log";
            j["b"] = mu.tail_b();
            j["alpha"] = mu.tail_alpha();
            break;
        case TailFamily::Geometric:
            j["family"] = "geometric";
            j["A"] = mu.tail_b();
            j["r"] = mu.tail_r();
            break;
    }
    return j;
}

// ---------------------------------------------------------------------------
// Simulation config
// ---------------------------------------------------------------------------

inline sim::SimConfig sim_from_json(const json& j, sim::SimConfig base = {}) {
    if (j.is_null()) return base;
    if (!j.is_object()) detail::bad("\"sim\" must be an object");
    base.initial_n = static_cast<long>(detail::num(j, "initial_n",
                                                   static_cast<double>(base.initial_n)));
    base.horizon_T = detail::num(j, "horizon_T", base.horizon_T);
    base.ceiling = static_cast<long>(detail::num(j, "ceiling",
                                                 static_cast<double>(base.ceiling)));
    base.floor_m = static_cast<long>(detail::num(j, "floor_m",
                                                 static_cast<double>(base.floor_m)));
    base.stop_p = detail::num(j, "stop_p", base.stop_p);
    if (j.contains("absorb_at_floor")) base.absorb_at_floor = j.at("absorb_at_floor").get<bool>();
    if (j.contains("record_path")) base.record_path = j.at("record_path").get<bool>();
    base.budget = static_cast<long long>(
        detail::num(j, "budget", static_cast<double>(base.budget)));
    base.validate();
    return base;
}

inline json sim_to_json(const sim::SimConfig& c) {
    json j;
    j["initial_n"] = c.initial_n;
    j["horizon_T"] = c.horizon_T;
    j["ceiling"] = c.ceiling;
    j["floor_m"] = c.floor_m;
    j["stop_p"] = c.stop_p;
    j["absorb_at_floor"] = c.absorb_at_floor;
    j["record_path"] = c.record_path;
    j["budget"] = c.budget;
    return j;
}

// ---------------------------------------------------------------------------
// Canonical digest: FNV-1a 64 over the sorted-key dump.  Stamped into output
// files so a summary can be matched back to the exact configuration.
// ---------------------------------------------------------------------------

inline std::uint64_t digest(const json& j) {
    const std::string s = j.dump();  // nlohmann::json keeps keys sorted
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string digest_hex(const json& j) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(digest(j)));
    return std::string(buf);
}

} // namespace efc::cfg
