// efc — command-line front end for the EFC boundary toolkit.
//
// Subcommands:
//   rates     tables of the rate functionals Phi, Psi, ell and the theta bracket
//   classify  boundary verdict (exit / entrance / regular) with the fired-rule trail
//   analyze   Lyapunov drift criteria: explosion / non-explosion certificates
//   simulate  Monte Carlo experiment: per-replica outcomes (JSONL) + summary (CSV)
//   sweep     phase-diagram sweep: classifier labels vs Monte Carlo evidence
//   selftest  deterministic self checks (quadrature, recursions, samplers)
//
// Global flags: --config <file> --seed <u64> --out <dir> --workers <n>
//               --format csv|json
//
// All machine-readable output carries a schema_version field.  Summary output
// is byte-deterministic for a fixed config and seed, independent of --workers.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "efc/config.hpp"
#include "efc/harness.hpp"

namespace {

using efc::cfg::fmt_double;
using efc::cfg::json;

// ---------------------------------------------------------------------------
// Shared CLI state.
// ---------------------------------------------------------------------------

struct Common {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    int workers = 1;
    std::string format = "csv";
    CLI::Option* seed_opt = nullptr;
    CLI::Option* out_opt = nullptr;
    CLI::Option* workers_opt = nullptr;

    bool has_seed() const { return seed_opt && seed_opt->count() > 0; }
    bool has_out() const { return out_opt && out_opt->count() > 0; }
    bool has_workers() const { return workers_opt && workers_opt->count() > 0; }
};

json load_config(const Common& c, const char* who) {
    if (c.config_path.empty())
        throw std::invalid_argument(std::string(who) +
                                    " requires --config <file>");
    return efc::cfg::load_json_file(c.config_path);
}

std::ofstream open_out_file(const Common& c, const std::string& name) {
    namespace fs = std::filesystem;
    fs::path dir = c.out_dir.empty() ? fs::path(".") : fs::path(c.out_dir);
    fs::create_directories(dir);
    fs::path p = dir / name;
    std::ofstream os(p);
    if (!os)
        throw std::runtime_error("cannot open output file: " + p.string());
    return os;
}

std::string out_path(const Common& c, const std::string& name) {
    namespace fs = std::filesystem;
    fs::path dir = c.out_dir.empty() ? fs::path(".") : fs::path(c.out_dir);
    return (dir / name).string();
}

// Quote a CSV field if it contains a delimiter, quote, or newline.
std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += "\"\"";
        else out += ch;
    }
    out += "\"";
    return out;
}

// ---------------------------------------------------------------------------
// JSON serialization of the report types.
// ---------------------------------------------------------------------------

const char* drift_call_str(efc::ga::DriftCall c) {
    switch (c) {
        case efc::ga::DriftCall::Explodes: return "explodes";
        case efc::ga::DriftCall::NonExplosive: return "non_explosive";
        default: return "inconclusive";
    }
}

json drift_verdict_to_json(const efc::ga::DriftVerdict& v) {
    json cert;
    cert["path"] = v.certificate;
    cert["a"] = v.a;
    cert["margin"] = v.margin;
    cert["grid"] = json::array({v.n_lo, v.n_hi});
    cert["growth_floor"] = v.g.valid() ? json(v.g.describe()) : json(nullptr);
    json out;
    out["verdict"] = drift_call_str(v.call);
    out["certificate"] = cert;
    out["worst_ratio"] = v.worst_ratio;
    out["floor_slack"] = v.floor_slack;
    out["detail"] = v.detail;
    return out;
}

json boundary_verdict_to_json(const efc::classify::BoundaryVerdict& v) {
    json fired = json::array();
    for (const auto& f : v.fired)
        fired.push_back(json{{"id", f.id}, {"params", f.params}});
    json out;
    out["schema_version"] = efc::cfg::kSchemaVersion;
    out["label"] = efc::classify::to_string(v.label);
    out["explodes"] = efc::classify::to_string(v.explodes);
    out["comes_down_from_infinity"] = efc::classify::to_string(v.comes_down);
    out["fired"] = fired;
    out["notes"] = v.notes;
    return out;
}

json theta_to_json(const efc::rates::ThetaEstimate& th) {
    json out;
    out["lo"] = th.lo;
    out["hi"] = th.hi;
    out["converged"] = th.converged;
    out["n_used"] = th.n_used;
    out["note"] = th.note;
    return out;
}

json selftest_to_json(const efc::harness::SelfTestReport& rep) {
    json checks = json::array();
    for (const auto& c : rep.checks) {
        checks.push_back(json{{"name", c.name},
                              {"pass", c.pass},
                              {"marginal", c.marginal},
                              {"measured", c.measured},
                              {"tol", c.tol},
                              {"detail", c.detail}});
    }
    json out;
    out["schema_version"] = efc::cfg::kSchemaVersion;
    out["checks"] = checks;
    out["all_pass"] = rep.all_pass;
    out["tighten"] = rep.tighten;
    return out;
}

// ---------------------------------------------------------------------------
// rates: Phi / Psi / ell / total-rate table, the I(alpha) identity table,
// and the theta bracket.  CSV tables to stdout (sections marked with a
// `# table:` comment) or separate files under --out; single document in JSON.
// ---------------------------------------------------------------------------

struct RatesArgs {
    double n_lo = 2.0;
    double n_hi = 1e6;
    int per_decade = 8;
    double theta_n_max = 1e6;
};

int cmd_rates(const Common& c, const RatesArgs& a) {
    const json root = load_config(c, "rates");
    const auto lam = efc::cfg::coalescence_from_json(root);
    const auto mu = efc::cfg::mu_from_json(
        root.contains("mu") ? root["mu"] : json(nullptr));

    if (!(a.n_lo >= 2.0) || !(a.n_hi >= a.n_lo) || a.per_decade < 1)
        throw std::invalid_argument("rates: need 2 <= n-lo <= n-hi, per-decade >= 1");

    // main rate table over a log grid
    std::vector<double> ns;
    const double r = std::pow(10.0, 1.0 / a.per_decade);
    for (double n = a.n_lo; n <= a.n_hi * (1.0 + 1e-12); n *= r) ns.push_back(n);
    if (ns.empty() || ns.back() < a.n_hi * (1.0 - 1e-12)) ns.push_back(a.n_hi);

    struct RateRow { double n, phi, psi, ell, total; };
    std::vector<RateRow> rows;
    rows.reserve(ns.size());
    for (double n : ns) {
        rows.push_back({n, efc::rates::phi(lam, n), efc::rates::psi(lam, n),
                        mu.ell(n), efc::rates::total_coalescence_rate(lam, n)});
    }

    // I(alpha) identity table: quadrature of the log kernel against the
    // closed form pi / (alpha sin(pi alpha))
    struct IRow { double alpha, closed, quad, diff; };
    std::vector<IRow> irows;
    for (int i = 1; i <= 9; ++i) {
        const double al = 0.1 * i;
        const double closed = efc::sf::big_I(al);
        const double quad = efc::sf::big_I_quad(al);
        irows.push_back({al, closed, quad, std::fabs(quad - closed)});
    }

    const efc::rates::ThetaEstimate th =
        efc::rates::theta_estimates(lam, mu, a.theta_n_max);

    const std::string rates_hdr =
        "schema_version,n,phi,psi,ell,total_coalescence_rate";
    const std::string i_hdr =
        "schema_version,alpha,big_i_closed,big_i_quadrature,abs_diff";
    const std::string theta_hdr =
        "schema_version,theta_lo,theta_hi,converged,n_used,note";

    auto write_rates_csv = [&](std::ostream& os) {
        os << rates_hdr << "\n";
        for (const auto& w : rows)
            os << efc::cfg::kSchemaVersion << ',' << fmt_double(w.n) << ','
               << fmt_double(w.phi) << ',' << fmt_double(w.psi) << ','
               << fmt_double(w.ell) << ',' << fmt_double(w.total) << "\n";
    };
    auto write_i_csv = [&](std::ostream& os) {
        os << i_hdr << "\n";
        for (const auto& w : irows)
            os << efc::cfg::kSchemaVersion << ',' << fmt_double(w.alpha) << ','
               << fmt_double(w.closed) << ',' << fmt_double(w.quad) << ','
               << fmt_double(w.diff) << "\n";
    };
    auto write_theta_csv = [&](std::ostream& os) {
        os << theta_hdr << "\n";
        os << efc::cfg::kSchemaVersion << ',' << fmt_double(th.lo) << ','
           << fmt_double(th.hi) << ',' << (th.converged ? "true" : "false")
           << ',' << fmt_double(th.n_used) << ',' << csv_quote(th.note) << "\n";
    };

    if (c.format == "json") {
        json doc;
        doc["schema_version"] = efc::cfg::kSchemaVersion;
        json jr = json::array();
        for (const auto& w : rows)
            jr.push_back(json{{"n", w.n},
                              {"phi", w.phi},
                              {"psi", w.psi},
                              {"ell", w.ell},
                              {"total_coalescence_rate", w.total}});
        json ji = json::array();
        for (const auto& w : irows)
            ji.push_back(json{{"alpha", w.alpha},
                              {"big_i_closed", w.closed},
                              {"big_i_quadrature", w.quad},
                              {"abs_diff", w.diff}});
        doc["rates"] = jr;
        doc["i_alpha"] = ji;
        doc["theta"] = theta_to_json(th);
        const std::string text = doc.dump(2) + "\n";
        std::cout << text;
        if (c.has_out()) {
            auto os = open_out_file(c, "rates.json");
            os << text;
            std::cerr << "wrote " << out_path(c, "rates.json") << "\n";
        }
        return 0;
    }

    std::cout << "# table: rates\n";
    write_rates_csv(std::cout);
    std::cout << "\n# table: i_alpha\n";
    write_i_csv(std::cout);
    std::cout << "\n# table: theta\n";
    write_theta_csv(std::cout);
    if (c.has_out()) {
        { auto os = open_out_file(c, "rates.csv"); write_rates_csv(os); }
        { auto os = open_out_file(c, "i_alpha.csv"); write_i_csv(os); }
        { auto os = open_out_file(c, "theta.csv"); write_theta_csv(os); }
        std::cerr << "wrote " << out_path(c, "rates.csv") << ", "
                  << out_path(c, "i_alpha.csv") << ", "
                  << out_path(c, "theta.csv") << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// classify: boundary verdict from a measure config, or from a
// `--regular key=value,...` spec that goes straight to the phase diagram.
// ---------------------------------------------------------------------------

efc::classify::RegularVariationSpec parse_regular_spec(const std::string& text) {
    using Spec = efc::classify::RegularVariationSpec;
    Spec spec;
    spec.settled_lower_critical = true;  // canonical product family by default
    bool have_alpha = false, have_beta = false, have_b = false, have_d = false;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--regular entries must be key=value: " + item);
        const std::string key = item.substr(0, eq);
        const std::string val = item.substr(eq + 1);
        if (key == "family") {
            if (val == "poly") {
                spec.coal = Spec::Family::Poly;
                spec.frag = Spec::Family::Poly;
            } else if (val == "log") {
                spec.coal = Spec::Family::Log;
                spec.frag = Spec::Family::Log;
            } else {
                throw std::invalid_argument("--regular family must be poly or log");
            }
        } else if (key == "alpha") {
            spec.alpha = std::stod(val);
            have_alpha = true;
        } else if (key == "beta") {
            spec.beta = std::stod(val);
            have_beta = true;
        } else if (key == "b") {
            spec.b = std::stod(val);
            have_b = true;
        } else if (key == "d") {
            spec.d = std::stod(val);
            have_d = true;
        } else if (key == "settled") {
            spec.settled_lower_critical = std::stod(val) != 0.0;
        } else {
            throw std::invalid_argument("--regular: unknown key " + key);
        }
    }
    if (!(have_alpha && have_beta && have_b && have_d))
        throw std::invalid_argument(
            "--regular needs alpha=, beta=, b=, d= (and optional family=, settled=)");
    return spec;
}

int cmd_classify(const Common& c, const std::string& regular_text) {
    efc::classify::BoundaryVerdict v;
    if (!regular_text.empty()) {
        v = efc::classify::classify_regular(parse_regular_spec(regular_text));
    } else {
        const json root = load_config(c, "classify (without --regular)");
        const auto lam = efc::cfg::coalescence_from_json(root);
        const auto mu = efc::cfg::mu_from_json(
            root.contains("mu") ? root["mu"] : json(nullptr));
        v = efc::classify::classify_auto(lam, mu);
    }
    const std::string text = boundary_verdict_to_json(v).dump(2) + "\n";
    std::cout << text;
    if (c.has_out()) {
        auto os = open_out_file(c, "classify.json");
        os << text;
        std::cerr << "wrote " << out_path(c, "classify.json") << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// analyze: drift (Lyapunov) criteria for explosion and non-explosion, the
// theta bracket, and the phase-diagram reading when the pair is regularly
// varying.  Emits one JSON verdict document; with --out also writes a drift
// profile CSV referenced from the document.
// ---------------------------------------------------------------------------

struct AnalyzeArgs {
    double n_eval_max = 1e6;
    double margin = 0.05;
    double p_stop = 0.01;
};

int cmd_analyze(const Common& c, const AnalyzeArgs& a) {
    const json root = load_config(c, "analyze");
    const auto lam = efc::cfg::coalescence_from_json(root);
    const auto mu = efc::cfg::mu_from_json(
        root.contains("mu") ? root["mu"] : json(nullptr));

    efc::ga::CriterionOptions opt;
    opt.margin = a.margin;
    opt.n_eval_max = a.n_eval_max;
    opt.p_stop = a.p_stop;

    const auto grid = efc::rates::NodeGrid::build(lam, opt.n_eval_max);
    const auto vexp = efc::ga::explosion_criterion(lam, mu, grid, opt);
    const auto vnon = efc::ga::nonexplosion_criterion(lam, mu, grid, opt);

    const bool says_exp = vexp.call == efc::ga::DriftCall::Explodes;
    const bool says_non = vnon.call == efc::ga::DriftCall::NonExplosive;
    std::string combined = "inconclusive";
    if (says_exp && says_non) combined = "contradiction";
    else if (says_exp) combined = "explodes";
    else if (says_non) combined = "non_explosive";

    json doc;
    doc["schema_version"] = efc::cfg::kSchemaVersion;
    doc["verdict"] = combined;
    doc["explosion"] = drift_verdict_to_json(vexp);
    doc["nonexplosion"] = drift_verdict_to_json(vnon);
    doc["theta"] = theta_to_json(
        efc::rates::theta_estimates(lam, mu, std::min(a.n_eval_max, 1e6)));

    const auto ex = efc::classify::regular_spec_from(lam, mu);
    if (ex.ok) {
        const auto pd = efc::classify::classify_regular(ex.spec);
        doc["phase_diagram"] = boundary_verdict_to_json(pd);
        doc["phase_diagram"].erase("schema_version");
    } else {
        doc["phase_diagram"] = nullptr;
        if (!ex.why.empty()) doc["phase_diagram_note"] = ex.why;
    }

    // drift profile: G_a legs along the evaluation grid at the certified a
    // (or a generic diagnostic exponent when nothing concluded)
    json profiles;
    profiles["drift_profile"] = nullptr;
    if (c.has_out()) {
        double a_prof = 1.5;
        if (says_exp && vexp.a > 1.0) a_prof = vexp.a;
        else if (says_non && vnon.a > 0.0 && vnon.a < 1.0) a_prof = vnon.a;
        std::string note;
        std::ostringstream body;
        body << "schema_version,n,a,ga_frag,ga_coal,ga_coal_stopped,ga_total,floor\n";
        try {
            const double lo = std::max(2.0, opt.n_lo);
            const double step = std::pow(10.0, 1.0 / opt.per_decade);
            for (double n = lo; n <= opt.n_eval_max * (1.0 + 1e-12); n *= step) {
                const double gf = efc::ga::ga_frag(mu, a_prof, n);
                const double gc = efc::ga::ga_coal(lam, grid, a_prof, n);
                const double gs = a_prof > 1.0
                    ? efc::ga::ga_coal_stopped(lam, grid, a_prof, opt.p_stop, n)
                    : gc;
                const double floor = (says_exp && vexp.g.valid())
                    ? vexp.g.eval(std::log(n)) * std::log(n)
                    : std::numeric_limits<double>::quiet_NaN();
                body << efc::cfg::kSchemaVersion << ',' << fmt_double(n) << ','
                     << fmt_double(a_prof) << ',' << fmt_double(gf) << ','
                     << fmt_double(gc) << ',' << fmt_double(gs) << ','
                     << fmt_double(gf + gc) << ','
                     << (std::isnan(floor) ? std::string() : fmt_double(floor))
                     << "\n";
            }
            auto os = open_out_file(c, "analyze_profile.csv");
            os << body.str();
            profiles["drift_profile"] = out_path(c, "analyze_profile.csv");
            std::cerr << "wrote " << out_path(c, "analyze_profile.csv") << "\n";
        } catch (const std::exception& e) {
            profiles["drift_profile"] = nullptr;
            doc["profile_note"] =
                std::string("drift profile unavailable: ") + e.what();
        }
    }
    doc["profiles"] = profiles;

    const std::string text = doc.dump(2) + "\n";
    std::cout << text;
    if (c.has_out()) {
        auto os = open_out_file(c, "analyze.json");
        os << text;
        std::cerr << "wrote " << out_path(c, "analyze.json") << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// simulate: one Monte Carlo experiment from the config.  Writes
// <name>_outcomes.jsonl and <name>_summary.csv into --out (default: cwd),
// prints the summary to stdout in --format.
// ---------------------------------------------------------------------------

int cmd_simulate(const Common& c) {
    const json root = load_config(c, "simulate");
    efc::harness::ExperimentConfig ec;
    ec.name = root.value("name", std::string("experiment"));
    ec.lam = efc::cfg::coalescence_from_json(root);
    ec.mu = efc::cfg::mu_from_json(root.contains("mu") ? root["mu"] : json(nullptr));
    ec.sim = efc::cfg::sim_from_json(
        root.contains("sim") ? root["sim"] : json::object(), ec.sim);
    ec.replicas =
        static_cast<long>(root.value("replicas", static_cast<std::int64_t>(ec.replicas)));
    ec.seed_root = root.value("seed_root", ec.seed_root);
    ec.workers =
        static_cast<int>(root.value("workers", static_cast<std::int64_t>(ec.workers)));
    ec.max_failure_fraction =
        root.value("max_failure_fraction", ec.max_failure_fraction);
    if (c.has_seed()) ec.seed_root = c.seed;
    if (c.has_workers()) ec.workers = c.workers;

    const auto rep = efc::harness::run_experiment(ec);

    {
        auto os = open_out_file(c, ec.name + "_outcomes.jsonl");
        efc::harness::write_outcomes_jsonl(os, rep);
    }
    {
        auto os = open_out_file(c, ec.name + "_summary.csv");
        efc::harness::write_summary_csv(os, rep);
    }
    std::cerr << "wrote " << out_path(c, ec.name + "_outcomes.jsonl") << " and "
              << out_path(c, ec.name + "_summary.csv") << "\n";

    if (c.format == "json") {
        std::cout << efc::harness::report_to_json(rep).dump(2) << "\n";
    } else {
        efc::harness::write_summary_csv(std::cout, rep);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// sweep: phase-diagram sweep from the config's "sweep" object.
// ---------------------------------------------------------------------------

efc::harness::SweepSpec sweep_from_json(const json& j) {
    efc::harness::SweepSpec s;
    s.family = j.value("family", s.family);
    s.alpha = j.value("alpha", s.alpha);
    if (j.contains("ratios")) s.ratios = j["ratios"].get<std::vector<double>>();
    s.d = j.value("d", s.d);
    s.replicas =
        static_cast<long>(j.value("replicas", static_cast<std::int64_t>(s.replicas)));
    s.seed_root = j.value("seed_root", s.seed_root);
    s.workers = static_cast<int>(j.value("workers", static_cast<std::int64_t>(s.workers)));
    s.explosion_start = static_cast<long>(
        j.value("explosion_start", static_cast<std::int64_t>(s.explosion_start)));
    s.explosion_T = j.value("explosion_T", s.explosion_T);
    s.ceiling =
        static_cast<long>(j.value("ceiling", static_cast<std::int64_t>(s.ceiling)));
    if (j.contains("ladder")) s.ladder = j["ladder"].get<std::vector<long>>();
    s.cdi_floor =
        static_cast<long>(j.value("cdi_floor", static_cast<std::int64_t>(s.cdi_floor)));
    s.cdi_T = j.value("cdi_T", s.cdi_T);
    return s;
}

int cmd_sweep(const Common& c) {
    const json root = load_config(c, "sweep");
    if (!root.contains("sweep"))
        throw std::invalid_argument("sweep: config needs a \"sweep\" object");
    efc::harness::SweepSpec spec = sweep_from_json(root["sweep"]);
    if (c.has_seed()) spec.seed_root = c.seed;
    if (c.has_workers()) spec.workers = c.workers;

    const auto res = efc::harness::sweep_phase_diagram(spec);

    if (c.has_out()) {
        { auto os = open_out_file(c, "sweep.csv");
          efc::harness::write_sweep_csv(os, res); }
        { auto os = open_out_file(c, "sweep.json");
          os << efc::harness::sweep_to_json(res).dump(2) << "\n"; }
        std::cerr << "wrote " << out_path(c, "sweep.csv") << " and "
                  << out_path(c, "sweep.json") << "\n";
    }
    if (c.format == "json") {
        std::cout << efc::harness::sweep_to_json(res).dump(2) << "\n";
    } else {
        efc::harness::write_sweep_csv(std::cout, res);
    }
    std::cerr << "concordance: " << fmt_double(res.concordance) << " over "
              << res.scored_cells << " scored cells\n";
    for (const auto& n : res.notes) std::cerr << "note: " << n << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// selftest
// ---------------------------------------------------------------------------

int cmd_selftest(const Common& c, bool fault_injection, double tighten) {
    efc::harness::SelfTestOptions opt;
    opt.fault_injection = fault_injection;
    if (tighten > 1.0) opt.tighten = tighten;
    const auto rep = efc::harness::selftest(opt);
    if (c.format == "json") {
        std::cout << selftest_to_json(rep).dump(2) << "\n";
    } else {
        efc::harness::print_selftest(std::cout, rep);
    }
    if (c.has_out()) {
        auto os = open_out_file(c, "selftest.json");
        os << selftest_to_json(rep).dump(2) << "\n";
        std::cerr << "wrote " << out_path(c, "selftest.json") << "\n";
    }
    return rep.all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "efc — boundary classification and Monte Carlo toolkit for\n"
        "exchangeable fragmentation-coagulation block-counting chains"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may appear after the subcommand name

    Common c;
    app.add_option("--config", c.config_path, "JSON config file (measures, sim, sweep)");
    c.seed_opt = app.add_option("--seed", c.seed, "override the seed root");
    c.out_opt = app.add_option("--out", c.out_dir, "output directory for report files");
    c.workers_opt =
        app.add_option("--workers", c.workers, "worker threads (deterministic reduction)")
            ->check(CLI::PositiveNumber);
    app.add_option("--format", c.format, "stdout format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    RatesArgs ra;
    auto* sc_rates = app.add_subcommand(
        "rates", "rate functional tables: Phi, Psi, ell, I(alpha), theta bracket");
    sc_rates->add_option("--n-lo", ra.n_lo, "smallest n in the table (>= 2)");
    sc_rates->add_option("--n-hi", ra.n_hi, "largest n in the table");
    sc_rates->add_option("--per-decade", ra.per_decade, "grid points per decade");
    sc_rates->add_option("--theta-n-max", ra.theta_n_max,
                         "largest n for the theta bracket");

    std::string regular_text;
    auto* sc_classify = app.add_subcommand(
        "classify", "boundary verdict with the fired-rule trail");
    sc_classify->add_option(
        "--regular", regular_text,
        "phase-diagram spec alpha=..,beta=..,b=..,d=..[,family=poly|log][,settled=0|1] "
        "(bypasses --config)");

    AnalyzeArgs aa;
    auto* sc_analyze = app.add_subcommand(
        "analyze", "drift criteria for explosion / non-explosion (JSON verdict)");
    sc_analyze->add_option("--n-eval-max", aa.n_eval_max,
                           "top of the drift evaluation window");
    sc_analyze->add_option("--margin", aa.margin, "dominance margin");
    sc_analyze->add_option("--p-stop", aa.p_stop,
                           "merge cap fraction for the stopped down-drift");

    auto* sc_simulate = app.add_subcommand(
        "simulate", "Monte Carlo experiment: outcomes JSONL + summary CSV");

    auto* sc_sweep = app.add_subcommand(
        "sweep", "phase-diagram sweep: classifier labels vs Monte Carlo evidence");

    bool fault_injection = false;
    double tighten = 0.0;
    auto* sc_selftest = app.add_subcommand(
        "selftest", "deterministic self checks (exit 2 on failure)");
    sc_selftest->add_flag("--fault-injection", fault_injection,
                          "perturb one merge rate and require detection");
    sc_selftest->add_option("--tighten", tighten,
                            "re-check tolerances tightened by this factor");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sc_rates->parsed()) return cmd_rates(c, ra);
        if (sc_classify->parsed()) return cmd_classify(c, regular_text);
        if (sc_analyze->parsed()) return cmd_analyze(c, aa);
        if (sc_simulate->parsed()) return cmd_simulate(c);
        if (sc_sweep->parsed()) return cmd_sweep(c);
        if (sc_selftest->parsed()) return cmd_selftest(c, fault_injection, tighten);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
