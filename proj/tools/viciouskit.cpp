// viciouskit command-line front end.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "viciouskit/viciouskit.hpp"

namespace vk = viciouskit;
using nlohmann::ordered_json;

namespace {

constexpr int kSchemaVersion = 1;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <typename T>
std::vector<T> parse_list(const std::string& s, const char* what) {
    std::vector<T> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        try {
            if constexpr (std::is_same_v<T, double>)
                out.push_back(std::stod(item, &used));
            else
                out.push_back(static_cast<T>(std::stoll(item, &used)));
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw UsageError(std::string("cannot parse ") + what + " '" + s + "'");
    }
    return out;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Shared flags.
struct Options {
    int n = 2;
    bool wall = false;
    double horizon = std::numeric_limits<double>::infinity();
    double time = 1;
    double scale = 16;
    std::size_t samples = 1000;
    double step = 1e-3;
    std::uint64_t seed = 1;
    std::size_t streams = 1;
    std::size_t threads = 1;
    std::string out;
    std::string format = "json";
};

void add_common(CLI::App* app, Options& o) {
    app->add_option("--n", o.n, "number of walkers")->check(CLI::Range(1, 64));
    app->add_flag("--wall", o.wall, "walkers confined to the half-line (wall at 0)");
    app->add_option("--horizon", o.horizon, "time horizon T (omit for the T = infinity family)")
        ->check(CLI::PositiveNumber);
    app->add_option("--time", o.time, "time t")->check(CLI::PositiveNumber);
    app->add_option("--scale", o.scale, "lattice scale L")->check(CLI::Range(1.0, 1e6));
    app->add_option("--samples", o.samples, "number of samples")->check(CLI::Range(std::size_t{1}, std::size_t{1} << 40));
    app->add_option("--step", o.step, "SDE / Monte Carlo time step")->check(CLI::PositiveNumber);
    app->add_option("--seed", o.seed, "random seed");
    app->add_option("--streams", o.streams, "independent random streams")->check(CLI::Range(std::size_t{1}, std::size_t{4096}));
    app->add_option("--threads", o.threads, "worker threads (results do not depend on it)")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1024}));
    app->add_option("--out", o.out, "write the output to this file instead of stdout");
    app->add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json"}));
}

// A command's result: a JSON summary, an optional CSV table and a verdict.
struct Output {
    ordered_json summary = ordered_json::object();
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    bool pass = true;
};

void write_csv(std::ostream& os, const Output& r) {
    if (r.header.empty()) {
        os << "key,value\n";
        for (const auto& [k, v] : r.summary.items())
            if (!v.is_structured()) os << k << ',' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
        return;
    }
    for (std::size_t i = 0; i < r.header.size(); ++i) os << (i ? "," : "") << r.header[i];
    os << '\n';
    for (const auto& row : r.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << '\n';
    }
}

void emit(const Options& o, const std::string& command, Output r) {
    ordered_json doc = ordered_json::object();
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = command;
    doc["pass"] = r.pass;
    for (auto& [k, v] : r.summary.items()) doc[k] = v;
    std::ofstream file;
    if (!o.out.empty()) {
        file.open(o.out, std::ios::binary);
        if (!file) throw std::runtime_error("cannot open output file " + o.out);
    }
    std::ostream& os = o.out.empty() ? std::cout : file;
    if (o.format == "csv")
        write_csv(os, r);
    else
        os << doc.dump(2) << '\n';
}

ordered_json report_json(const vk::StatReport& r) {
    ordered_json j;
    j["test_name"] = r.test_name;
    j["statistic"] = r.statistic;
    j["critical_value"] = r.critical_value;
    j["n_samples"] = r.n_samples;
    j["verdict"] = r.verdict();
    j["metadata"] = r.metadata;
    return j;
}

void add_report_rows(Output& out, int criterion, const std::string& check, const std::vector<vk::StatReport>& reps) {
    out.header = {"criterion", "check", "test", "statistic", "critical_value", "n_samples", "verdict"};
    for (const auto& r : reps)
        out.rows.push_back({std::to_string(criterion), "\"" + check + "\"", "\"" + r.test_name + "\"", num(r.statistic),
                            num(r.critical_value), std::to_string(r.n_samples), r.verdict()});
}

vk::ModelSpec model_spec(const Options& o) { return {o.n, o.horizon, o.wall}; }

std::vector<double> default_point(int n, bool wall) {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = wall ? i + 1.0 : i - 0.5 * (n - 1);
    return x;
}

vk::LatticeConfig lattice_start(const std::string& s, const Options& o) {
    if (s.empty()) return vk::LatticeConfig::packed(static_cast<std::size_t>(o.n), o.wall);
    auto p = parse_list<long long>(s, "lattice start");
    if (p.size() != static_cast<std::size_t>(o.n)) throw UsageError("--start needs exactly --n positions");
    return vk::LatticeConfig(std::move(p), o.wall);
}

vk::ChamberPoint chamber_point(const std::string& s, const Options& o, const char* what) {
    auto p = s.empty() ? default_point(o.n, o.wall) : parse_list<double>(s, what);
    if (p.size() != static_cast<std::size_t>(o.n)) throw UsageError(std::string(what) + " needs exactly --n coordinates");
    return vk::ChamberPoint(std::move(p), o.wall);
}

ordered_json positions_json(const std::vector<long long>& v) { return ordered_json(v); }

// ---------------------------------------------------------------------------

Output run_count(const Options& o, long long steps, const std::string& start, const std::string& end, bool oracle) {
    const vk::LatticeConfig u = lattice_start(start, o);
    Output out;
    out.summary["n"] = o.n;
    out.summary["wall"] = o.wall;
    out.summary["steps"] = steps;
    out.summary["start"] = positions_json(u.positions());
    std::optional<std::map<std::vector<long long>, vk::BigInt>> table;
    auto check = [&](const vk::LatticeConfig& v, const vk::BigInt& c) {
        if (!oracle) return true;
        if (!table) table = vk::oracle_count_dp(steps, u);
        const auto it = table->find(v.positions());
        return (it == table->end() ? vk::BigInt(0) : it->second) == c;
    };
    if (!end.empty()) {
        auto e = parse_list<long long>(end, "lattice end");
        if (e.size() != u.size()) throw UsageError("--end needs exactly --n positions");
        const auto v = vk::LatticeConfig::endpoint(std::move(e), o.wall);
        const vk::WalkCount c = vk::count_paths(steps, u, v);
        out.summary["end"] = positions_json(v.positions());
        out.summary["count"] = c.str();
        out.summary["probability"] = vk::walk_probability(steps, u, v).str();
        out.pass = check(v, c.value);
        if (oracle) out.summary["oracle_agrees"] = out.pass;
        out.header = {"count"};
        out.rows.push_back({c.str()});
        return out;
    }
    out.header.clear();
    for (std::size_t i = 0; i < u.size(); ++i) out.header.push_back("v_" + std::to_string(i + 1));
    out.header.push_back("count");
    const auto row = vk::detail::binomial_row(steps);
    vk::BigInt total = 0;
    std::size_t mismatches = 0;
    vk::detail::for_each_endpoint(steps, u, [&](const vk::LatticeConfig& v) {
        const vk::BigInt c = vk::detail::count_with_row(row, steps, u, v);
        if (!check(v, c)) ++mismatches;
        if (c == 0) return;
        total += c;
        std::vector<std::string> r;
        for (long long p : v.positions()) r.push_back(std::to_string(p));
        r.push_back(c.str());
        out.rows.push_back(std::move(r));
    });
    out.summary["endpoints"] = out.rows.size();
    out.summary["survival_count"] = total.str();
    const vk::Rational prob(total, vk::BigInt(1) << static_cast<unsigned>(steps * static_cast<long long>(u.size())));
    out.summary["survival_probability"] = prob.str();
    out.summary["survival_probability_float"] = vk::to_double(prob);
    if (oracle) {
        out.summary["oracle_mismatches"] = mismatches;
        out.pass = mismatches == 0;
    }
    return out;
}

Output run_survive(const Options& o, const std::string& start, double budget) {
    const vk::LatticeConfig u = lattice_start(start, o);
    const vk::ScaledSurvival s = vk::scaled_survival(o.scale, o.time, u, budget);
    Output out;
    out.summary["n"] = o.n;
    out.summary["wall"] = o.wall;
    out.summary["scale"] = o.scale;
    out.summary["time"] = o.time;
    out.summary["start"] = positions_json(u.positions());
    out.summary["steps"] = s.steps;
    out.summary["exact"] = s.exact;
    if (s.exact_rational) out.summary["exact_rational"] = s.exact_rational->str();
    out.summary["exact_arithmetic"] = s.exact_arithmetic;
    out.summary["predicted"] = s.predicted;
    out.summary["ratio"] = s.ratio;
    if (!s.advisory.empty()) out.summary["advisory"] = s.advisory;
    return out;
}

Output run_density(const Options& o, const std::string& point, const std::string& from, double from_time) {
    const vk::ModelSpec spec = model_spec(o);
    const vk::ChamberPoint y = chamber_point(point, o, "--point");
    Output out;
    out.summary["family"] = spec.finite_horizon() ? (o.wall ? "g_hat" : "g") : (o.wall ? "p_hat" : "p");
    out.summary["n"] = o.n;
    out.summary["wall"] = o.wall;
    if (spec.finite_horizon()) out.summary["horizon"] = o.horizon;
    out.summary["time"] = o.time;
    out.summary["point"] = std::vector<double>(y.coords().begin(), y.coords().end());
    double value = 0, log_value = 0;
    if (from.empty()) {
        log_value = vk::log_transition_density_origin(spec, o.time, y.coords());
        out.summary["start"] = "origin";
    } else {
        const vk::ChamberPoint x = chamber_point(from, o, "--from");
        log_value = spec.finite_horizon() ? vk::log_g_density(spec, from_time, x.coords(), o.time, y.coords())
                                          : vk::log_p_density(spec, from_time, x.coords(), o.time, y.coords());
        out.summary["start"] = std::vector<double>(x.coords().begin(), x.coords().end());
        out.summary["start_time"] = from_time;
    }
    value = std::exp(log_value);
    out.summary["density"] = value;
    out.summary["log_density"] = log_value;
    out.header = {"density", "log_density"};
    out.rows.push_back({num(value), num(log_value)});
    return out;
}

Output run_survival(const Options& o, const std::string& point, bool mc) {
    const vk::ChamberPoint x = chamber_point(point, o, "--point");
    Output out;
    const double p = vk::survival(o.time, x);
    out.summary["n"] = o.n;
    out.summary["wall"] = o.wall;
    out.summary["time"] = o.time;
    out.summary["point"] = std::vector<double>(x.coords().begin(), x.coords().end());
    out.summary["pfaffian"] = p;
    out.header = {"pfaffian"};
    out.rows.push_back({num(p)});
    if (mc) {
        const auto e = vk::noncollision_mc(o.time, x, std::max<std::size_t>(o.samples, 2), o.step, o.seed, o.streams, true,
                                           o.threads);
        const double diff = std::abs(e.estimate - p), tol = 3 * e.std_error + e.allowance;
        out.summary["monte_carlo"] = {{"estimate", e.estimate},      {"std_error", e.std_error},
                                      {"allowance", e.allowance},    {"samples", e.samples},
                                      {"steps", e.steps},            {"seed", o.seed},
                                      {"streams", o.streams},        {"advisory", e.advisory},
                                      {"within_tolerance", diff <= tol}};
        out.pass = diff <= tol;
        out.header = {"pfaffian", "estimate", "std_error", "allowance"};
        out.rows[0] = {num(p), num(e.estimate), num(e.std_error), num(e.allowance)};
    }
    return out;
}

// Per-coordinate KS of endpoint samples against the marginals of the
// origin-start density at time t. N <= 3.
std::vector<vk::StatReport> endpoint_ks(const vk::ModelSpec& spec, double t, const vk::PathEnsemble& ens) {
    std::vector<vk::StatReport> reps;
    const std::size_t n = ens.n;
    const double reach = 9 * std::sqrt(t);
    const auto grid = vk::uniform_grid(spec.wall ? 0.0 : -reach, reach, 321);
    const double level = 0.01 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto m = vk::marginalize(
            [&](std::span<const double> y) { return std::exp(vk::log_transition_density_origin(spec, t, y)); }, n,
            vk::Marginal::coordinate(i), spec.wall ? 0.0 : -reach, reach, grid);
        const auto values = vk::endpoint_values(ens, vk::Functional::coordinate(i));
        if (values.size() < 10) break;
        reps.push_back(vk::ks_test(values, [&](double v) { return m.cdf_at(v); }, level,
                                   "endpoint y" + std::to_string(i + 1)));
    }
    return reps;
}

Output run_simulate(const Options& o, const std::string& model, const std::string& start, std::size_t grid,
                    const std::string& dump, bool ks) {
    vk::SimConfig cfg;
    cfg.model = model == "walker" ? vk::SimModel::walker : model == "sde-g" ? vk::SimModel::sde_g : vk::SimModel::sde_p;
    cfg.spec = model_spec(o);
    cfg.scale = o.scale;
    cfg.step = o.step;
    cfg.samples = o.samples;
    cfg.seed = o.seed;
    cfg.streams = o.streams;
    cfg.threads = o.threads;
    cfg.grid_points = grid;
    Output out;
    if (cfg.model == vk::SimModel::walker) {
        if (!cfg.spec.finite_horizon()) throw UsageError("walker simulation needs --horizon");
        cfg.start = lattice_start(start, o);
        const double cost = vk::estimate_walker_cost(cfg);
        out.summary["estimated_proposals"] = cost;
        if (cost * static_cast<double>(vk::walker_steps(cfg)) > 1e10)
            std::cerr << "warning: about " << cost << " proposals of " << vk::walker_steps(cfg)
                      << " steps expected; consider a smaller --scale or --n\n";
    } else {
        if (cfg.model == vk::SimModel::sde_g && !cfg.spec.finite_horizon()) throw UsageError("sde-g needs --horizon");
        if (cfg.model == vk::SimModel::sde_g && o.time > o.horizon) throw UsageError("--time must not exceed --horizon");
        cfg.end_time = cfg.model == vk::SimModel::sde_p || o.time < o.horizon ? o.time : 0.0;
        if (start == "origin" || start.empty())
            cfg.start = vk::origin;
        else
            cfg.start = chamber_point(start, o, "--start");
    }
    const vk::PathEnsemble ens = cfg.model == vk::SimModel::walker ? vk::simulate_walkers(cfg) : vk::simulate_sde(cfg);

    out.summary["model"] = vk::to_string(cfg.model);
    out.summary["n"] = o.n;
    out.summary["wall"] = o.wall;
    if (cfg.spec.finite_horizon()) out.summary["horizon"] = o.horizon;
    out.summary["samples"] = ens.samples();
    out.summary["accepted"] = ens.accepted;
    out.summary["proposed"] = ens.proposed;
    out.summary["acceptance"] = static_cast<double>(ens.accepted) / static_cast<double>(ens.proposed);
    if (cfg.model == vk::SimModel::walker) out.summary["steps"] = vk::walker_steps(cfg);
    else out.summary["halvings"] = ens.halvings;
    out.summary["seed"] = o.seed;
    out.summary["streams"] = o.streams;
    out.summary["config_digest"] = ens.config_digest;
    out.summary["time_grid"] = ens.time_grid;

    if (ks) {
        if (o.n > 3) throw UsageError("--ks supports --n <= 3");
        const bool from_origin = cfg.model == vk::SimModel::walker || std::holds_alternative<vk::OriginStart>(cfg.start);
        if (!from_origin) throw UsageError("--ks needs an origin (or packed lattice) start");
        vk::ModelSpec spec = cfg.spec;
        if (cfg.model == vk::SimModel::sde_p) spec.horizon = std::numeric_limits<double>::infinity();
        const double t = ens.time_grid.back();
        const auto reps = endpoint_ks(spec, cfg.model == vk::SimModel::walker ? spec.horizon : t, ens);
        ordered_json arr = ordered_json::array();
        for (const auto& r : reps) {
            arr.push_back(report_json(r));
            out.pass = out.pass && r.pass;
        }
        out.summary["ks"] = arr;
    }

    out.header = {"sample_id", "t"};
    for (int i = 0; i < o.n; ++i) out.header.push_back("x_" + std::to_string(i + 1));
    for (std::size_t s = 0; s < ens.samples(); ++s)
        for (std::size_t g = 0; g < ens.time_grid.size(); ++g) {
            std::vector<std::string> row{std::to_string(s), num(ens.time_grid[g])};
            for (double v : ens.at(s, g)) row.push_back(num(v));
            out.rows.push_back(std::move(row));
        }
    if (!dump.empty()) {
        std::ofstream f(dump, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + dump);
        write_csv(f, out);
    }
    return out;
}

Output run_rmt(const Options& o, const std::string& ensemble, double variance, double alpha, double bridge_t,
               const std::string& dump, bool ks) {
    Output out;
    if (bridge_t > 0) {
        if (!std::isfinite(o.horizon)) throw UsageError("--bridge needs --horizon");
        const vk::BridgeCheck b = vk::pm_bridge_check(static_cast<std::size_t>(o.n), o.horizon, bridge_t, o.samples,
                                                      o.seed, vk::BridgeSource::sde, 0.01, o.step, o.streams);
        out.summary["n"] = o.n;
        out.summary["horizon"] = o.horizon;
        out.summary["t"] = bridge_t;
        out.summary["alpha"] = std::sqrt((o.horizon - bridge_t) / o.horizon);
        out.summary["fitted_scale"] = b.fitted_scale;
        ordered_json arr = ordered_json::array();
        for (const auto& r : b.reports) arr.push_back(report_json(r));
        out.summary["reports"] = arr;
        out.pass = b.pass();
        add_report_rows(out, 11, "pm_bridge", b.reports);
        return out;
    }
    const vk::Ensemble kind = ensemble == "goe" ? vk::Ensemble::goe : ensemble == "gue" ? vk::Ensemble::gue : vk::Ensemble::pm;
    const double parameter = kind == vk::Ensemble::pm ? alpha : variance;
    const vk::SpectrumSample s = vk::sample_ensemble(kind, static_cast<std::size_t>(o.n), parameter, o.samples, o.seed,
                                                     o.streams, o.threads);
    out.summary["ensemble"] = vk::to_string(kind);
    out.summary["n"] = o.n;
    out.summary["variance"] = s.variance;
    if (kind == vk::Ensemble::pm) out.summary["alpha"] = s.alpha;
    out.summary["draws"] = s.draws();
    out.summary["seed"] = o.seed;
    out.summary["streams"] = o.streams;
    if (ks) {
        if (kind == vk::Ensemble::pm) throw UsageError("--ks needs a closed-form ensemble (goe or gue)");
        if (o.n > 3) throw UsageError("--ks supports --n <= 3");
        const double reach = 9 * std::sqrt(s.variance);
        const auto grid = vk::uniform_grid(-reach, reach, 321);
        const double nf = std::lgamma(o.n + 1.0);
        ordered_json arr = ordered_json::array();
        for (std::size_t i = 0; i < s.n; ++i) {
            const auto m = vk::marginalize(
                [&](std::span<const double> y) { return std::exp(nf + vk::log_eigen_density(kind, y, s.variance)); }, s.n,
                vk::Marginal::coordinate(i), -reach, reach, grid);
            const auto r = vk::ks_test(s.coordinate(i), [&](double v) { return m.cdf_at(v); },
                                       0.01 / static_cast<double>(s.n), "eigenvalue " + std::to_string(i + 1));
            out.pass = out.pass && r.pass;
            arr.push_back(report_json(r));
        }
        out.summary["ks"] = arr;
    }
    out.header = {"draw_id"};
    for (int i = 0; i < o.n; ++i) out.header.push_back("lambda_" + std::to_string(i + 1));
    for (std::size_t d = 0; d < s.draws(); ++d) {
        std::vector<std::string> row{std::to_string(d)};
        for (double v : s.row(d)) row.push_back(num(v));
        out.rows.push_back(std::move(row));
    }
    if (!dump.empty()) {
        std::ofstream f(dump, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + dump);
        write_csv(f, out);
    }
    return out;
}

Output run_verify(const std::string& suite, const vk::Budget& budget, const std::vector<int>& only) {
    const vk::SuiteReport rep = vk::verify_suite(suite, budget, only);
    Output out;
    out.summary["suite"] = suite;
    out.summary["seed"] = budget.seed;
    out.summary["sample_factor"] = budget.sample_factor;
    out.summary["incomplete"] = rep.incomplete;
    ordered_json checks = ordered_json::array();
    out.header = {"criterion", "check", "test", "statistic", "critical_value", "n_samples", "verdict"};
    for (const auto& c : rep.checks) {
        ordered_json j;
        j["criterion"] = c.criterion;
        j["name"] = c.name;
        j["suite"] = c.suite;
        j["verdict"] = c.pass() ? "pass" : "fail";
        j["incomplete"] = c.incomplete;
        ordered_json reps = ordered_json::array();
        for (const auto& r : c.reports) reps.push_back(report_json(r));
        j["reports"] = reps;
        j["notes"] = c.notes;
        checks.push_back(j);
        std::vector<vk::StatReport> rs = c.reports;
        Output tmp;
        add_report_rows(tmp, c.criterion, c.name, rs);
        out.rows.insert(out.rows.end(), tmp.rows.begin(), tmp.rows.end());
        std::cerr << "criterion " << c.criterion << " (" << c.name << "): " << (c.pass() ? "pass" : "fail") << ", "
                  << c.seconds << " s\n";
    }
    out.summary["checks"] = checks;
    out.pass = rep.pass();
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"viciouskit: vicious walkers, nonintersecting paths and their Brownian limits"};
    app.require_subcommand(1);
    Options o;

    long long steps = 2;
    std::string start, end, point, from, model = "walker", ensemble = "goe", suite = "all", dump, criteria;
    double from_time = 0, variance = 1, alpha = 0.5, bridge_t = 0, exact_budget = 5e9;
    bool oracle = false, mc = false, ks = false;
    std::size_t grid = 11;
    vk::Budget budget;

    auto* count = app.add_subcommand("count", "exact number of nonintersecting lattice path tuples");
    add_common(count, o);
    count->add_option("--steps", steps, "number of steps m")->check(CLI::Range(0LL, 100000LL));
    count->add_option("--start", start, "even start positions, comma separated (default 0,2,4,...)");
    count->add_option("--end", end, "end positions; omit to list every endpoint");
    count->add_flag("--oracle", oracle, "cross-check against the brute-force dynamic program");

    auto* survive = app.add_subcommand("survive", "lattice survival probability at m = 2 floor(L^2 t / 2) vs asymptotics");
    add_common(survive, o);
    survive->add_option("--start", start, "even start positions (default 0,2,4,...)");
    survive->add_option("--exact-budget", exact_budget, "work limit for exact arithmetic");

    auto* density = app.add_subcommand("density", "transition density (g-family with --horizon, p-family without)");
    add_common(density, o);
    density->add_option("--point", point, "end point y, comma separated");
    density->add_option("--from", from, "start point x (default: all walkers at the origin)");
    density->add_option("--from-time", from_time, "start time s")->check(CLI::NonNegativeNumber);

    auto* surv = app.add_subcommand("survival", "Brownian non-collision probability (Pfaffian)");
    add_common(surv, o);
    surv->add_option("--point", point, "start point x, comma separated");
    surv->add_flag("--mc", mc, "also estimate by Monte Carlo (--samples, --step)");

    auto* sim = app.add_subcommand("simulate", "simulate walkers or the limiting SDEs");
    add_common(sim, o);
    sim->add_option("--model", model, "engine")->check(CLI::IsMember({"walker", "sde-g", "sde-p"}));
    sim->add_option("--start", start, "lattice start (walker), chamber point or 'origin' (SDE)");
    sim->add_option("--grid", grid, "recorded times including the start")->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
    sim->add_option("--dump", dump, "also write the path table (CSV) to this file");
    sim->add_flag("--ks", ks, "KS of endpoint coordinates against the limiting density");

    auto* rmt = app.add_subcommand("rmt", "GOE / GUE / Pandey-Mehta spectra");
    add_common(rmt, o);
    rmt->add_option("--ensemble", ensemble, "ensemble")->check(CLI::IsMember({"goe", "gue", "pm"}));
    rmt->add_option("--variance", variance, "variance sigma^2 (goe, gue)")->check(CLI::PositiveNumber);
    rmt->add_option("--alpha", alpha, "interpolation parameter (pm)")->check(CLI::Range(0.0, 1.0));
    rmt->add_option("--bridge", bridge_t, "run the bridge check at this time t (needs --horizon)")->check(CLI::PositiveNumber);
    rmt->add_option("--dump", dump, "also write the spectra (CSV) to this file");
    rmt->add_flag("--ks", ks, "KS of each eigenvalue against the closed-form density");

    auto add_verify = [&](CLI::App* a) {
        add_common(a, o);
        a->add_option("--sample-factor", budget.sample_factor, "scale all Monte Carlo sample counts")->check(CLI::PositiveNumber);
        a->add_option("--budget", budget.seconds, "time budget in seconds")->check(CLI::PositiveNumber);
        a->add_option("--criteria", criteria, "comma-separated criterion numbers to run");
    };
    auto* vid = app.add_subcommand("verify-identities", "run the identity suite");
    add_verify(vid);
    auto* ver = app.add_subcommand("verify", "run a verification suite");
    add_verify(ver);
    ver->add_option("--suite", suite, "suite: identities, combinatorics, montecarlo, rmt or all");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        Output out;
        std::string name;
        if (*count) {
            name = "count";
            out = run_count(o, steps, start, end, oracle);
        } else if (*survive) {
            name = "survive";
            out = run_survive(o, start, exact_budget);
        } else if (*density) {
            name = "density";
            out = run_density(o, point, from, from_time);
        } else if (*surv) {
            name = "survival";
            out = run_survival(o, point, mc);
        } else if (*sim) {
            name = "simulate";
            out = run_simulate(o, model, start, grid, dump, ks);
        } else if (*rmt) {
            name = "rmt";
            out = run_rmt(o, ensemble, variance, alpha, bridge_t, dump, ks);
        } else {
            name = *vid ? "verify-identities" : "verify";
            if (*vid) suite = "identities";
            if (std::find(vk::suite_names().begin(), vk::suite_names().end(), suite) == vk::suite_names().end())
                throw UsageError("unknown suite '" + suite + "'");
            if ((*vid ? vid : ver)->count("--seed") > 0) budget.seed = o.seed;
            budget.threads = o.threads;
            out = run_verify(suite, budget, parse_list<int>(criteria, "--criteria"));
        }
        emit(o, name, out);
        return out.pass ? 0 : 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
