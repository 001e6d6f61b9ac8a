#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "output.hpp"
#include "varexp.hpp"

namespace vx::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string model = "gm:p1";
    std::vector<std::string> exponents{"p1", "p2", "p3"};
    varexp_params params{2.0, 0.05, 0.3, 0.05};
    double T = 1.0;
    double dt = 0.001;
    std::size_t paths = 5000;
    std::uint64_t seed = 42;
    std::string policy = "full-trunc";
    std::string out = "out";
    bool dump_paths = false;
    bool no_svg = false;
    int bins = 50;
    std::vector<int> orders{2, 3, 4};
    std::vector<double> checkpoints;  // empty: T/4, T/2, 3T/4, T
    double tol = 1e-9;
    int kmax = 200;
    int n = 10;
    int threads = 1;
};

// Flag values before merging; unset means "not on the command line".
struct Flags {
    std::string config;
    std::string model;
    std::string exponent;
    std::vector<std::string> exponents;
    double kappa = 0, theta = 0, xi = 0, v0 = 0;
    double T = 0, dt = 0;
    std::size_t paths = 0;
    std::uint64_t seed = 0;
    std::string policy;
    std::string out;
    bool dump_paths = false;
    bool no_svg = false;
    int bins = 0;
    std::vector<int> orders;
    std::vector<double> checkpoints;
    double tol = 0;
    int kmax = 0;
    int n = 0;
    int threads = 0;
};

std::uint64_t parse_seed(const std::string& text, const std::string& source) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
        v = std::stoull(text, &used, 10);
    } catch (const std::exception&) {
        throw ConfigError(source + ": invalid seed '" + text + "'");
    }
    if (used != text.size()) throw ConfigError(source + ": invalid seed '" + text + "'");
    return v;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class T>
T json_get(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

// Returns true when the file sets a seed.
bool apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    static const std::set<std::string> known{
        "model", "exponents", "kappa", "theta", "xi", "v0", "T", "dt", "paths",
        "seed", "policy", "out", "dump_paths", "no_svg", "bins", "orders",
        "checkpoints", "tol", "kmax", "n", "threads"};
    for (const auto& item : j.items()) {
        if (!known.count(item.key())) throw ConfigError("unknown config key '" + item.key() + "'");
    }
    if (j.contains("model")) cfg.model = json_get<std::string>(j, "model");
    if (j.contains("exponents")) {
        if (j["exponents"].is_string()) {
            cfg.exponents = split_list(j["exponents"].get<std::string>());
        } else {
            cfg.exponents = json_get<std::vector<std::string>>(j, "exponents");
        }
    }
    if (j.contains("kappa")) cfg.params.kappa = json_get<double>(j, "kappa");
    if (j.contains("theta")) cfg.params.theta = json_get<double>(j, "theta");
    if (j.contains("xi")) cfg.params.xi = json_get<double>(j, "xi");
    if (j.contains("v0")) cfg.params.v0 = json_get<double>(j, "v0");
    if (j.contains("T")) cfg.T = json_get<double>(j, "T");
    if (j.contains("dt")) cfg.dt = json_get<double>(j, "dt");
    if (j.contains("paths")) cfg.paths = json_get<std::size_t>(j, "paths");
    if (j.contains("seed")) {
        cfg.seed = j["seed"].is_string() ? parse_seed(j["seed"].get<std::string>(), "config")
                                         : json_get<std::uint64_t>(j, "seed");
    }
    if (j.contains("policy")) cfg.policy = json_get<std::string>(j, "policy");
    if (j.contains("out")) cfg.out = json_get<std::string>(j, "out");
    if (j.contains("dump_paths")) cfg.dump_paths = json_get<bool>(j, "dump_paths");
    if (j.contains("no_svg")) cfg.no_svg = json_get<bool>(j, "no_svg");
    if (j.contains("bins")) cfg.bins = json_get<int>(j, "bins");
    if (j.contains("orders")) cfg.orders = json_get<std::vector<int>>(j, "orders");
    if (j.contains("checkpoints")) cfg.checkpoints = json_get<std::vector<double>>(j, "checkpoints");
    if (j.contains("tol")) cfg.tol = json_get<double>(j, "tol");
    if (j.contains("kmax")) cfg.kmax = json_get<int>(j, "kmax");
    if (j.contains("n")) cfg.n = json_get<int>(j, "n");
    if (j.contains("threads")) cfg.threads = json_get<int>(j, "threads");
    return j.contains("seed");
}

int policy_code(const std::string& p) {
    if (p == "full-trunc") return VAREXP_POLICY_FULL_TRUNCATION;
    if (p == "reflect") return VAREXP_POLICY_REFLECTION;
    throw ConfigError("unknown policy '" + p + "' (expected full-trunc or reflect)");
}

void validate(const RunConfig& cfg) {
    if (cfg.paths < 1) throw ConfigError("paths must be >= 1");
    if (cfg.bins < 1) throw ConfigError("bins must be >= 1");
    if (cfg.kmax < 1) throw ConfigError("kmax must be >= 1");
    if (!(cfg.tol > 0.0)) throw ConfigError("tol must be > 0");
    if (cfg.n < 1) throw ConfigError("n must be >= 1");
    if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
    if (cfg.exponents.empty()) throw ConfigError("exponent list is empty");
    for (int m : cfg.orders) {
        if (m < 2) throw ConfigError("moment orders must be >= 2");
    }
    policy_code(cfg.policy);
    int steps = 0;
    check(varexp_grid_steps(cfg.T, cfg.dt, &steps));
    for (double t : cfg.checkpoints) {
        if (!(t >= 0.0 && t <= cfg.T * (1 + 1e-12))) {
            throw ConfigError("checkpoint " + fmt17(t) + " outside [0, T]");
        }
    }
}

std::vector<double> checkpoints_of(const RunConfig& cfg) {
    if (!cfg.checkpoints.empty()) return cfg.checkpoints;
    int steps = 0;
    check(varexp_grid_steps(cfg.T, cfg.dt, &steps));
    std::vector<double> cps;
    for (int q = 1; q <= 4; ++q) {
        const int j = static_cast<int>(std::lround(steps * q / 4.0));
        cps.push_back(j * cfg.dt);
    }
    return cps;
}

std::string checksum_hex(std::uint64_t sum) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(sum));
    return buf;
}

std::string file_tag(const std::string& id) {
    std::string tag;
    for (char c : id) {
        tag += (std::isalnum(static_cast<unsigned char>(c)) || c == '.') ? c : '_';
    }
    return tag;
}

ordered_json params_json(const varexp_params& p) {
    return ordered_json{{"kappa", p.kappa}, {"theta", p.theta}, {"xi", p.xi}, {"v0", p.v0}};
}

// Config echo shared by every manifest; thread count is left out so that
// outputs do not depend on it.
ordered_json config_json(const RunConfig& cfg) {
    return ordered_json{{"params", params_json(cfg.params)},
                        {"T", cfg.T},
                        {"dt", cfg.dt},
                        {"paths", cfg.paths},
                        {"seed", cfg.seed},
                        {"policy", cfg.policy},
                        {"bins", cfg.bins},
                        {"orders", cfg.orders},
                        {"checkpoints", checkpoints_of(cfg)}};
}

void write_json(const fs::path& path, const ordered_json& j) {
    atomic_write(path, j.dump(2) + "\n");
}

fs::path prepare_out(const RunConfig& cfg) {
    fs::path dir(cfg.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw ConfigError("cannot create output directory " + cfg.out);
    }
    return dir;
}

// ---------------------------------------------------------------------------
// validate-exponent

int cmd_validate_exponent(const RunConfig& cfg, std::ostream& out) {
    const fs::path dir = prepare_out(cfg);
    ordered_json reports = ordered_json::array();
    bool all_pass = true;
    for (const auto& spec : cfg.exponents) {
        const auto e = parse_exponent(spec);
        varexp_hypothesis_report r{};
        check(varexp_exponent_validate(e.get(), nullptr, &r));
        all_pass = all_pass && r.pass;
        reports.push_back(ordered_json{{"exponent", spec},
                                       {"pass", r.pass != 0},
                                       {"failing_clause", varexp_clause_name(r.failing_clause)},
                                       {"observed_inf", r.observed_inf},
                                       {"observed_sup", r.observed_sup},
                                       {"observed_dsup_near_zero", r.observed_dsup_near_zero},
                                       {"observed_dsup_band", r.observed_dsup_band},
                                       {"p_at_zero_plus", r.p_at_zero_plus},
                                       {"delta", r.delta},
                                       {"grid",
                                        {{"x_min", r.grid_x_min},
                                         {"x_max", r.grid_x_max},
                                         {"points", r.grid_points},
                                         {"evaluated_points", r.evaluated_points}}}});
        out << "validate-exponent " << spec << ": " << (r.pass ? "pass" : "FAIL") << " inf "
            << r.observed_inf << " sup " << r.observed_sup << " sup|p'|(0,delta) "
            << r.observed_dsup_near_zero
            << (r.pass ? "" : std::string(" clause ") + varexp_clause_name(r.failing_clause))
            << "\n";
    }
    write_json(dir / "validate-exponent.json",
               ordered_json{{"version", varexp_version()}, {"reports", reports}});
    return all_pass ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------------------
// feller

int cmd_feller(const RunConfig& cfg, std::ostream& out) {
    const fs::path dir = prepare_out(cfg);
    const Model model(cfg.model, cfg.params);
    varexp_feller_report r{};
    check(varexp_feller_check(model.get(), &r, nullptr, nullptr, 0));
    std::vector<double> xs(r.profile_size), ts(r.profile_size);
    check(varexp_feller_check(model.get(), &r, xs.data(), ts.data(), xs.size()));
    ordered_json profile = ordered_json::array();
    for (std::size_t i = 0; i < xs.size(); ++i) profile.push_back({xs[i], ts[i]});
    ordered_json j{{"version", varexp_version()},
                   {"model", model.id()},
                   {"params", params_json(cfg.params)},
                   {"criterion", varexp_feller_criterion_name(r.criterion)},
                   {"analytic_limit", r.analytic_limit},
                   {"p_at_zero", r.p_at_zero},
                   {"profile_consistent", r.profile_consistent != 0},
                   {"verdict", varexp_feller_verdict_name(r.verdict)}};
    if (r.classical_applies) {
        j["classical"] = {{"two_kappa_theta", r.classical_lhs},
                          {"xi_squared", r.classical_rhs},
                          {"holds", r.classical_lhs >= r.classical_rhs}};
    }
    j["profile"] = profile;
    write_json(dir / "feller.json", j);
    out << "feller " << model.id() << ": " << varexp_feller_verdict_name(r.verdict) << " ("
        << varexp_feller_criterion_name(r.criterion) << ", limit " << r.analytic_limit;
    if (r.classical_applies) {
        out << ", 2*kappa*theta = " << r.classical_lhs << (r.classical_lhs >= r.classical_rhs ? " >= " : " < ")
            << "xi^2 = " << r.classical_rhs;
    }
    out << ")\n";
    return r.verdict == VAREXP_FELLER_NON_ATTAINABLE ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------------------
// lipschitz

int cmd_lipschitz(const RunConfig& cfg, std::ostream& out) {
    const fs::path dir = prepare_out(cfg);
    const Model model(cfg.model, cfg.params);
    varexp_lipschitz_report r{};
    check(varexp_lipschitz_constants(model.get(), {cfg.n, 0.0}, 10000, cfg.seed, &r));
    const bool ok = r.empirical_sup_quotient <= r.Lg_n && r.empirical_sup_quotient_f <= r.Lf_n;
    write_json(dir / "lipschitz.json",
               ordered_json{{"version", varexp_version()},
                            {"model", model.id()},
                            {"n", r.n},
                            {"epsilon", r.epsilon},
                            {"L_n", r.L_n},
                            {"C_n", r.C_n},
                            {"Lf_n", r.Lf_n},
                            {"Lg_n", r.Lg_n},
                            {"Lhat_n", r.Lhat_n},
                            {"empirical_sup_quotient", r.empirical_sup_quotient},
                            {"empirical_sup_quotient_f", r.empirical_sup_quotient_f},
                            {"phi_prime_sup", r.phi_prime_sup},
                            {"p_prime_sup", r.p_prime_sup},
                            {"p_plus", r.p_plus},
                            {"sampled_pairs", r.sampled_pairs},
                            {"seed", cfg.seed},
                            {"within_bounds", ok}});
    out << "lipschitz " << model.id() << " n=" << r.n << ": Lf_n " << r.Lf_n << " Lg_n " << r.Lg_n
        << " empirical f " << r.empirical_sup_quotient_f << " g " << r.empirical_sup_quotient
        << (ok ? " ok" : " EXCEEDED") << "\n";
    return ok ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------------------
// simulation-backed commands

struct ModelRun {
    Model model;
    std::string id;
    std::string tag;
    Paths paths;
};

ModelRun simulate_one(const RunConfig& cfg, const std::string& spec, const Brownian& batch) {
    Model model(spec, cfg.params);
    const std::string id = model.id();
    Paths paths(model, batch, policy_code(cfg.policy), cfg.threads);
    return ModelRun{std::move(model), id, file_tag(id), std::move(paths)};
}

struct Stats {
    ordered_json summary;
    bool moments_ok = true;
    bool martingale_ok = true;
    double mean_T = 0.0;
    double stderr_T = 0.0;
};

Stats analyse(const RunConfig& cfg, const ModelRun& run) {
    Stats s;
    const auto cps = checkpoints_of(cfg);
    check(varexp_empirical_moment(run.paths.get(), cfg.T, 1, &s.mean_T, &s.stderr_T));

    ordered_json moments = ordered_json::array();
    if (!cfg.orders.empty()) {
        std::vector<varexp_moment_report> reps(cfg.orders.size() * cps.size());
        check(varexp_check_moment_bounds(run.paths.get(), &cfg.params, cfg.orders.data(),
                                         cfg.orders.size(), cps.data(), cps.size(), reps.data()));
        for (const auto& r : reps) {
            s.moments_ok = s.moments_ok && r.satisfied;
            moments.push_back(ordered_json{{"order", r.order},
                                           {"t", r.t},
                                           {"empirical", r.empirical},
                                           {"stderr", r.stderr_value},
                                           {"C_m", r.C_m},
                                           {"bound", r.theoretical_bound},
                                           {"satisfied", r.satisfied != 0}});
        }
    }

    std::vector<double> means(cps.size()), ses(cps.size());
    varexp_martingale_summary ms{};
    check(varexp_martingale_report(run.paths.get(), run.model.get(), cps.data(), cps.size(),
                                   means.data(), ses.data(), &ms));
    s.martingale_ok = ms.satisfied != 0;
    ordered_json mart = ordered_json::array();
    for (std::size_t i = 0; i < cps.size(); ++i) {
        mart.push_back(ordered_json{{"t", cps[i]}, {"mean", means[i]}, {"stderr", ses[i]}});
    }

    const auto hist = terminal_histogram(run.paths, cfg.T, cfg.bins);
    int jensen = 0;
    check(varexp_jensen_holds(run.paths.get(), cfg.T, &jensen));
    double second = 0.0;
    check(varexp_second_moment_bound(run.model.get(), cfg.T, cfg.dt, &second));

    s.summary = ordered_json{
        {"model", run.id},
        {"seed", cfg.seed},
        {"terminal", {{"t", cfg.T}, {"mean", s.mean_T}, {"stderr", s.stderr_T}}},
        {"moments", moments},
        {"moments_satisfied", s.moments_ok},
        {"second_moment_ceiling", second},
        {"martingale",
         {{"v0", cfg.params.v0},
          {"checkpoints", mart},
          {"max_abs_drift", ms.max_abs_drift},
          {"bias_allowance", ms.bias_allowance},
          {"satisfied", s.martingale_ok}}},
        {"jensen_holds", jensen != 0},
        {"histogram",
         {{"t", cfg.T},
          {"bin_edges", hist.edges},
          {"counts", hist.counts},
          {"densities", hist.densities}}}};
    return s;
}

std::string path_csv(const ModelRun& run, std::size_t first, std::size_t last) {
    const double dt = run.paths.dt();
    std::string csv = "t,path_id,v\n";
    for (std::size_t p = first; p < last; ++p) {
        const auto row = run.paths.row(p);
        const std::string pid = std::to_string(p);
        for (std::size_t j = 0; j < row.size(); ++j) {
            csv += fmt17(static_cast<double>(j) * dt);
            csv += ',';
            csv += pid;
            csv += ',';
            csv += fmt17(row[j]);
            csv += '\n';
        }
    }
    return csv;
}

std::string hist_csv(const Histogram& h) {
    std::string csv = "bin_left,bin_right,count,density\n";
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
        csv += fmt17(h.edges[k]) + "," + fmt17(h.edges[k + 1]) + "," +
               std::to_string(h.counts[k]) + "," + fmt17(h.densities[k]) + "\n";
    }
    return csv;
}

// Writes <tag>_path.csv, <tag>_hist.csv, <tag>_summary.json,
// <tag>_manifest.json and optionally <tag>_paths.csv.
Stats write_model_outputs(const RunConfig& cfg, const fs::path& dir, const std::string& command,
                          const Brownian& batch, const ModelRun& run) {
    Stats s = analyse(cfg, run);
    std::vector<std::string> files;
    auto emit = [&](const std::string& name, const std::string& content) {
        atomic_write(dir / name, content);
        files.push_back(name);
    };
    emit(run.tag + "_path.csv", path_csv(run, 0, 1));
    emit(run.tag + "_hist.csv", hist_csv(terminal_histogram(run.paths, cfg.T, cfg.bins)));
    if (cfg.dump_paths) emit(run.tag + "_paths.csv", path_csv(run, 0, run.paths.count()));
    emit(run.tag + "_summary.json", s.summary.dump(2) + "\n");

    const auto clamps = run.paths.clamp_stats();
    ordered_json manifest{
        {"tool", "varexp-cir"},
        {"version", varexp_version()},
        {"command", command},
        {"model", run.id},
        {"seed", cfg.seed},
        {"policy", cfg.policy},
        {"config", config_json(cfg)},
        {"increment_checksum", checksum_hex(batch.checksum())},
        {"clamp",
         {{"total_clamps", clamps.total_clamps},
          {"paths_with_clamps", clamps.paths_with_clamps},
          {"clamp_fraction", clamps.clamp_fraction}}},
        {"outputs", files}};
    write_json(dir / (run.tag + "_manifest.json"), manifest);
    return s;
}

int cmd_simulate(const RunConfig& cfg, const std::string& command, std::ostream& out) {
    const fs::path dir = prepare_out(cfg);
    const Brownian batch(cfg.seed, cfg.paths, cfg.T, cfg.dt, cfg.threads);
    const auto run = simulate_one(cfg, cfg.model, batch);
    const auto s = write_model_outputs(cfg, dir, command, batch, run);
    const auto clamps = run.paths.clamp_stats();
    out << command << " " << run.id << ": paths " << cfg.paths << " seed " << cfg.seed
        << " mean v(T) " << fmt17(s.mean_T) << " +- " << s.stderr_T << " clamp_fraction "
        << clamps.clamp_fraction << " checksum " << checksum_hex(batch.checksum());
    if (command == "moments") {
        out << " moment bounds " << (s.moments_ok ? "satisfied" : "VIOLATED") << "\n";
        return s.moments_ok ? kOk : kCheckFailed;
    }
    if (command == "martingale") {
        out << " martingale " << (s.martingale_ok ? "satisfied" : "VIOLATED") << "\n";
        return s.martingale_ok ? kOk : kCheckFailed;
    }
    out << "\n";
    return kOk;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out) {
    const fs::path dir = prepare_out(cfg);
    const Brownian batch(cfg.seed, cfg.paths, cfg.T, cfg.dt, cfg.threads);
    const std::uint64_t before = batch.checksum();

    std::vector<ModelRun> runs;
    runs.push_back(simulate_one(cfg, "cir", batch));
    for (const auto& e : cfg.exponents) runs.push_back(simulate_one(cfg, "gm:" + e, batch));
    for (const auto& run : runs) write_model_outputs(cfg, dir, "compare", batch, run);
    if (batch.checksum() != before) throw std::logic_error("increment batch changed during compare");

    int figures = 0;
    if (!cfg.no_svg) {
        const auto& cir = runs.front();
        const auto cir_hist = terminal_histogram(cir.paths, cfg.T, cfg.bins);
        auto times = [&](std::size_t len) {
            std::vector<double> t(len);
            for (std::size_t j = 0; j < len; ++j) t[j] = static_cast<double>(j) * cfg.dt;
            return t;
        };
        for (std::size_t i = 1; i < runs.size(); ++i) {
            const auto& gm = runs[i];
            const auto a = cir.paths.row(0);
            const auto b = gm.paths.row(0);
            const Series lines[] = {
                {cir.id, "#1f77b4", times(a.size()), {a.begin(), a.end()}},
                {gm.id, "#d62728", times(b.size()), {b.begin(), b.end()}}};
            const std::string idx = std::to_string(i);
            atomic_write(dir / ("fig_p" + idx + "_path.svg"),
                         svg_lines("Sample path 0: " + cir.id + " vs " + gm.id, "t", "v(t)", lines));
            const auto h = terminal_histogram(gm.paths, cfg.T, cfg.bins);
            const Bars bars[] = {{cir.id, "#1f77b4", cir_hist.edges, cir_hist.densities},
                                 {gm.id, "#d62728", h.edges, h.densities}};
            atomic_write(dir / ("fig_p" + idx + "_hist.svg"),
                         svg_histograms("Terminal distribution at T = " + fmt17(cfg.T), "v(T)", bars));
            figures += 2;
        }
    }
    out << "compare: " << runs.size() << " models on shared increments, checksum "
        << checksum_hex(before) << ", " << runs.size() * 2 << " csv, " << figures << " svg -> "
        << dir.string() << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------
// picard-verify

int cmd_picard(const RunConfig& cfg, std::size_t paths, std::ostream& out) {
    const fs::path dir = prepare_out(cfg);
    const Model model(cfg.model, cfg.params);
    const Brownian batch(cfg.seed, paths, cfg.T, cfg.dt, cfg.threads);
    const varexp_truncation tp{cfg.n, 0.0};
    const std::size_t len = static_cast<std::size_t>(batch.steps());

    ordered_json results = ordered_json::array();
    bool all_converged = true;
    bool all_match = true;
    std::vector<double> fixed(len + 1), euler(len + 1), diffs(static_cast<std::size_t>(cfg.kmax));
    for (std::size_t p = 0; p < paths; ++p) {
        const auto row = batch.row(p);
        varexp_picard_summary s{};
        check(varexp_picard_solve(model.get(), tp, cfg.T, cfg.dt, row.data(), len, cfg.tol,
                                  cfg.kmax, &s, diffs.data(), diffs.size(), fixed.data()));
        check(varexp_euler_truncated(model.get(), tp, cfg.T, cfg.dt, row.data(), len,
                                     euler.data(), nullptr));
        double sup = 0.0;
        for (std::size_t j = 0; j <= len; ++j) sup = std::max(sup, std::abs(fixed[j] - euler[j]));
        bool tail = true;
        for (std::size_t k = 3; k < s.history_size; ++k) tail = tail && diffs[k] <= diffs[k - 1];
        long long exit_index = -1;
        check(varexp_band_exit_index(euler.data(), euler.size(), cfg.n, &exit_index));
        all_converged = all_converged && s.converged;
        all_match = all_match && sup <= cfg.tol;
        results.push_back(ordered_json{
            {"path", p},
            {"converged", s.converged != 0},
            {"iterations_used", s.iterations_used},
            {"final_sup_diff", s.final_sup_diff},
            {"sup_diff_vs_euler", sup},
            {"tail_nonincreasing_from_k3", tail},
            {"rate_envelope_constant", s.rate_envelope_constant},
            {"band_exit_index", exit_index},
            {"sup_diffs", std::vector<double>(diffs.begin(), diffs.begin() + s.history_size)}});
    }
    write_json(dir / "picard-verify.json",
               ordered_json{{"version", varexp_version()},
                            {"model", model.id()},
                            {"n", cfg.n},
                            {"tol", cfg.tol},
                            {"kmax", cfg.kmax},
                            {"seed", cfg.seed},
                            {"T", cfg.T},
                            {"dt", cfg.dt},
                            {"increment_checksum", checksum_hex(batch.checksum())},
                            {"paths", results}});
    out << "picard-verify " << model.id() << " n=" << cfg.n << ": " << paths << " paths, "
        << (all_converged ? "all converged" : "NOT CONVERGED") << ", fixed point "
        << (all_match ? "matches" : "DIFFERS FROM") << " truncated Euler\n";
    if (!all_converged) return kNumericError;
    return all_match ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------------------

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "JSON config file; flags override its values");
    sub->add_option("--model", f.model, "gm:<exponent> | cir | pkm:a=<0|1>,b=<0.5|1|1.5>");
    sub->add_option("--exponent", f.exponent, "p1 | p2 | p3 | const:<c>");
    sub->add_option("--exponents", f.exponents, "comma-separated exponent list")->delimiter(',');
    sub->add_option("--kappa", f.kappa);
    sub->add_option("--theta", f.theta);
    sub->add_option("--xi", f.xi);
    sub->add_option("--v0", f.v0);
    sub->add_option("--T", f.T, "horizon");
    sub->add_option("--dt", f.dt, "time step");
    sub->add_option("--paths", f.paths, "number of sample paths");
    sub->add_option("--seed", f.seed, "64-bit seed (default 42, or VAREXP_SEED)");
    sub->add_option("--policy", f.policy, "full-trunc | reflect");
    sub->add_option("--out", f.out, "output directory");
    sub->add_flag("--dump-paths", f.dump_paths, "write every path to <model>_paths.csv");
    sub->add_flag("--no-svg", f.no_svg, "skip SVG figures");
    sub->add_option("--bins", f.bins, "histogram bins (default 50)");
    sub->add_option("--orders", f.orders, "moment orders, e.g. 2,3,4")->delimiter(',');
    sub->add_option("--checkpoints", f.checkpoints, "checkpoint times")->delimiter(',');
    sub->add_option("--tol", f.tol, "Picard tolerance");
    sub->add_option("--kmax", f.kmax, "Picard iteration cap");
    sub->add_option("--n", f.n, "truncation level");
    sub->add_option("--threads", f.threads, "worker threads (results do not depend on it)");
}

bool given(const CLI::App* sub, const char* name) { return sub->get_option(name)->count() > 0; }

RunConfig merge(const CLI::App* sub, const Flags& f) {
    RunConfig cfg;
    const bool config_seed = given(sub, "--config") && apply_config_file(cfg, f.config);
    if (!given(sub, "--seed") && !config_seed) {
        if (const char* env = std::getenv("VAREXP_SEED"); env && *env) {
            cfg.seed = parse_seed(env, "VAREXP_SEED");
        }
    }
    if (given(sub, "--model")) cfg.model = f.model;
    if (given(sub, "--exponents")) cfg.exponents = f.exponents;
    if (given(sub, "--exponent")) cfg.exponents = {f.exponent};
    if (given(sub, "--kappa")) cfg.params.kappa = f.kappa;
    if (given(sub, "--theta")) cfg.params.theta = f.theta;
    if (given(sub, "--xi")) cfg.params.xi = f.xi;
    if (given(sub, "--v0")) cfg.params.v0 = f.v0;
    if (given(sub, "--T")) cfg.T = f.T;
    if (given(sub, "--dt")) cfg.dt = f.dt;
    if (given(sub, "--paths")) cfg.paths = f.paths;
    if (given(sub, "--seed")) cfg.seed = f.seed;
    if (given(sub, "--policy")) cfg.policy = f.policy;
    if (given(sub, "--out")) cfg.out = f.out;
    if (given(sub, "--dump-paths")) cfg.dump_paths = f.dump_paths;
    if (given(sub, "--no-svg")) cfg.no_svg = f.no_svg;
    if (given(sub, "--bins")) cfg.bins = f.bins;
    if (given(sub, "--orders")) cfg.orders = f.orders;
    if (given(sub, "--checkpoints")) cfg.checkpoints = f.checkpoints;
    if (given(sub, "--tol")) cfg.tol = f.tol;
    if (given(sub, "--kmax")) cfg.kmax = f.kmax;
    if (given(sub, "--n")) cfg.n = f.n;
    if (given(sub, "--threads")) cfg.threads = f.threads;
    return cfg;
}

int status_exit(varexp_status s) {
    switch (s) {
        case VAREXP_ERR_NUMERIC:
        case VAREXP_ERR_INTERNAL:
            return kNumericError;
        default:
            return kConfigError;
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"varexp-cir: simulation and verification for variable-exponent CIR models",
                 "varexp-cir"};
    app.require_subcommand(1);
    app.set_version_flag("--version", varexp_version());

    Flags flags;
    const std::vector<std::pair<const char*, const char*>> commands{
        {"validate-exponent", "check 1/2 <= p <= 1 and bounded p' near 0 on a grid"},
        {"feller", "boundary classification at 0"},
        {"lipschitz", "closed-form and empirical Lipschitz constants of the truncated coefficients"},
        {"simulate", "Euler-Maruyama batch for one model"},
        {"compare", "CIR and GM models on shared increments, with figures"},
        {"moments", "empirical moments against the closed-form bounds"},
        {"martingale", "martingale check of v(t) minus its accumulated drift"},
        {"picard-verify", "Picard fixed point against Euler on truncated coefficients"}};
    for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), flags);

    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    try {
        RunConfig cfg = merge(sub, flags);
        validate(cfg);
        if (name == "validate-exponent") return cmd_validate_exponent(cfg, out);
        if (name == "feller") return cmd_feller(cfg, out);
        if (name == "lipschitz") return cmd_lipschitz(cfg, out);
        if (name == "simulate" || name == "moments" || name == "martingale") {
            return cmd_simulate(cfg, name, out);
        }
        if (name == "compare") return cmd_compare(cfg, out);
        if (name == "picard-verify") return cmd_picard(cfg, given(sub, "--paths") ? cfg.paths : 5, out);
        err << "unknown subcommand " << name << "\n";
        return kConfigError;
    } catch (const ConfigError& e) {
        err << "varexp-cir: " << e.what() << "\n";
        return kConfigError;
    } catch (const ApiError& e) {
        err << "varexp-cir: " << varexp_status_name(e.status()) << ": " << e.what() << "\n";
        return status_exit(e.status());
    } catch (const IoError& e) {
        err << "varexp-cir: " << e.what() << "\n";
        return kConfigError;
    } catch (const fs::filesystem_error& e) {
        err << "varexp-cir: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        err << "varexp-cir: " << e.what() << "\n";
        return kNumericError;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args(argv, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace vx::cli
