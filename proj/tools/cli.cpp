#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdpoisson/copulas.hpp"
#include "sdpoisson/errors.hpp"
#include "sdpoisson/harness.hpp"
#include "sdpoisson/point_process.hpp"
#include "sdpoisson/random.hpp"
#include "sdpoisson/sd_exponential.hpp"
#include "sdpoisson/special_fn.hpp"
#include "sdpoisson/verification.hpp"

namespace sdpoisson::cli {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kCopulaTolerance = 1e-12;
constexpr unsigned kMaxTableOrder = 200;
constexpr unsigned kMaxCopulaGrid = 2000;
constexpr std::uint64_t kMaxRenewals = 10'000'000;

const std::vector<std::string> kCommonKeys = {"lambda", "mu", "a", "seed", "output", "format"};

std::vector<std::string> command_keys(Command c) {
    std::vector<std::string> keys = kCommonKeys;
    auto add = [&](std::initializer_list<const char*> extra) { keys.insert(keys.end(), extra.begin(), extra.end()); };
    switch (c) {
        case Command::Simulate: add({"renewals"}); break;
        case Command::Pmf: add({"s", "t", "m", "n", "method", "samples"}); break;
        case Command::Table: add({"s", "t", "m-max", "n-max", "method"}); break;
        case Command::Copula: add({"copula", "b", "grid"}); break;
        case Command::Verify: add({"samples"}); break;
    }
    return keys;
}

std::string key_help(const std::string& key) {
    static const std::map<std::string, std::string> help = {
        {"lambda", "rate of the N process (> 0)"},
        {"mu", "rate of the M process (> 0)"},
        {"a", "decomposition parameter in (0,1); copula parameter for `copula`"},
        {"seed", "master seed"},
        {"output", "output file; suffixed siblings hold extra tables; empty or - for stdout"},
        {"format", "csv or json"},
        {"renewals", "number of renewals to simulate"},
        {"s", "horizon of M (> 0)"},
        {"t", "horizon of N (> 0)"},
        {"m", "value of M(s)"},
        {"n", "value of N(t)"},
        {"m-max", "largest m in the table"},
        {"n-max", "largest n in the table"},
        {"method", "closed, quadrature or auto"},
        {"samples", "Monte Carlo paths (0 = none for pmf, 10^6 for verify)"},
        {"grid", "points per axis of the copula grid"},
        {"copula", "self-decomposable, gumbel, marshall-olkin, raftery, frechet-lower, frechet-upper, independence"},
        {"b", "second Marshall-Olkin parameter"},
    };
    return help.at(key);
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
    T v{};
    const auto* end = text.data() + text.size();
    const auto r = std::from_chars(text.data(), end, v);
    if (r.ec != std::errc{} || r.ptr != end)
        throw UsageError("invalid value '" + std::string(text) + "' for " + std::string(key));
    return v;
}

unsigned parse_unsigned(std::string_view key, std::string_view text) {
    const auto v = parse_number<std::uint64_t>(key, text);
    if (v > 0xffffffffULL) throw UsageError("value too large for " + std::string(key));
    return static_cast<unsigned>(v);
}

Command parse_command(std::string_view v) {
    for (Command c : {Command::Simulate, Command::Pmf, Command::Table, Command::Copula, Command::Verify})
        if (to_string(c) == v) return c;
    throw UsageError("unknown command '" + std::string(v) + "'");
}

Method parse_method(std::string_view v) {
    for (Method m : {Method::ClosedForm, Method::Quadrature, Method::Auto})
        if (to_string(m) == v) return m;
    throw UsageError("method must be closed, quadrature or auto");
}

const std::vector<std::string>& copula_families() {
    static const std::vector<std::string> names = {"self-decomposable", "gumbel",        "marshall-olkin",
                                                   "raftery",           "frechet-lower", "frechet-upper",
                                                   "independence"};
    return names;
}

CopulaId make_copula(const RunConfig& cfg) {
    const std::string& f = cfg.copula;
    if (f == "self-decomposable") return SelfDecomposableCopula{cfg.a};
    if (f == "gumbel") return GumbelCopula{cfg.a, cfg.lambda, cfg.mu};
    if (f == "marshall-olkin") return MarshallOlkinCopula{cfg.a, cfg.b};
    if (f == "raftery") return RafteryCopula{cfg.a};
    if (f == "frechet-lower") return FrechetLowerCopula{};
    if (f == "frechet-upper") return FrechetUpperCopula{};
    if (f == "independence") return IndependenceCopula{};
    throw UsageError("unknown copula family '" + f + "'");
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

class Csv {
  public:
    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) text_ += ',';
            text_ += csv_field(fields[i]);
        }
        text_ += '\n';
    }
    std::string take() { return std::move(text_); }

  private:
    std::string text_;
};

std::string u64(std::uint64_t v) { return std::to_string(v); }

ordered_json num_json(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json config_json(const RunConfig& cfg) {
    ordered_json j;
    j["command"] = to_string(cfg.command);
    j["lambda"] = cfg.lambda;
    j["mu"] = cfg.mu;
    j["a"] = cfg.a;
    j["seed"] = cfg.seed;
    j["output"] = cfg.output;
    j["format"] = to_string(cfg.format);
    j["method"] = to_string(cfg.method);
    j["renewals"] = cfg.renewals;
    j["s"] = cfg.s;
    j["t"] = cfg.t;
    j["m"] = cfg.m;
    j["n"] = cfg.n;
    j["m-max"] = cfg.m_max;
    j["n-max"] = cfg.n_max;
    j["samples"] = cfg.samples;
    j["grid"] = cfg.grid;
    j["copula"] = cfg.copula;
    j["b"] = cfg.b;
    return j;
}

ordered_json checks_json(const std::vector<CheckResult>& checks) {
    ordered_json arr = ordered_json::array();
    for (const auto& c : checks) {
        ordered_json j;
        j["name"] = c.name;
        j["verdict"] = to_string(c.verdict);
        j["measured"] = num_json(c.measured);
        j["threshold"] = num_json(c.threshold);
        j["detail"] = c.detail;
        arr.push_back(std::move(j));
    }
    return arr;
}

std::string checks_csv(const std::vector<CheckResult>& checks) {
    Csv csv;
    csv.row({"check", "verdict", "measured", "threshold", "detail"});
    for (const auto& c : checks)
        csv.row({c.name, std::string(to_string(c.verdict)), format_double(c.measured), format_double(c.threshold),
                 c.detail});
    return csv.take();
}

int exit_code_for(const std::vector<CheckResult>& checks) {
    switch (overall_verdict(checks)) {
        case Verdict::Pass: return kExitOk;
        case Verdict::Fail: return kExitFail;
        case Verdict::Inconclusive: return kExitInconclusive;
    }
    return kExitFail;
}

// Assembles the artifacts shared by every command: a main CSV table plus a
// "_checks" table, or one JSON document.
Outcome finish(const RunConfig& cfg, std::vector<Artifact> csv_tables, ordered_json results,
               std::vector<CheckResult> checks) {
    Outcome out;
    out.exit_code = exit_code_for(checks);
    if (cfg.format == OutputFormat::Json) {
        ordered_json doc;
        doc["config"] = config_json(cfg);
        doc["results"] = std::move(results);
        doc["checks"] = checks_json(checks);
        out.artifacts.push_back({"", doc.dump(2) + "\n"});
        return out;
    }
    out.artifacts = std::move(csv_tables);
    if (!checks.empty()) out.artifacts.push_back({"_checks", checks_csv(checks)});
    return out;
}

CheckResult band_check(std::string name, double estimate, double se, double target, double k) {
    const double dev = std::fabs(estimate - target);
    const double z = se > 0 ? dev / se : (dev == 0 ? 0.0 : INFINITY);
    return {std::move(name), z <= k ? Verdict::Pass : Verdict::Fail, z, k,
            "estimate=" + format_double(estimate) + " se=" + format_double(se) + " target=" + format_double(target)};
}

Outcome cmd_simulate(const RunConfig& cfg) {
    const ModelParams p(cfg.lambda, cfg.mu, cfg.a);
    const std::size_t n = cfg.renewals;
    RandomStream rng(cfg.seed);
    std::vector<double> x(n), y(n), z(n);
    std::vector<double> y_sums(n + 1, 0.0), zeta(n + 1, 0.0);
    std::vector<unsigned> b_count(n + 1, 0);
    const double y_scale = p.lambda() / p.mu();
    for (std::size_t k = 0; k < n; ++k) {
        const TripleSample tr = sample_triple(p, rng);
        x[k] = tr.x;
        y[k] = tr.y * y_scale;
        z[k] = tr.z;
        y_sums[k + 1] = y_sums[k] + tr.y;
        zeta[k + 1] = zeta[k] + static_cast<double>(tr.b) * tr.z;
        b_count[k + 1] = b_count[k] + tr.b;
    }
    const RenewalPath path(p, cfg.seed, std::move(y_sums), std::move(zeta), std::move(b_count));
    const auto& T = path.t_arrivals();
    const auto& S = path.s_arrivals();

    Csv pairs;
    pairs.row({"k", "X", "Y", "T", "S", "T_centered", "S_centered"});
    ordered_json jpairs = ordered_json::array();
    double max_gap = 0;
    for (std::size_t k = 1; k <= n; ++k) {
        const double tc = T[k] - double(k) / p.lambda();
        const double sc = S[k] - double(k) / p.mu();
        max_gap = std::max(max_gap, std::fabs(T[k] - S[k]));
        pairs.row({u64(k), format_double(x[k - 1]), format_double(y[k - 1]), format_double(T[k]), format_double(S[k]),
                   format_double(tc), format_double(sc)});
        jpairs.push_back({k, x[k - 1], y[k - 1], T[k], S[k], tc, sc});
    }

    const double horizon = std::min(T[n], S[n]);
    Csv trace;
    trace.row({"time", "N_compensated", "M_compensated"});
    ordered_json jtrace = ordered_json::array();
    for (std::size_t j = 0; j < n; ++j) {
        const double tj = horizon * double(j) / double(n);
        const double nc = compensated_at(path, tj, Counter::N);
        const double mc = compensated_at(path, tj, Counter::M);
        trace.row({format_double(tj), format_double(nc), format_double(mc)});
        jtrace.push_back({tj, nc, mc});
    }

    std::vector<CheckResult> checks;
    ordered_json summary;
    summary["renewals"] = n;
    summary["corr_xy_theoretical"] = p.a();
    summary["corr_xz_theoretical"] = 1 - p.a();
    if (n >= 3) {
        const auto rxy = sample_correlation(x, y);
        const auto rxz = sample_correlation(x, z);
        summary["corr_xy_sample"] = rxy.r;
        summary["corr_xy_std_error"] = rxy.std_error;
        summary["corr_xz_sample"] = rxz.r;
        summary["corr_xz_std_error"] = rxz.std_error;
        checks.push_back(band_check("corr-xy", rxy.r, rxy.std_error, p.a(), 3.0));
        checks.push_back(band_check("corr-xz", rxz.r, rxz.std_error, 1 - p.a(), 3.0));
    }
    summary["t_scale"] = double(n) / p.lambda();
    summary["max_abs_t_minus_s"] = max_gap;
    summary["relative_t_s_gap"] = max_gap / (double(n) / p.lambda());

    Csv sum;
    sum.row({"key", "value"});
    for (const auto& [key, val] : summary.items())
        sum.row({key, val.is_number_float() ? format_double(val.get<double>()) : val.dump()});

    ordered_json results;
    results["summary"] = summary;
    results["pairs_columns"] = {"k", "X", "Y", "T", "S", "T_centered", "S_centered"};
    results["pairs"] = std::move(jpairs);
    results["trace_columns"] = {"time", "N_compensated", "M_compensated"};
    results["trace"] = std::move(jtrace);
    return finish(cfg, {{"", pairs.take()}, {"_trace", trace.take()}, {"_summary", sum.take()}}, std::move(results),
                  std::move(checks));
}

Outcome cmd_pmf(const RunConfig& cfg) {
    const ModelParams p(cfg.lambda, cfg.mu, cfg.a);
    PmfOptions opts;
    opts.method = cfg.method;
    const PmfReport r = joint_pmf(p, cfg.m, cfg.n, cfg.s, cfg.t, opts);
    std::vector<CheckResult> checks;
    std::optional<McEstimate> mc;
    if (cfg.samples > 0) {
        mc = mc_joint_pmf(p, cfg.m, cfg.n, cfg.s, cfg.t, cfg.samples, cfg.seed);
        const Verdict v = compare(r.value, *mc);
        const double z = mc->std_error > 0 ? std::fabs(r.value - mc->value) / mc->std_error : 0.0;
        checks.push_back({"monte-carlo", v, z, McTolerance{}.k,
                          "estimate=" + format_double(mc->value) + " se=" + format_double(mc->std_error)});
    }
    auto opt = [](const std::optional<double>& v) { return v ? format_prob(*v) : std::string(); };
    Csv csv;
    csv.row({"m", "n", "s", "t", "lambda", "mu", "a", "y", "z", "region", "method", "value", "raw", "closed_form",
             "quadrature", "mc_value", "mc_std_error"});
    csv.row({std::to_string(r.m), std::to_string(r.n), format_double(r.s), format_double(r.t), format_double(p.lambda()),
             format_double(p.mu()), format_double(p.a()), format_double(r.coords.y), format_double(r.coords.z),
             std::string(to_string(r.coords.region)), std::string(to_string(r.method_used)), format_prob(r.value),
             format_prob(r.raw), opt(r.closed_form), opt(r.quadrature), mc ? format_prob(mc->value) : "",
             mc ? format_prob(mc->std_error) : ""});

    ordered_json res;
    res["m"] = r.m;
    res["n"] = r.n;
    res["s"] = r.s;
    res["t"] = r.t;
    res["y"] = r.coords.y;
    res["z"] = r.coords.z;
    res["region"] = to_string(r.coords.region);
    res["method"] = to_string(r.method_used);
    res["value"] = r.value;
    res["raw"] = r.raw;
    res["closed_form"] = r.closed_form ? ordered_json(*r.closed_form) : ordered_json(nullptr);
    res["quadrature"] = r.quadrature ? ordered_json(*r.quadrature) : ordered_json(nullptr);
    if (mc) res["monte_carlo"] = {{"value", mc->value}, {"std_error", mc->std_error}, {"samples", mc->n_samples}};
    return finish(cfg, {{"", csv.take()}}, std::move(res), std::move(checks));
}

Outcome cmd_table(const RunConfig& cfg) {
    const ModelParams p(cfg.lambda, cfg.mu, cfg.a);
    const PmfTable tab = pmf_table(p, cfg.s, cfg.t, cfg.m_max, cfg.n_max, cfg.method);
    const double mu_s = p.mu() * cfg.s;
    const double lambda_t = p.lambda() * cfg.t;
    const double tail_n = special::regularized_gamma(cfg.n_max + 1, lambda_t).p;
    const double tail_m = special::regularized_gamma(cfg.m_max + 1, mu_s).p;

    double row_err = 0, col_err = 0;
    for (unsigned m = 0; m <= cfg.m_max; ++m)
        row_err = std::max(row_err, std::fabs(tab.row_sums[m] - special::poisson_weight(m, mu_s)));
    for (unsigned n = 0; n <= cfg.n_max; ++n)
        col_err = std::max(col_err, std::fabs(tab.column_sums[n] - special::poisson_weight(n, lambda_t)));
    const double marginal_slack = 1e-8;
    std::vector<CheckResult> checks{
        {"normalization-deficit", tab.normalization_ok() ? Verdict::Pass : Verdict::Fail, tab.deficit, tab.tail_bound,
         "deficit must lie in [-1e-9, tail_bound + 1e-9]"},
        {"row-marginals", row_err <= tail_n + marginal_slack ? Verdict::Pass : Verdict::Fail, row_err,
         tail_n + marginal_slack, "row sums against Poisson(mu s) weights"},
        {"column-marginals", col_err <= tail_m + marginal_slack ? Verdict::Pass : Verdict::Fail, col_err,
         tail_m + marginal_slack, "column sums against Poisson(lambda t) weights"},
    };

    const std::size_t width = cfg.n_max + 4;
    auto padded = [&](std::vector<std::string> r) {
        r.resize(width);
        return r;
    };
    Csv csv;
    std::vector<std::string> header{"m"};
    for (unsigned n = 0; n <= cfg.n_max; ++n) header.push_back("n=" + std::to_string(n));
    header.push_back("row_sum");
    header.push_back("poisson_mu_s");
    csv.row(header);
    for (unsigned m = 0; m <= cfg.m_max; ++m) {
        std::vector<std::string> r{std::to_string(m)};
        for (unsigned n = 0; n <= cfg.n_max; ++n) r.push_back(format_prob(tab.entries[m][n]));
        r.push_back(format_prob(tab.row_sums[m]));
        r.push_back(format_prob(special::poisson_weight(m, mu_s)));
        csv.row(r);
    }
    std::vector<std::string> cols{"column_sum"};
    std::vector<std::string> pois{"poisson_lambda_t"};
    for (unsigned n = 0; n <= cfg.n_max; ++n) {
        cols.push_back(format_prob(tab.column_sums[n]));
        pois.push_back(format_prob(special::poisson_weight(n, lambda_t)));
    }
    cols.push_back(format_prob(tab.total));
    csv.row(padded(cols));
    csv.row(padded(pois));
    csv.row(padded({"deficit", format_prob(tab.deficit)}));
    csv.row(padded({"tail_bound", format_prob(tab.tail_bound)}));

    ordered_json res;
    res["s"] = cfg.s;
    res["t"] = cfg.t;
    res["m_max"] = tab.m_max;
    res["n_max"] = tab.n_max;
    res["entries"] = tab.entries;
    res["row_sums"] = tab.row_sums;
    res["column_sums"] = tab.column_sums;
    res["total"] = tab.total;
    res["deficit"] = tab.deficit;
    res["tail_bound"] = tab.tail_bound;
    res["cells_by_method"] = {{"lemma-exact", tab.lemma_cells},
                              {"closed", tab.closed_cells},
                              {"quadrature", tab.quadrature_cells}};
    return finish(cfg, {{"", csv.take()}}, std::move(res), std::move(checks));
}

Outcome cmd_copula(const RunConfig& cfg) {
    const CopulaId id = make_copula(cfg);
    const CopulaGridCheck g = check_copula_grid(id, cfg.grid);
    std::vector<CheckResult> checks{
        {"grounded", compare(g.groundedness_error, 0.0, kCopulaTolerance), g.groundedness_error, kCopulaTolerance,
         describe(id)},
        {"two-increasing", g.min_rectangle_volume >= -kCopulaTolerance ? Verdict::Pass : Verdict::Fail,
         g.min_rectangle_volume, -kCopulaTolerance, describe(id)},
        {"frechet-bounds", g.bound_violation <= kCopulaTolerance ? Verdict::Pass : Verdict::Fail, g.bound_violation,
         kCopulaTolerance, describe(id)},
    };
    Csv csv;
    csv.row({"u", "v", "C", "lower", "upper"});
    ordered_json cells = ordered_json::array();
    for (unsigned i = 0; i < cfg.grid; ++i) {
        const double u = i + 1 == cfg.grid ? 1.0 : double(i) / double(cfg.grid - 1);
        for (unsigned j = 0; j < cfg.grid; ++j) {
            const double v = j + 1 == cfg.grid ? 1.0 : double(j) / double(cfg.grid - 1);
            const double c = copula_eval(id, u, v);
            const auto b = frechet_bounds(u, v);
            csv.row({format_double(u), format_double(v), format_prob(c), format_prob(b.lower), format_prob(b.upper)});
            cells.push_back({u, v, c});
        }
    }
    ordered_json res;
    res["copula"] = describe(id);
    res["grid"] = cfg.grid;
    res["cells_columns"] = {"u", "v", "C"};
    res["cells"] = std::move(cells);
    return finish(cfg, {{"", csv.take()}}, std::move(res), std::move(checks));
}

Outcome cmd_verify(const RunConfig& cfg) {
    VerifyOptions opts;
    opts.lambda = cfg.lambda;
    opts.mu = cfg.mu;
    opts.seed = cfg.seed;
    if (cfg.samples > 0) opts.samples = cfg.samples;
    if (std::find(opts.a_values.begin(), opts.a_values.end(), cfg.a) == opts.a_values.end()) {
        opts.a_values.push_back(cfg.a);
        std::sort(opts.a_values.begin(), opts.a_values.end());
    }
    std::vector<CheckResult> checks = run_verification(opts);
    ordered_json res;
    res["overall"] = to_string(overall_verdict(checks));
    res["n_checks"] = checks.size();
    res["samples"] = opts.samples;
    res["a_values"] = opts.a_values;
    Outcome out;
    out.exit_code = exit_code_for(checks);
    if (cfg.format == OutputFormat::Json) {
        ordered_json doc;
        doc["config"] = config_json(cfg);
        doc["results"] = std::move(res);
        doc["checks"] = checks_json(checks);
        out.artifacts.push_back({"", doc.dump(2) + "\n"});
    } else {
        out.artifacts.push_back({"", checks_csv(checks)});
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_artifacts(const RunConfig& cfg, const std::vector<Artifact>& artifacts, std::ostream& out) {
    if (cfg.output.empty() || cfg.output == "-") {
        for (std::size_t i = 0; i < artifacts.size(); ++i) {
            if (i) out << '\n';
            out << artifacts[i].content;
        }
        out.flush();
        if (!out) throw IoError("failed writing to standard output");
        return;
    }
    std::string stem = cfg.output;
    std::string ext;
    const auto dot = stem.rfind('.');
    const auto slash = stem.find_last_of('/');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
        ext = stem.substr(dot);
        stem.resize(dot);
    }
    for (const auto& a : artifacts) {
        const std::string path = stem + a.suffix + ext;
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open '" + path + "' for writing");
        f << a.content;
        f.close();
        if (!f) throw IoError("failed writing '" + path + "'");
    }
}

}  // namespace

std::string_view to_string(Command c) {
    switch (c) {
        case Command::Simulate: return "simulate";
        case Command::Pmf: return "pmf";
        case Command::Table: return "table";
        case Command::Copula: return "copula";
        case Command::Verify: return "verify";
    }
    return "?";
}

std::string_view to_string(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "json"; }

std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string format_prob(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {"command", "lambda", "mu",    "a",       "seed",    "output",
                                                  "format",  "method", "renewals", "s",     "t",       "m",
                                                  "n",       "m-max",  "n-max", "samples", "grid",    "copula",
                                                  "b"};
    return keys;
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
    if (key == "command") cfg.command = parse_command(value);
    else if (key == "lambda") cfg.lambda = parse_number<double>(key, value);
    else if (key == "mu") cfg.mu = parse_number<double>(key, value);
    else if (key == "a") cfg.a = parse_number<double>(key, value);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "output") cfg.output = std::string(value);
    else if (key == "format") {
        if (value == "csv") cfg.format = OutputFormat::Csv;
        else if (value == "json") cfg.format = OutputFormat::Json;
        else throw UsageError("format must be csv or json");
    } else if (key == "method") cfg.method = parse_method(value);
    else if (key == "renewals") cfg.renewals = parse_number<std::uint64_t>(key, value);
    else if (key == "s") cfg.s = parse_number<double>(key, value);
    else if (key == "t") cfg.t = parse_number<double>(key, value);
    else if (key == "m") cfg.m = parse_unsigned(key, value);
    else if (key == "n") cfg.n = parse_unsigned(key, value);
    else if (key == "m-max") cfg.m_max = parse_unsigned(key, value);
    else if (key == "n-max") cfg.n_max = parse_unsigned(key, value);
    else if (key == "samples") cfg.samples = parse_number<std::uint64_t>(key, value);
    else if (key == "grid") cfg.grid = parse_unsigned(key, value);
    else if (key == "copula") cfg.copula = std::string(value);
    else if (key == "b") cfg.b = parse_number<double>(key, value);
    else throw UsageError("unknown setting '" + std::string(key) + "'");
}

std::string serialize_config(const RunConfig& cfg) {
    const std::vector<std::pair<std::string, std::string>> kv = {
        {"command", std::string(to_string(cfg.command))},
        {"lambda", format_double(cfg.lambda)},
        {"mu", format_double(cfg.mu)},
        {"a", format_double(cfg.a)},
        {"seed", u64(cfg.seed)},
        {"output", cfg.output},
        {"format", std::string(to_string(cfg.format))},
        {"method", std::string(to_string(cfg.method))},
        {"renewals", u64(cfg.renewals)},
        {"s", format_double(cfg.s)},
        {"t", format_double(cfg.t)},
        {"m", std::to_string(cfg.m)},
        {"n", std::to_string(cfg.n)},
        {"m-max", std::to_string(cfg.m_max)},
        {"n-max", std::to_string(cfg.n_max)},
        {"samples", u64(cfg.samples)},
        {"grid", std::to_string(cfg.grid)},
        {"copula", cfg.copula},
        {"b", format_double(cfg.b)},
    };
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

RunConfig parse_config_text(std::string_view text, RunConfig base) {
    std::size_t pos = 0;
    unsigned line_no = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string_view::npos || line[first] == '#') {
            if (end == text.size()) break;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw UsageError("config line " + std::to_string(line_no) + ": expected key=value");
        auto trim = [](std::string_view s) {
            const auto b = s.find_first_not_of(" \t");
            if (b == std::string_view::npos) return std::string_view{};
            const auto e = s.find_last_not_of(" \t");
            return s.substr(b, e - b + 1);
        };
        apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        if (end == text.size()) break;
    }
    return base;
}

void validate(const RunConfig& cfg) {
    const auto fail = [](const std::string& msg) { throw UsageError(msg); };
    if (cfg.command == Command::Copula) {
        if (std::find(copula_families().begin(), copula_families().end(), cfg.copula) == copula_families().end())
            fail("unknown copula family '" + cfg.copula + "'");
        try {
            sdpoisson::validate(make_copula(cfg));
        } catch (const DomainError& e) {
            fail(e.what());
        }
        if (cfg.grid < 2 || cfg.grid > kMaxCopulaGrid) fail("grid must lie in [2, 2000]");
        return;
    }
    try {
        (void)ModelParams(cfg.lambda, cfg.mu, cfg.a);
    } catch (const DomainError& e) {
        fail(e.what());
    }
    switch (cfg.command) {
        case Command::Simulate:
            if (cfg.renewals == 0 || cfg.renewals > kMaxRenewals) fail("renewals must lie in [1, 10^7]");
            break;
        case Command::Pmf:
            if (!(cfg.s > 0) || !(cfg.t > 0) || !std::isfinite(cfg.s) || !std::isfinite(cfg.t))
                fail("s and t must be finite and > 0");
            if (cfg.samples != 0 && cfg.samples < kMinMcSamples) fail("samples must be 0 or at least 1000");
            break;
        case Command::Table:
            if (!(cfg.s > 0) || !(cfg.t > 0) || !std::isfinite(cfg.s) || !std::isfinite(cfg.t))
                fail("s and t must be finite and > 0");
            if (cfg.m_max > kMaxTableOrder || cfg.n_max > kMaxTableOrder) fail("m-max and n-max must be <= 200");
            break;
        case Command::Verify:
            if (cfg.samples != 0 && cfg.samples < kMinMcSamples) fail("samples must be 0 or at least 1000");
            break;
        case Command::Copula: break;
    }
}

Outcome execute(const RunConfig& cfg) {
    validate(cfg);
    switch (cfg.command) {
        case Command::Simulate: return cmd_simulate(cfg);
        case Command::Pmf: return cmd_pmf(cfg);
        case Command::Table: return cmd_table(cfg);
        case Command::Copula: return cmd_copula(cfg);
        case Command::Verify: return cmd_verify(cfg);
    }
    throw UsageError("no command");
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Correlated Poisson processes from self-decomposable exponential renewals"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    struct Sub {
        Command command;
        CLI::App* app;
        std::vector<std::pair<std::string, CLI::Option*>> options;
        std::string config_path;
    };
    std::vector<std::unique_ptr<Sub>> subs;
    std::vector<std::string> values(config_keys().size() * 5);
    const std::vector<std::pair<Command, const char*>> commands = {
        {Command::Simulate, "Simulate renewal pairs, arrival chains and compensated traces"},
        {Command::Pmf, "Evaluate one joint probability p_{m,n}(s,t)"},
        {Command::Table, "Evaluate the joint pmf table up to m-max, n-max"},
        {Command::Copula, "Evaluate a copula on a grid and check its properties"},
        {Command::Verify, "Run the verification suite"},
    };
    std::size_t slot = 0;
    for (const auto& [cmd, help] : commands) {
        auto sub = std::make_unique<Sub>();
        sub->command = cmd;
        sub->app = app.add_subcommand(std::string(to_string(cmd)), help);
        for (const auto& key : command_keys(cmd))
            sub->options.emplace_back(key, sub->app->add_option("--" + key, values[slot++], key_help(key)));
        sub->app->add_option("--config", sub->config_path, "flat key=value file; flags override it");
        subs.push_back(std::move(sub));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        const Sub* chosen = nullptr;
        for (const auto& s : subs)
            if (s->app->parsed()) chosen = s.get();
        if (!chosen) throw UsageError("no command given");
        RunConfig cfg;
        cfg.command = chosen->command;
        if (!chosen->config_path.empty()) {
            cfg = parse_config_text(read_file(chosen->config_path), cfg);
            cfg.command = chosen->command;
        }
        for (const auto& [key, opt] : chosen->options)
            if (opt->count() > 0) apply_setting(cfg, key, opt->as<std::string>());
        const Outcome outcome = execute(cfg);
        write_artifacts(cfg, outcome.artifacts, out);
        return outcome.exit_code;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const ConsistencyError& e) {
        err << "numerical inconsistency: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const IntegrationError& e) {
        err << "integration failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const PathExhaustedError& e) {
        err << "simulation error: " << e.what() << '\n';
        return kExitNumerical;
    }
}

}  // namespace sdpoisson::cli
