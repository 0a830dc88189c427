#include "sdpoisson/verification.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "sdpoisson/errors.hpp"
#include "sdpoisson/joint_pmf.hpp"
#include "sdpoisson/random.hpp"
#include "sdpoisson/special_fn.hpp"

namespace sdpoisson {

namespace {

constexpr unsigned kOracleOrder = 6;
constexpr double kOracleTolerance = 1e-8;
constexpr unsigned kContinuityOrder = 5;
constexpr double kContinuityOffset = 1e-6;
constexpr double kContinuityTolerance = 1e-5;
constexpr unsigned kTableOrder = 40;
constexpr double kMarginalTolerance = 1e-8;
constexpr unsigned kMcOrder = 4;

std::string num(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
    return std::string(buf, r.ptr);
}

std::string point_label(const GridPoint& g) {
    return "a=" + num(g.a) + " s=" + num(g.s) + " t=" + num(g.t);
}

CheckResult oracle_check(const ModelParams& p, const GridPoint& g) {
    PmfOptions closed;
    closed.method = Method::ClosedForm;
    PmfOptions quad;
    quad.method = Method::Quadrature;
    double worst = 0;
    std::string where;
    try {
        for (unsigned m = 0; m <= kOracleOrder; ++m) {
            for (unsigned n = 0; n <= kOracleOrder; ++n) {
                const double c = joint_pmf(p, m, n, g.s, g.t, closed).raw;
                const double q = joint_pmf(p, m, n, g.s, g.t, quad).raw;
                const double d = std::fabs(c - q);
                if (!(d <= worst)) {
                    worst = d;
                    where = " worst at (m,n)=(" + std::to_string(m) + "," + std::to_string(n) + ")";
                }
            }
        }
    } catch (const std::exception& e) {
        return {"closed-vs-quadrature", Verdict::Fail, worst, kOracleTolerance, point_label(g) + " " + e.what()};
    }
    return {"closed-vs-quadrature", compare(worst, 0.0, kOracleTolerance), worst, kOracleTolerance,
            point_label(g) + where};
}

CheckResult lemma_check(const ModelParams& p, const std::vector<GridPoint>& grid) {
    unsigned cells = 0;
    unsigned bad = 0;
    for (const auto& g : grid) {
        if (g.a != p.a() || g.ratio > 1) continue;
        for (unsigned m = 0; m <= kOracleOrder; ++m) {
            for (unsigned n = m + 1; n <= kOracleOrder; ++n) {
                const PmfReport r = joint_pmf(p, m, n, g.s, g.t);
                ++cells;
                if (r.method_used != MethodUsed::LemmaExact || r.value != 0.0) ++bad;
            }
        }
    }
    return {"lemma-exact-zero", bad == 0 ? Verdict::Pass : Verdict::Fail, double(bad), 0,
            "a=" + num(p.a()) + " cells=" + std::to_string(cells)};
}

CheckResult continuity_check(double a) {
    double worst = 0;
    for (double y : {0.5, 2.0, 5.0}) {
        const auto lo = make_reduced_coords(y, -kContinuityOffset);
        const auto hi = make_reduced_coords(y, kContinuityOffset);
        for (unsigned m = 0; m <= kContinuityOrder; ++m)
            for (unsigned n = 0; n <= kContinuityOrder; ++n)
                worst = std::max(worst, std::fabs(joint_pmf_reduced(m, n, lo, a).raw -
                                                  joint_pmf_reduced(m, n, hi, a).raw));
    }
    return {"continuity-at-z0", compare(worst, 0.0, kContinuityTolerance), worst, kContinuityTolerance,
            "a=" + num(a) + " y in {0.5,2,5}"};
}

std::vector<CheckResult> normalization_checks(const ModelParams& p, const GridPoint& g) {
    const PmfTable tab = pmf_table(p, g.s, g.t, kTableOrder, kTableOrder);
    double worst_marginal = 0;
    for (unsigned m = 0; m < kTableOrder; ++m)
        worst_marginal = std::max(worst_marginal,
                                  std::fabs(tab.row_sums[m] - special::poisson_weight(m, p.mu() * g.s)));
    for (unsigned n = 0; n < kTableOrder; ++n)
        worst_marginal = std::max(worst_marginal,
                                  std::fabs(tab.column_sums[n] - special::poisson_weight(n, p.lambda() * g.t)));
    const std::string label = point_label(g);
    return {
        {"normalization-deficit", tab.normalization_ok() ? Verdict::Pass : Verdict::Fail, tab.deficit,
         tab.tail_bound, label},
        {"marginal-sums", compare(worst_marginal, 0.0, kMarginalTolerance), worst_marginal, kMarginalTolerance,
         label + " rows/columns below the truncation order"},
    };
}

CheckResult monte_carlo_check(const ModelParams& p, const GridPoint& g, const VerifyOptions& opts,
                              std::uint64_t seed) {
    const CountHistogram h = mc_histogram(p, g.s, g.t, kMcOrder, kMcOrder, opts.samples, seed, opts.workers);
    Verdict v = Verdict::Pass;
    double worst_z = 0;
    std::string where;
    for (unsigned m = 0; m <= kMcOrder; ++m) {
        for (unsigned n = 0; n <= kMcOrder; ++n) {
            const double closed = joint_pmf(p, m, n, g.s, g.t).value;
            const McEstimate est = estimate_from(h, m, n, seed);
            const McTolerance tol{};
            v = combine(v, compare(closed, est, tol));
            const double p0 = std::clamp(closed, 0.0, 1.0);
            const double se = std::max(est.std_error, std::sqrt(p0 * (1 - p0) / double(est.n_samples)));
            const double zscore = se > 0 ? std::fabs(closed - est.value) / se : 0.0;
            if (zscore > worst_z) {
                worst_z = zscore;
                where = " worst at (m,n)=(" + std::to_string(m) + "," + std::to_string(n) + ")";
            }
        }
    }
    return {"monte-carlo", v, worst_z, McTolerance{}.k,
            point_label(g) + " samples=" + std::to_string(opts.samples) + " censored=" +
                std::to_string(h.censored()) + where};
}

}  // namespace

std::vector<GridPoint> verification_grid(double lambda, double mu, const std::vector<double>& a_values) {
    std::vector<GridPoint> grid;
    for (double a : a_values)
        for (double s : {0.5, 1.0, 2.0, 3.0, 4.0})
            for (double ratio : {0.25, 0.6, 1.4, 2.2, 3.5}) grid.push_back({a, s, ratio * a * mu * s / lambda, ratio});
    return grid;
}

std::vector<CheckResult> run_verification(const VerifyOptions& opts) {
    if (!opts.skip_monte_carlo && opts.samples < kMinMcSamples)
        throw DomainError("run_verification: need at least 1000 Monte Carlo samples");
    const auto grid = verification_grid(opts.lambda, opts.mu, opts.a_values);
    std::vector<CheckResult> out;
    for (const auto& g : grid) out.push_back(oracle_check(ModelParams(opts.lambda, opts.mu, g.a), g));
    for (double a : opts.a_values) out.push_back(lemma_check(ModelParams(opts.lambda, opts.mu, a), grid));
    for (double a : opts.a_values) out.push_back(continuity_check(a));
    for (const auto& g : grid) {
        if (g.s != 2.0 || (g.ratio != 0.6 && g.ratio != 2.2)) continue;
        for (auto& c : normalization_checks(ModelParams(opts.lambda, opts.mu, g.a), g)) out.push_back(std::move(c));
    }
    if (!opts.skip_monte_carlo) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto& g = grid[i];
            out.push_back(monte_carlo_check(ModelParams(opts.lambda, opts.mu, g.a), g, opts, derive_seed(opts.seed, 1000 + i)));
        }
    }
    return out;
}

Verdict overall_verdict(const std::vector<CheckResult>& checks) {
    Verdict v = Verdict::Pass;
    for (const auto& c : checks) v = combine(v, c.verdict);
    return v;
}

}  // namespace sdpoisson
