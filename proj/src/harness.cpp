#include "sdpoisson/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "sdpoisson/errors.hpp"
#include "sdpoisson/random.hpp"
#include "sdpoisson/sd_exponential.hpp"

namespace sdpoisson {

std::size_t renewal_cap(const ModelParams& params, double s, double t) {
    if (!(s >= 0) || !(t >= 0)) throw DomainError("renewal_cap: horizons must be >= 0");
    const double r = std::max(params.lambda() * t, params.mu() * s);
    return static_cast<std::size_t>(std::ceil(r + 12 * std::sqrt(r) + 30));
}

CountHistogram::CountHistogram(unsigned m_max, unsigned n_max)
    : m_max_(m_max), n_max_(n_max), counts_(std::size_t(m_max + 2) * (n_max + 2), 0) {}

std::size_t CountHistogram::index(unsigned m, unsigned n) const {
    return std::size_t(std::min(m, m_max_ + 1)) * (n_max_ + 2) + std::min(n, n_max_ + 1);
}

void CountHistogram::record(unsigned m, unsigned n) {
    ++counts_[index(m, n)];
    ++n_samples_;
}

void CountHistogram::record_censored() {
    ++censored_;
    ++n_samples_;
}

void CountHistogram::merge(const CountHistogram& other) {
    if (other.m_max_ != m_max_ || other.n_max_ != n_max_) throw DomainError("CountHistogram::merge: shape mismatch");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    n_samples_ += other.n_samples_;
    censored_ += other.censored_;
}

std::uint64_t CountHistogram::count(unsigned m, unsigned n) const { return counts_[index(m, n)]; }

std::uint64_t CountHistogram::exact_count(unsigned m, unsigned n) const {
    if (m > m_max_ || n > n_max_) throw DomainError("CountHistogram::exact_count: cell outside the histogram");
    return counts_[index(m, n)];
}

CountHistogram mc_histogram_stream(const ModelParams& params, double s, double t, unsigned m_max,
                                   unsigned n_max, std::uint64_t n_samples, std::uint64_t stream_seed) {
    if (!(s > 0) || !(t > 0)) throw DomainError("mc_histogram: s and t must be > 0");
    CountHistogram h(m_max, n_max);
    RandomStream rng(stream_seed);
    const std::size_t cap = renewal_cap(params, s, t);
    const double a = params.a();
    const double s_scale = params.lambda() / params.mu();
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        double y_sum = 0;
        double zeta = 0;
        unsigned n_count = 0;
        unsigned m_count = 0;
        bool done = false;
        for (std::size_t k = 1; k <= cap; ++k) {
            const TripleSample tr = sample_triple(params, rng);
            y_sum += tr.y;
            zeta += static_cast<double>(tr.b) * tr.z;
            const double t_k = a * y_sum + zeta;
            const double s_k = s_scale * y_sum;
            if (t_k <= t) n_count = static_cast<unsigned>(k);
            if (s_k <= s) m_count = static_cast<unsigned>(k);
            if (t_k > t && s_k > s) {
                done = true;
                break;
            }
        }
        if (done)
            h.record(m_count, n_count);
        else
            h.record_censored();
    }
    return h;
}

CountHistogram mc_histogram(const ModelParams& params, double s, double t, unsigned m_max, unsigned n_max,
                            std::uint64_t n_samples, std::uint64_t seed, unsigned workers) {
    if (workers == 0) throw DomainError("mc_histogram: workers must be >= 1");
    std::vector<CountHistogram> parts(workers, CountHistogram(m_max, n_max));
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            const std::uint64_t share = n_samples / workers + (w < n_samples % workers ? 1 : 0);
            pool.emplace_back([&, w, share] {
                try {
                    parts[w] = mc_histogram_stream(params, s, t, m_max, n_max, share, derive_seed(seed, w));
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    CountHistogram merged(m_max, n_max);
    for (const auto& p : parts) merged.merge(p);
    return merged;
}

McEstimate estimate_from(const CountHistogram& h, unsigned m, unsigned n, std::uint64_t seed) {
    if (h.n_samples() == 0) throw DomainError("estimate_from: empty histogram");
    const double total = static_cast<double>(h.n_samples());
    const double v = static_cast<double>(h.exact_count(m, n)) / total;
    return {v, std::sqrt(v * (1 - v) / total), h.n_samples(), seed};
}

McEstimate mc_joint_pmf(const ModelParams& params, unsigned m, unsigned n, double s, double t,
                        std::uint64_t n_samples, std::uint64_t seed) {
    if (n_samples < kMinMcSamples) throw DomainError("mc_joint_pmf: need at least 1000 samples");
    const CountHistogram h = mc_histogram(params, s, t, m, n, n_samples, seed);
    return estimate_from(h, m, n, seed);
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

Verdict compare(double closed, const McEstimate& oracle, const McTolerance& tol) {
    if (oracle.n_samples == 0) return Verdict::Inconclusive;
    const double p = std::clamp(closed, 0.0, 1.0);
    const double null_se = std::sqrt(p * (1 - p) / static_cast<double>(oracle.n_samples));
    const double se = std::max(oracle.std_error, null_se);
    if (se > tol.resolution) return Verdict::Inconclusive;
    return std::fabs(closed - oracle.value) <= tol.k * se ? Verdict::Pass : Verdict::Fail;
}

Verdict compare(double closed, double quadrature, double abs_tol) {
    if (!std::isfinite(closed) || !std::isfinite(quadrature)) return Verdict::Fail;
    return std::fabs(closed - quadrature) <= abs_tol ? Verdict::Pass : Verdict::Fail;
}

Verdict combine(Verdict a, Verdict b) {
    if (a == Verdict::Fail || b == Verdict::Fail) return Verdict::Fail;
    if (a == Verdict::Inconclusive || b == Verdict::Inconclusive) return Verdict::Inconclusive;
    return Verdict::Pass;
}

CorrelationEstimate sample_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 3) throw DomainError("sample_correlation: need matched samples, n >= 3");
    const std::size_t n = x.size();
    const double dn = static_cast<double>(n);
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / dn;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / dn;
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0 || syy == 0) throw DomainError("sample_correlation: degenerate sample");
    const double r = sxy / std::sqrt(sxx * syy);
    const double sx = std::sqrt(sxx / dn), sy = std::sqrt(syy / dn);
    // Influence function of r: u v - r (u^2 + v^2) / 2 on standardized data.
    double mean_psi = 0, sq_psi = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = (x[i] - mx) / sx, v = (y[i] - my) / sy;
        const double psi = u * v - r * (u * u + v * v) / 2;
        mean_psi += psi;
        sq_psi += psi * psi;
    }
    mean_psi /= dn;
    const double var_psi = sq_psi / dn - mean_psi * mean_psi;
    return {r, std::sqrt(std::max(0.0, var_psi) / dn), n};
}

double ks_statistic_exponential(std::vector<double> sample, double rate) {
    if (sample.empty()) throw DomainError("ks_statistic_exponential: empty sample");
    if (!(rate > 0)) throw DomainError("ks_statistic_exponential: rate must be > 0");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = sample[i] <= 0 ? 0.0 : -std::expm1(-rate * sample[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_critical_value(std::size_t n, double alpha) {
    if (n == 0 || !(alpha > 0 && alpha < 1)) throw DomainError("ks_critical_value: need n >= 1, alpha in (0,1)");
    const double c = std::sqrt(-std::log(alpha / 2) / 2);
    const double rn = std::sqrt(static_cast<double>(n));
    return c / (rn + 0.12 + 0.11 / rn);
}

}  // namespace sdpoisson
