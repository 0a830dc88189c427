#pragma once

// Monte Carlo estimation of p_{m,n}(s,t) and the statistical comparisons used
// to turn closed forms into verdicts.
//
// Parallel streams: a run with master seed S and W workers gives worker i the
// stream RandomStream(derive_seed(S, i)) and the sample share
//     n_i = n / W + (i < n % W ? 1 : 0).
// Workers fill private count histograms; the merged histogram is their
// element-wise sum, taken in worker order. Integer addition makes the result
// independent of thread scheduling.
//
// Each path draws triples until both chains have passed their horizon, so
// counts are exact. The renewal cap ceil(r + 12 sqrt(r) + 30), r = max(lambda
// t, mu s), is a hard limit; a path reaching it is tallied as censored.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdpoisson/mc_estimate.hpp"
#include "sdpoisson/params.hpp"

namespace sdpoisson {

inline constexpr unsigned kDefaultWorkers = 4;
inline constexpr std::uint64_t kMinMcSamples = 1000;

/// ceil(r + 12 sqrt(r) + 30) with r = max(lambda t, mu s).
std::size_t renewal_cap(const ModelParams& params, double s, double t);

/// Joint counts of (M(s), N(t)). Cell (m, n) for m <= m_max, n <= n_max;
/// larger counts fall into the overflow bin of their row or column.
class CountHistogram {
  public:
    CountHistogram(unsigned m_max, unsigned n_max);

    unsigned m_max() const noexcept { return m_max_; }
    unsigned n_max() const noexcept { return n_max_; }
    std::uint64_t n_samples() const noexcept { return n_samples_; }
    std::uint64_t censored() const noexcept { return censored_; }

    void record(unsigned m, unsigned n);
    void record_censored();
    /// Element-wise sum; throws DomainError on a shape mismatch.
    void merge(const CountHistogram& other);

    /// Count of exactly (m, n); m > m_max or n > n_max reads an overflow bin.
    std::uint64_t count(unsigned m, unsigned n) const;
    /// Paths with M(s) = m and N(t) = n, m <= m_max and n <= n_max.
    std::uint64_t exact_count(unsigned m, unsigned n) const;

    friend bool operator==(const CountHistogram&, const CountHistogram&) = default;

  private:
    std::size_t index(unsigned m, unsigned n) const;

    unsigned m_max_;
    unsigned n_max_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t n_samples_ = 0;
    std::uint64_t censored_ = 0;
};

/// Histogram from a single stream seeded with `stream_seed`.
CountHistogram mc_histogram_stream(const ModelParams& params, double s, double t, unsigned m_max,
                                   unsigned n_max, std::uint64_t n_samples, std::uint64_t stream_seed);

/// The documented parallel run: worker shares and seeds as above, merged
/// in worker order.
CountHistogram mc_histogram(const ModelParams& params, double s, double t, unsigned m_max, unsigned n_max,
                            std::uint64_t n_samples, std::uint64_t seed, unsigned workers = kDefaultWorkers);

/// Frequency estimate of one cell of a histogram run with master `seed`.
McEstimate estimate_from(const CountHistogram& h, unsigned m, unsigned n, std::uint64_t seed);

/// Frequency of {M(s) = m, N(t) = n}; throws DomainError when n_samples < 1000.
McEstimate mc_joint_pmf(const ModelParams& params, unsigned m, unsigned n, double s, double t,
                        std::uint64_t n_samples, std::uint64_t seed);

enum class Verdict { Pass, Fail, Inconclusive };

std::string_view to_string(Verdict v);

struct McTolerance {
    /// Half-width of the acceptance band in standard errors.
    double k = 3.5;
    /// Largest standard error that still allows a decision.
    double resolution = 0.01;
};

/// Pass when |closed - estimate| <= k * se. The standard error is the larger
/// of the estimate's own and sqrt(p (1 - p) / n) at p = closed, so a cell
/// with zero hits is judged against the spread the closed value implies.
Verdict compare(double closed, const McEstimate& oracle, const McTolerance& tol = {});

/// Pass when |closed - quadrature| <= abs_tol.
Verdict compare(double closed, double quadrature, double abs_tol);

/// Worst verdict: Fail over Inconclusive over Pass.
Verdict combine(Verdict a, Verdict b);

struct CorrelationEstimate {
    double r = 0;
    /// Delta-method standard error, valid without normality.
    double std_error = 0;
    std::size_t n = 0;
};

CorrelationEstimate sample_correlation(std::span<const double> x, std::span<const double> y);

/// sup |F_n - F| against Exp(rate).
double ks_statistic_exponential(std::vector<double> sample, double rate);

/// Asymptotic one-sample critical value with Stephens' finite-n correction.
double ks_critical_value(std::size_t n, double alpha);

}  // namespace sdpoisson
