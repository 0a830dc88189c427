#pragma once

// Correlated renewal chains built from i.i.d. self-decomposed pairs:
//   T_n = sum_k X_k,   S_n = (lambda/mu) sum_k Y_k,   zeta_n = sum_k B_k Z_k
// so that T_n = (a mu / lambda) S_n + zeta_n and T_n >= (a mu/lambda) S_n.
// N(t) counts T-arrivals (rate lambda), M(s) counts S-arrivals (rate mu).

#include <cstdint>
#include <vector>

#include "sdpoisson/params.hpp"
#include "sdpoisson/random.hpp"
#include "sdpoisson/sd_exponential.hpp"
#include "sdpoisson/special_fn.hpp"

namespace sdpoisson {

enum class Counter { M, N };

/// Immutable record of one simulated pair of renewal chains. Index 0 holds
/// the origin (all sums zero); index n holds the state after n renewals.
class RenewalPath {
  public:
    RenewalPath(const ModelParams& params, std::uint64_t seed, std::vector<double> y_sums,
                std::vector<double> zeta, std::vector<unsigned> b_count);

    const ModelParams& params() const noexcept { return params_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::size_t renewals() const noexcept { return t_.size() - 1; }

    /// T_0 = 0, T_1, ..., T_K (rate lambda).
    const std::vector<double>& t_arrivals() const noexcept { return t_; }
    /// S_0 = 0, S_1, ..., S_K (rate mu).
    const std::vector<double>& s_arrivals() const noexcept { return s_; }
    /// B(n): number of accepted Z's among the first n renewals.
    const std::vector<unsigned>& b_count() const noexcept { return b_count_; }
    /// zeta_n = sum of the accepted Z's, i.e. R_{B(n)}.
    const std::vector<double>& zeta() const noexcept { return zeta_; }
    /// Running sums of the equal-rate Y draws.
    const std::vector<double>& y_sums() const noexcept { return y_sums_; }

  private:
    ModelParams params_;
    std::uint64_t seed_;
    std::vector<double> y_sums_;
    std::vector<double> zeta_;
    std::vector<unsigned> b_count_;
    std::vector<double> t_;
    std::vector<double> s_;
};

/// Builds a path from an arbitrary variate source (sample_triple order).
template <VariateSource R>
RenewalPath simulate_path(const ModelParams& params, std::size_t n_renewals, R& rng, std::uint64_t seed_tag = 0) {
    std::vector<double> y_sums(n_renewals + 1, 0.0);
    std::vector<double> zeta(n_renewals + 1, 0.0);
    std::vector<unsigned> b_count(n_renewals + 1, 0);
    for (std::size_t k = 1; k <= n_renewals; ++k) {
        const TripleSample tr = sample_triple(params, rng);
        y_sums[k] = y_sums[k - 1] + tr.y;
        zeta[k] = zeta[k - 1] + static_cast<double>(tr.b) * tr.z;
        b_count[k] = b_count[k - 1] + tr.b;
    }
    return RenewalPath(params, seed_tag, std::move(y_sums), std::move(zeta), std::move(b_count));
}

/// Deterministic function of (params, n_renewals, seed). Throws DomainError
/// when n_renewals == 0.
RenewalPath simulate_path(const ModelParams& params, std::size_t n_renewals, std::uint64_t seed);

/// N(t) = max{n : T_n <= t} or M(s) = max{m : S_m <= s}. Throws
/// PathExhaustedError when t is at or beyond the last simulated arrival.
unsigned count_at(const RenewalPath& path, double t, Counter which);

/// count_at minus rate * t.
double compensated_at(const RenewalPath& path, double t, Counter which);

/// Law of zeta_n: atom a^n at 0+ plus sum_k beta_k(n) Erlang_k(lambda).
special::AtomPlusDensity zeta_pmf_mixture(unsigned n, const ModelParams& params);

}  // namespace sdpoisson
