#pragma once

// Poisson, binomial and Erlang weights plus the integer-parameter Kummer
// function used by the closed-form joint distribution.
//
// Conventions: pi_n(0) = [n == 0] and the Erlang law of index 0 is a unit
// atom sitting at 0+. Atoms are never represented as numeric spikes; they
// live in AtomPlusDensity::atom_weight.

#include <concepts>
#include <cstdint>
#include <vector>

namespace sdpoisson::special {

/// Accumulation type for the alternating closed-form sums.
using wide = long double;

/// ln(n!) without touching the global state that std::lgamma writes.
double log_factorial(unsigned n);
wide log_factorial_wide(unsigned n);

/// Binomial coefficient C(n, k); exact (128-bit integer arithmetic) for
/// n <= 100, log-space beyond. Returns 0 when k > n.
double binomial(unsigned n, unsigned k);
wide binomial_wide(unsigned n, unsigned k);

/// pi_n(alpha) = alpha^n e^{-alpha} / n!. Throws DomainError for alpha < 0.
double poisson_weight(unsigned n, double alpha);
wide poisson_weight(unsigned n, wide alpha);

/// beta_k(n) = C(n,k) a^{n-k} (1-a)^k, the law of Bin(n, 1-a).
/// Throws DomainError when k > n or a is outside [0, 1].
double binom_weight(unsigned k, unsigned n, double a);
wide binom_weight(unsigned k, unsigned n, wide a);

/// Both regularized incomplete gamma functions for integer shape s >= 1.
/// Each side is computed so that it keeps full relative accuracy when it is
/// the small one.
template <std::floating_point T>
struct GammaPQ {
    T p;  ///< gamma(s, x) / (s-1)!  =  P(Poiss(x) >= s)
    T q;  ///< Gamma(s, x) / (s-1)!  =  P(Poiss(x) <  s)
};
GammaPQ<double> regularized_gamma(unsigned s, double x);
GammaPQ<wide> regularized_gamma(unsigned s, wide x);

/// P(Poiss(alpha) <= n).
double poisson_cdf(unsigned n, double alpha);

/// lambda * int_0^z pi_n(lambda x) dx = 1 - sum_{k<=n} pi_k(lambda z).
double poisson_tail_integral(unsigned n, double lambda, double z);

/// Law on [0, inf) made of an atom at 0+ and an Erlang mixture
///   density(x) = sum_{k>=1} weights[k-1] * rate * f_k(rate x).
/// The atom is included by any integral whose lower limit is 0 and excluded
/// by integrals over (z, y] with z > 0.
class AtomPlusDensity {
  public:
    AtomPlusDensity(double atom_weight, double rate, std::vector<double> erlang_weights);

    double atom_weight() const noexcept { return atom_weight_; }
    double rate() const noexcept { return rate_; }
    /// weights()[k-1] multiplies the Erlang_k(rate) density.
    const std::vector<double>& erlang_weights() const noexcept { return weights_; }

    /// Absolutely continuous part only; 0 for x <= 0.
    double density(double x) const;
    /// P(X <= x), atom included for x >= 0.
    double cdf(double x) const;
    /// Mass of the continuous part on [0, x].
    double continuous_mass(double x) const;
    double total_mass() const;

  private:
    double atom_weight_;
    double rate_;
    std::vector<double> weights_;
};

/// f_n: pure atom for n = 0, standard Erlang_n(1) density otherwise.
AtomPlusDensity erlang_density(unsigned n);

/// h_n = sum_k beta_k(n) f_k with 0 < a < 1 (standard rate).
AtomPlusDensity erlang_mixture_density(unsigned n, double a);

/// Largest second parameter for which the elementary closed form of
/// Phi(alpha; beta+1; x) is used; larger beta or x go to the series.
inline constexpr unsigned kKummerClosedFormMaxBeta = 20;
inline constexpr double kKummerClosedFormMaxX = 50.0;

/// True when kummer_elementary(alpha, beta, x) takes the closed-form route.
bool kummer_in_validated_domain(unsigned alpha, unsigned beta, double x);

/// Phi(alpha; beta+1; x) for integers 0 <= alpha <= beta and x >= 0, via the
/// finite combination of powers and exponentials inside the validated domain
/// and the hypergeometric series outside it.
double kummer_elementary(unsigned alpha, unsigned beta, double x);
wide kummer_elementary(unsigned alpha, unsigned beta, wide x);

/// Plain Kummer series sum_k (alpha)_k x^k / ((beta+1)_k k!).
wide kummer_series(unsigned alpha, unsigned beta, wide x);

}  // namespace sdpoisson::special
