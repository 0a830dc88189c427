#include "sdpoisson/special_fn.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "sdpoisson/errors.hpp"

namespace sdpoisson::special {

namespace {

__extension__ typedef unsigned __int128 uint128;

constexpr unsigned kLogFactTableSize = 257;

const std::array<wide, kLogFactTableSize>& log_fact_table() {
    static const auto table = [] {
        std::array<wide, kLogFactTableSize> t{};
        t[0] = 0;
        for (unsigned k = 1; k < kLogFactTableSize; ++k) t[k] = t[k - 1] + std::log(static_cast<wide>(k));
        return t;
    }();
    return table;
}

// Stirling series for ln Gamma(x), x > 256.
wide log_gamma_large(wide x) {
    const wide inv = 1 / x;
    const wide inv2 = inv * inv;
    const wide half_log_2pi = std::log(2 * std::numbers::pi_v<wide>) / 2;
    return (x - wide(0.5)) * std::log(x) - x + half_log_2pi +
           inv * (wide(1) / 12 - inv2 * (wide(1) / 360 - inv2 * (wide(1) / 1260 - inv2 / 1680)));
}

template <std::floating_point T>
T poisson_weight_impl(unsigned n, T alpha) {
    if (!(alpha >= 0)) throw DomainError("poisson_weight: alpha must be >= 0, got " + std::to_string(double(alpha)));
    if (alpha == 0) return n == 0 ? T(1) : T(0);
    if (std::isinf(alpha)) return T(0);
    if (n <= 64 && alpha <= 600) {
        T r = std::exp(-alpha);
        for (unsigned k = 1; k <= n; ++k) r *= alpha / T(k);
        return r;
    }
    const wide log_r = wide(n) * std::log(wide(alpha)) - wide(alpha) - log_factorial_wide(n);
    return static_cast<T>(std::exp(log_r));
}

template <std::floating_point T>
T binom_weight_impl(unsigned k, unsigned n, T a) {
    if (k > n) throw DomainError("binom_weight: k > n");
    if (!(a >= 0 && a <= 1)) throw DomainError("binom_weight: a outside [0,1]");
    if (n == 0) return T(1);
    const T c = static_cast<T>(binomial_wide(n, k));
    return c * std::pow(a, T(n - k)) * std::pow(T(1) - a, T(k));
}

template <std::floating_point T>
GammaPQ<T> regularized_gamma_impl(unsigned s, T x) {
    if (s == 0) throw DomainError("regularized_gamma: shape must be >= 1");
    if (!(x >= 0)) throw DomainError("regularized_gamma: x must be >= 0");
    if (x == 0) return {T(0), T(1)};
    if (std::isinf(x)) return {T(1), T(0)};
    const T eps = std::numeric_limits<T>::epsilon();
    if (x < T(s) + 1) {
        // P = pi_s(x) * (1 + x/(s+1) + x^2/((s+1)(s+2)) + ...)
        T term = 1;
        T sum = 1;
        for (unsigned j = 1; j < 100000; ++j) {
            term *= x / T(s + j);
            sum += term;
            if (term < eps * sum) break;
        }
        const T p = poisson_weight_impl<T>(s, x) * sum;
        return {p, T(1) - p};
    }
    // Q = sum_{k<s} pi_k(x), accumulated from the largest index down.
    T q = 0;
    for (unsigned k = s; k-- > 0;) q += poisson_weight_impl<T>(k, x);
    return {T(1) - q, q};
}

template <std::floating_point T>
T kummer_series_impl(unsigned alpha, unsigned beta, T x) {
    T term = 1;
    T sum = 1;
    if (alpha == 0 || x == 0) return sum;
    const T eps = std::numeric_limits<T>::epsilon();
    for (unsigned k = 0; k < 1000000; ++k) {
        term *= (T(alpha) + T(k)) * x / ((T(beta) + 1 + T(k)) * T(k + 1));
        sum += term;
        // Past the peak the terms decay at least geometrically.
        if (T(k) > x && term < eps * sum / 4) break;
    }
    return sum;
}

// Neumaier compensated accumulator.
template <std::floating_point T>
struct CompensatedSum {
    T sum = 0;
    T comp = 0;
    void add(T v) {
        const T t = sum + v;
        if (std::fabs(sum) >= std::fabs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    T value() const { return sum + comp; }
};

// e^x * pi_gamma(x)/pi_beta(x) * P(beta - gamma, x) without overflow.
wide kummer_closed_term(unsigned gamma, unsigned beta, wide x) {
    const unsigned s = beta - gamma;
    if (x < wide(s) + 1) {
        // = C(beta, gamma) * sum_j x^j / ((s+1)...(s+j))
        const wide eps = std::numeric_limits<wide>::epsilon();
        wide term = 1;
        wide sum = 1;
        for (unsigned j = 1; j < 100000; ++j) {
            term *= x / wide(s + j);
            sum += term;
            if (term < eps * sum) break;
        }
        return binomial_wide(beta, gamma) * sum;
    }
    const wide log_ratio = log_factorial_wide(beta) - log_factorial_wide(gamma) - wide(s) * std::log(x);
    return std::exp(x + log_ratio) * regularized_gamma_impl<wide>(s, x).p;
}

wide kummer_closed_form(unsigned alpha, unsigned beta, wide x) {
    CompensatedSum<wide> acc;
    for (unsigned g = 0; g < alpha; ++g) {
        const wide sign = ((alpha - g - 1) % 2 == 0) ? 1 : -1;
        acc.add(sign * binomial_wide(beta - g - 1, beta - alpha) * kummer_closed_term(g, beta, x));
    }
    return acc.value();
}

void check_kummer_args(unsigned alpha, unsigned beta, wide x) {
    if (alpha > beta) throw DomainError("kummer_elementary: requires alpha <= beta");
    if (!(x >= 0)) throw DomainError("kummer_elementary: requires x >= 0");
}

}  // namespace

wide log_factorial_wide(unsigned n) {
    if (n < kLogFactTableSize) return log_fact_table()[n];
    return log_gamma_large(wide(n) + 1);
}

double log_factorial(unsigned n) { return static_cast<double>(log_factorial_wide(n)); }

wide binomial_wide(unsigned n, unsigned k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    if (n <= 100) {
        uint128 c = 1;
        for (unsigned i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
        return static_cast<wide>(c);
    }
    return std::exp(log_factorial_wide(n) - log_factorial_wide(k) - log_factorial_wide(n - k));
}

double binomial(unsigned n, unsigned k) { return static_cast<double>(binomial_wide(n, k)); }

double poisson_weight(unsigned n, double alpha) { return poisson_weight_impl<double>(n, alpha); }
wide poisson_weight(unsigned n, wide alpha) { return poisson_weight_impl<wide>(n, alpha); }

double binom_weight(unsigned k, unsigned n, double a) { return binom_weight_impl<double>(k, n, a); }
wide binom_weight(unsigned k, unsigned n, wide a) { return binom_weight_impl<wide>(k, n, a); }

GammaPQ<double> regularized_gamma(unsigned s, double x) {
    const auto r = regularized_gamma_impl<wide>(s, x);
    return {static_cast<double>(r.p), static_cast<double>(r.q)};
}
GammaPQ<wide> regularized_gamma(unsigned s, wide x) { return regularized_gamma_impl<wide>(s, x); }

double poisson_cdf(unsigned n, double alpha) {
    if (!(alpha >= 0)) throw DomainError("poisson_cdf: alpha must be >= 0");
    return regularized_gamma(n + 1, alpha).q;
}

double poisson_tail_integral(unsigned n, double lambda, double z) {
    if (!(lambda > 0)) throw DomainError("poisson_tail_integral: lambda must be > 0");
    if (!(z >= 0)) throw DomainError("poisson_tail_integral: z must be >= 0");
    return regularized_gamma(n + 1, lambda * z).p;
}

AtomPlusDensity::AtomPlusDensity(double atom_weight, double rate, std::vector<double> erlang_weights)
    : atom_weight_(atom_weight), rate_(rate), weights_(std::move(erlang_weights)) {
    if (!(atom_weight >= 0 && atom_weight <= 1)) throw DomainError("AtomPlusDensity: atom weight outside [0,1]");
    if (!(rate > 0)) throw DomainError("AtomPlusDensity: rate must be > 0");
}

double AtomPlusDensity::density(double x) const {
    if (!(x > 0)) return 0;
    const double rx = rate_ * x;
    double d = 0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (weights_[i] != 0) d += weights_[i] * poisson_weight(static_cast<unsigned>(i), rx);
    }
    return rate_ * d;
}

double AtomPlusDensity::continuous_mass(double x) const {
    if (!(x > 0)) return 0;
    double m = 0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (weights_[i] != 0) m += weights_[i] * regularized_gamma(static_cast<unsigned>(i + 1), rate_ * x).p;
    }
    return m;
}

double AtomPlusDensity::cdf(double x) const {
    if (x < 0) return 0;
    return atom_weight_ + continuous_mass(x);
}

double AtomPlusDensity::total_mass() const {
    double m = atom_weight_;
    for (double w : weights_) m += w;
    return m;
}

AtomPlusDensity erlang_density(unsigned n) {
    if (n == 0) return AtomPlusDensity(1.0, 1.0, {});
    std::vector<double> w(n, 0.0);
    w[n - 1] = 1.0;
    return AtomPlusDensity(0.0, 1.0, std::move(w));
}

AtomPlusDensity erlang_mixture_density(unsigned n, double a) {
    if (!(a > 0 && a < 1)) throw DomainError("erlang_mixture_density: a must lie in (0,1)");
    std::vector<double> w(n);
    for (unsigned k = 1; k <= n; ++k) w[k - 1] = binom_weight(k, n, a);
    return AtomPlusDensity(std::pow(a, double(n)), 1.0, std::move(w));
}

bool kummer_in_validated_domain(unsigned alpha, unsigned beta, double x) {
    return alpha <= beta && beta <= kKummerClosedFormMaxBeta && x >= 0 && x <= kKummerClosedFormMaxX;
}

wide kummer_elementary(unsigned alpha, unsigned beta, wide x) {
    check_kummer_args(alpha, beta, x);
    if (alpha == 0) return 1;
    if (x == 0) return 1;
    if (kummer_in_validated_domain(alpha, beta, static_cast<double>(x))) return kummer_closed_form(alpha, beta, x);
    return kummer_series_impl<wide>(alpha, beta, x);
}

double kummer_elementary(unsigned alpha, unsigned beta, double x) {
    return static_cast<double>(kummer_elementary(alpha, beta, static_cast<wide>(x)));
}

wide kummer_series(unsigned alpha, unsigned beta, wide x) {
    check_kummer_args(alpha, beta, x);
    return kummer_series_impl<wide>(alpha, beta, x);
}

}  // namespace sdpoisson::special
