#pragma once

// Self-decomposed exponential pairs: X = a*Y + B*Z with Y, Z ~ Exp(lambda)
// and B ~ Bernoulli(1 - a), all independent. X is again Exp(lambda).

#include <cstdint>

#include "sdpoisson/params.hpp"
#include "sdpoisson/random.hpp"

namespace sdpoisson {

struct TripleSample {
    double x;
    double y;
    double z;
    std::uint8_t b;
};

/// Draws one triple. Consumes exactly three variates, in this order:
/// a uniform for b (b = 1 iff U >= a), an exponential for y, an exponential
/// for z. Only lambda and a are used; y and z share the rate lambda.
template <VariateSource R>
TripleSample sample_triple(const ModelParams& params, R& rng) {
    const double u = rng.uniform();
    const double y = rng.standard_exponential() / params.lambda();
    const double z = rng.standard_exponential() / params.lambda();
    const std::uint8_t b = u >= params.a() ? 1 : 0;
    return {params.a() * y + static_cast<double>(b) * z, y, z, b};
}

/// X ~ Exp(lambda) and Y' = (lambda/mu) Y ~ Exp(mu) with corr(X, Y') = a,
/// obtained by rescaling the equal-rate triple.
struct CorrelatedPair {
    double x;
    double y;
};

template <VariateSource R>
CorrelatedPair sample_pair(const ModelParams& params, R& rng) {
    const TripleSample t = sample_triple(params, rng);
    return {t.x, t.y * (params.lambda() / params.mu())};
}

/// Endpoints of the family, which ModelParams rejects as values of a.
/// Independent: X = Z (a -> 0). Comonotone: X = Y (a -> 1).
/// Same variate consumption as sample_triple.
enum class LimitRegime { Independent, Comonotone };

template <VariateSource R>
TripleSample sample_limit_triple(LimitRegime regime, double lambda, R& rng) {
    (void)rng.uniform();
    const double y = rng.standard_exponential() / lambda;
    const double z = rng.standard_exponential() / lambda;
    if (regime == LimitRegime::Independent) return {z, y, z, 1};
    return {y, y, z, 0};
}

/// G_a(z) = [a + (1-a)(1 - e^{-lambda z})] theta(z), the law of Z_a = B*Z.
double za_cdf(double z, const ModelParams& params);

/// H(x, y) = P(X <= x, Y <= y) for the equal-rate pair (both Exp(lambda)).
/// Accepts +infinity in either argument.
double xy_joint_cdf(double x, double y, const ModelParams& params);

/// h(x,y) = f(y) g_a(x - a y) split into its singular part on the line
/// x = a y and its absolutely continuous part on x > a y > 0.
class XyJointLaw {
  public:
    explicit XyJointLaw(const ModelParams& params) : a_(params.a()), lambda_(params.lambda()) {}

    double slope() const noexcept { return a_; }
    /// Mass per unit y carried by the line x = a y: a * lambda * e^{-lambda y}.
    double line_mass_density(double y) const;
    /// (1-a) lambda^2 e^{-lambda y} e^{-lambda (x - a y)} on x > a y, y > 0.
    double continuous_density(double x, double y) const;

    double line_total_mass() const noexcept { return a_; }
    double continuous_total_mass() const noexcept { return 1 - a_; }

  private:
    double a_;
    double lambda_;
};

XyJointLaw xy_joint_law(const ModelParams& params);

struct Correlations {
    double r_xy;   ///< corr(X, Y) = a
    double r_xz;   ///< corr(X, Z) = 1 - a
    double r_xza;  ///< corr(X, Z_a) = 1 - a^2
};

Correlations theoretical_correlations(const ModelParams& params);

/// Density of a*Y + (1-a)*Z for independent Exp(lambda) Y, Z; the a = 1/2
/// removable singularity evaluates to the Erlang_2(2 lambda) density.
double naive_sum_density(double x, const ModelParams& params);

}  // namespace sdpoisson
