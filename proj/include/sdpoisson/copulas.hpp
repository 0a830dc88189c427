#pragma once

// Bivariate copulas with exponential marginals: the family induced by the
// self-decomposed pair, three classical bivariate-exponential families and
// the Frechet-Hoeffding bounds.

#include <string>
#include <utility>
#include <variant>

#include "sdpoisson/random.hpp"

namespace sdpoisson {

/// C_a(u,v) = u - [(1-v)^a - (1-u)]^+ (1-v)^{1-a}, a in [0,1].
/// a = 0 is the independence copula, a = 1 the upper bound.
struct SelfDecomposableCopula {
    double a;
};

/// Gumbel bivariate exponential with H = 1 - e^{-lx} - e^{-my} + e^{-lx-my-a l m xy}.
/// Its copula u + v - 1 + (1-u)(1-v) exp(-a ln(1-u) ln(1-v)) does not depend
/// on the rates; they are kept so the joint cdf can be rebuilt.
struct GumbelCopula {
    double a;
    double lambda;
    double mu;
};

/// C_{a,b}(u,v) = min(u^{1-a} v, u v^{1-b}).
struct MarshallOlkinCopula {
    double a;
    double b;
};

/// C_a(u,v) = min(u,v) + a/(2-a) (uv)^{1/a} [1 - max(u,v)^{1-2/a}], a in (0,1].
struct RafteryCopula {
    double a;
};

struct FrechetLowerCopula {};
struct FrechetUpperCopula {};
struct IndependenceCopula {};

using CopulaId = std::variant<SelfDecomposableCopula, GumbelCopula, MarshallOlkinCopula, RafteryCopula,
                              FrechetLowerCopula, FrechetUpperCopula, IndependenceCopula>;

/// Human-readable name with parameters, e.g. "self-decomposable(a=0.5)".
std::string describe(const CopulaId& id);

/// Throws DomainError when a parameter is outside its range.
void validate(const CopulaId& id);

/// C(u, v); throws DomainError unless u, v in [0, 1].
double copula_eval(const CopulaId& id, double u, double v);

/// C(F(x), G(y)) with F, G the Exp(lambda), Exp(mu) cdfs.
double cdf_from_copula(const CopulaId& id, std::pair<double, double> marginal_rates, double x, double y);

struct FrechetBounds {
    double lower;  ///< (u + v - 1)^+
    double upper;  ///< min(u, v)
};

FrechetBounds frechet_bounds(double u, double v);

/// Property scan over the grid u_i = i/(g-1), v_j = j/(g-1).
struct CopulaGridCheck {
    unsigned grid = 0;
    /// max |C(0,v)|, |C(u,0)|, |C(u,1) - u|, |C(1,v) - v|.
    double groundedness_error = 0;
    /// Smallest C-volume of a grid rectangle; 2-increasing means >= 0.
    double min_rectangle_volume = 0;
    /// Largest excursion outside [W, M].
    double bound_violation = 0;
};

CopulaGridCheck check_copula_grid(const CopulaId& id, unsigned grid);

/// X = aU + BZ, Y = aV + BZ with U, V, Z ~ Exp(lambda), B ~ Bernoulli(1-a).
/// Consumes a uniform then three exponentials (U, V, Z).
/// RafteryCopula{a} is the copula of (exp(-lambda X), exp(-lambda Y)), that
/// is, the survival copula of the pair.
template <VariateSource R>
std::pair<double, double> sample_raftery_pair(double a, double lambda, R& rng) {
    const double b = rng.uniform() >= a ? 1.0 : 0.0;
    const double u = rng.standard_exponential() / lambda;
    const double v = rng.standard_exponential() / lambda;
    const double z = rng.standard_exponential() / lambda;
    return {a * u + b * z, a * v + b * z};
}

}  // namespace sdpoisson
