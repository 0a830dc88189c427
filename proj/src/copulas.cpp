#include "sdpoisson/copulas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>
#include <sstream>

#include "sdpoisson/errors.hpp"

namespace sdpoisson {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

bool in_unit(double x) { return x >= 0 && x <= 1; }

// (1 - v)^p through log1p; exact 1 for p = 0 and 0 for v = 1, p > 0.
double complement_pow(double v, double p) {
    if (p == 0) return 1;
    if (v >= 1) return 0;
    return std::exp(p * std::log1p(-v));
}

double self_decomposable(double a, double u, double v) {
    const double excess = std::max(0.0, complement_pow(v, a) - (1 - u));
    return u - excess * complement_pow(v, 1 - a);
}

double gumbel(double a, double u, double v) {
    if (u >= 1) return v;
    if (v >= 1) return u;
    const double lu = std::log1p(-u);
    const double lv = std::log1p(-v);
    return u + v - 1 + (1 - u) * (1 - v) * std::exp(-a * lu * lv);
}

double marshall_olkin(double a, double b, double u, double v) {
    if (u == 0 || v == 0) return 0;
    return std::min(std::pow(u, 1 - a) * v, u * std::pow(v, 1 - b));
}

double raftery(double a, double u, double v) {
    const double lo = std::min(u, v);
    const double hi = std::max(u, v);
    if (lo == 0) return 0;
    // (uv)^{1/a} (1 - hi^{1-2/a}) = (uv)^{1/a} - lo^{1/a} hi^{1/a + 1 - 2/a}
    const double inv = 1 / a;
    const double t1 = std::exp(inv * (std::log(u) + std::log(v)));
    const double t2 = std::exp(inv * std::log(lo) + (1 - inv) * std::log(hi));
    return lo + a / (2 - a) * (t1 - t2);
}

}  // namespace

std::string describe(const CopulaId& id) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    std::visit(overloaded{
                   [&](const SelfDecomposableCopula& c) { os << "self-decomposable(a=" << c.a << ")"; },
                   [&](const GumbelCopula& c) {
                       os << "gumbel(a=" << c.a << ",lambda=" << c.lambda << ",mu=" << c.mu << ")";
                   },
                   [&](const MarshallOlkinCopula& c) { os << "marshall-olkin(a=" << c.a << ",b=" << c.b << ")"; },
                   [&](const RafteryCopula& c) { os << "raftery(a=" << c.a << ")"; },
                   [&](const FrechetLowerCopula&) { os << "frechet-lower"; },
                   [&](const FrechetUpperCopula&) { os << "frechet-upper"; },
                   [&](const IndependenceCopula&) { os << "independence"; },
               },
               id);
    return os.str();
}

void validate(const CopulaId& id) {
    std::visit(overloaded{
                   [](const SelfDecomposableCopula& c) {
                       if (!in_unit(c.a)) throw DomainError("self-decomposable copula: a must lie in [0,1]");
                   },
                   [](const GumbelCopula& c) {
                       if (!in_unit(c.a)) throw DomainError("gumbel copula: a must lie in [0,1]");
                       if (!(c.lambda > 0) || !(c.mu > 0)) throw DomainError("gumbel copula: rates must be > 0");
                   },
                   [](const MarshallOlkinCopula& c) {
                       if (!in_unit(c.a) || !in_unit(c.b))
                           throw DomainError("marshall-olkin copula: a and b must lie in [0,1]");
                   },
                   [](const RafteryCopula& c) {
                       if (!(c.a > 0 && c.a <= 1)) throw DomainError("raftery copula: a must lie in (0,1]");
                   },
                   [](const auto&) {},
               },
               id);
}

double copula_eval(const CopulaId& id, double u, double v) {
    if (!in_unit(u) || !in_unit(v)) throw DomainError("copula arguments must lie in [0,1]");
    validate(id);
    return std::visit(overloaded{
                          [&](const SelfDecomposableCopula& c) { return self_decomposable(c.a, u, v); },
                          [&](const GumbelCopula& c) { return gumbel(c.a, u, v); },
                          [&](const MarshallOlkinCopula& c) { return marshall_olkin(c.a, c.b, u, v); },
                          [&](const RafteryCopula& c) { return raftery(c.a, u, v); },
                          [&](const FrechetLowerCopula&) { return std::max(0.0, u + v - 1); },
                          [&](const FrechetUpperCopula&) { return std::min(u, v); },
                          [&](const IndependenceCopula&) { return u * v; },
                      },
                      id);
}

double cdf_from_copula(const CopulaId& id, std::pair<double, double> marginal_rates, double x, double y) {
    const auto [lambda, mu] = marginal_rates;
    if (!(lambda > 0) || !(mu > 0)) throw DomainError("cdf_from_copula: rates must be > 0");
    if (x < 0 || y < 0) return 0;
    const double u = -std::expm1(-lambda * x);
    const double v = -std::expm1(-mu * y);
    return copula_eval(id, u, v);
}

FrechetBounds frechet_bounds(double u, double v) {
    if (!in_unit(u) || !in_unit(v)) throw DomainError("frechet_bounds: arguments must lie in [0,1]");
    return {std::max(0.0, u + v - 1), std::min(u, v)};
}

CopulaGridCheck check_copula_grid(const CopulaId& id, unsigned grid) {
    if (grid < 2) throw DomainError("check_copula_grid: grid must be >= 2");
    std::vector<double> pts(grid);
    for (unsigned i = 0; i < grid; ++i) pts[i] = i == grid - 1 ? 1.0 : double(i) / double(grid - 1);
    std::vector<double> c(std::size_t(grid) * grid);
    for (unsigned i = 0; i < grid; ++i)
        for (unsigned j = 0; j < grid; ++j) c[std::size_t(i) * grid + j] = copula_eval(id, pts[i], pts[j]);
    const auto at = [&](unsigned i, unsigned j) { return c[std::size_t(i) * grid + j]; };

    CopulaGridCheck out;
    out.grid = grid;
    out.min_rectangle_volume = std::numeric_limits<double>::infinity();
    for (unsigned i = 0; i < grid; ++i) {
        out.groundedness_error = std::max({out.groundedness_error, std::fabs(at(0, i)), std::fabs(at(i, 0)),
                                           std::fabs(at(i, grid - 1) - pts[i]), std::fabs(at(grid - 1, i) - pts[i])});
        for (unsigned j = 0; j < grid; ++j) {
            const auto b = frechet_bounds(pts[i], pts[j]);
            out.bound_violation = std::max({out.bound_violation, b.lower - at(i, j), at(i, j) - b.upper});
            if (i + 1 < grid && j + 1 < grid) {
                const double vol = at(i + 1, j + 1) - at(i + 1, j) - at(i, j + 1) + at(i, j);
                out.min_rectangle_volume = std::min(out.min_rectangle_volume, vol);
            }
        }
    }
    return out;
}

}  // namespace sdpoisson
