#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sdpoisson/copulas.hpp"
#include "sdpoisson/errors.hpp"
#include "sdpoisson/harness.hpp"
#include "sdpoisson/sd_exponential.hpp"

using namespace sdpoisson;

namespace {

std::vector<CopulaId> all_copulas() {
    return {SelfDecomposableCopula{0.0},  SelfDecomposableCopula{0.3},  SelfDecomposableCopula{0.75},
            SelfDecomposableCopula{1.0},  GumbelCopula{0.0, 1.0, 1.0},  GumbelCopula{0.6, 2.0, 0.5},
            GumbelCopula{1.0, 1.0, 3.0},  MarshallOlkinCopula{0.3, 0.8}, MarshallOlkinCopula{1.0, 1.0},
            MarshallOlkinCopula{0.0, 0.5}, RafteryCopula{0.2},           RafteryCopula{0.7},
            RafteryCopula{1.0},           FrechetLowerCopula{},         FrechetUpperCopula{},
            IndependenceCopula{}};
}

std::vector<double> grid(unsigned g) {
    std::vector<double> pts(g);
    for (unsigned i = 0; i < g; ++i) pts[i] = i + 1 == g ? 1.0 : double(i) / double(g - 1);
    return pts;
}

}  // namespace

TEST_SUITE("copulas") {
    TEST_CASE("endpoint examples") {
        for (double u : grid(11))
            for (double v : grid(11)) {
                CHECK(copula_eval(SelfDecomposableCopula{0.0}, u, v) == doctest::Approx(u * v).epsilon(1e-15));
                CHECK(std::fabs(copula_eval(SelfDecomposableCopula{1.0}, u, v) - std::min(u, v)) <= 1e-15);
                CHECK(copula_eval(MarshallOlkinCopula{1.0, 1.0}, u, v) == std::min(u, v));
                CHECK(copula_eval(RafteryCopula{1.0}, u, v) == doctest::Approx(u * v).epsilon(1e-14));
            }
    }

    TEST_CASE("frechet bounds") {
        const auto b = frechet_bounds(0.5, 0.5);
        CHECK(b.lower == 0.0);
        CHECK(b.upper == 0.5);
        const auto c = frechet_bounds(0.9, 0.8);
        CHECK(c.lower == doctest::Approx(0.7));
        CHECK(c.upper == 0.8);
        CHECK_THROWS_AS(frechet_bounds(1.1, 0.5), DomainError);
    }

    TEST_CASE("all copulas lie within the bounds on a 100x100 grid") {
        const auto pts = grid(100);
        for (const auto& id : all_copulas()) {
            CAPTURE(describe(id));
            double worst = 0;
            for (double u : pts)
                for (double v : pts) {
                    const auto b = frechet_bounds(u, v);
                    const double c = copula_eval(id, u, v);
                    worst = std::max({worst, b.lower - c, c - b.upper});
                }
            CHECK(worst <= 1e-14);
        }
    }

    TEST_CASE("2-increasing on a 50x50 grid") {
        for (const auto& id : all_copulas()) {
            CAPTURE(describe(id));
            const auto g = check_copula_grid(id, 50);
            CHECK(g.min_rectangle_volume >= -1e-12);
            CHECK(g.groundedness_error <= 1e-14);
            CHECK(g.bound_violation <= 1e-14);
        }
    }

    TEST_CASE("grounded with uniform margins at random points") {
        std::mt19937_64 eng(3);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (const auto& id : all_copulas()) {
            CAPTURE(describe(id));
            double worst = 0;
            for (int i = 0; i < 1000; ++i) {
                const double w = unit(eng);
                worst = std::max({worst, std::fabs(copula_eval(id, w, 0.0)), std::fabs(copula_eval(id, 0.0, w)),
                                  std::fabs(copula_eval(id, w, 1.0) - w), std::fabs(copula_eval(id, 1.0, w) - w)});
            }
            CHECK(worst <= 1e-14);
        }
    }

    TEST_CASE("self-decomposable copula reproduces the joint cdf of (X, Y)") {
        for (double a : {0.2, 0.5, 0.8}) {
            const ModelParams p(1, 1, a);
            for (double x : {0.0, 0.05, 0.3, 1.0, 2.5, 6.0})
                for (double y : {0.0, 0.05, 0.3, 1.0, 2.5, 6.0})
                    CHECK(std::fabs(cdf_from_copula(SelfDecomposableCopula{a}, {1.0, 1.0}, x, y) -
                                    xy_joint_cdf(x, y, p)) <= 1e-12);
        }
    }

    TEST_CASE("cdf_from_copula basics") {
        CHECK(cdf_from_copula(IndependenceCopula{}, {1.0, 2.0}, -0.5, 1.0) == 0.0);
        CHECK(cdf_from_copula(SelfDecomposableCopula{0.4}, {1.0, 2.0}, 1.0, -1.0) == 0.0);
        for (double x : {0.1, 1.0, 3.0})
            for (double y : {0.2, 0.9})
                CHECK(cdf_from_copula(IndependenceCopula{}, {1.5, 0.5}, x, y) ==
                      doctest::Approx((1 - std::exp(-1.5 * x)) * (1 - std::exp(-0.5 * y))).epsilon(1e-14));
        CHECK_THROWS_AS(cdf_from_copula(IndependenceCopula{}, {0.0, 1.0}, 1, 1), DomainError);
    }

    TEST_CASE("gumbel copula rebuilds the bivariate exponential cdf") {
        const double a = 0.7, l = 2.0, m = 0.5;
        for (double x : {0.1, 0.8, 2.0})
            for (double y : {0.3, 1.7, 4.0}) {
                const double H = 1 - std::exp(-l * x) - std::exp(-m * y) + std::exp(-l * x - m * y - a * l * m * x * y);
                CHECK(cdf_from_copula(GumbelCopula{a, l, m}, {l, m}, x, y) == doctest::Approx(H).epsilon(1e-13));
            }
    }

    TEST_CASE("self-decomposable family tends to its endpoints") {
        const auto pts = grid(50);
        double to_ind = 0, to_upper = 0;
        for (double u : pts)
            for (double v : pts) {
                to_ind = std::max(to_ind, std::fabs(copula_eval(SelfDecomposableCopula{1e-6}, u, v) - u * v));
                to_upper = std::max(to_upper,
                                    std::fabs(copula_eval(SelfDecomposableCopula{1 - 1e-6}, u, v) - std::min(u, v)));
            }
        CHECK(to_ind < 1e-4);
        CHECK(to_upper < 1e-4);
    }

    TEST_CASE("no spurious negatives near v = 1") {
        for (double a : {0.01, 0.5, 0.99})
            for (double v : {1 - 1e-16, 1 - 1e-12, 1 - 1e-8})
                for (double u : {1e-300, 1e-10, 0.5, 1 - 1e-15}) {
                    const double c = copula_eval(SelfDecomposableCopula{a}, u, v);
                    CHECK(c >= 0);
                    CHECK(c <= std::min(u, v));
                }
    }

    TEST_CASE("parameter validation") {
        CHECK_THROWS_AS(copula_eval(SelfDecomposableCopula{1.5}, 0.5, 0.5), DomainError);
        CHECK_THROWS_AS(copula_eval(RafteryCopula{0.0}, 0.5, 0.5), DomainError);
        CHECK_THROWS_AS(copula_eval(MarshallOlkinCopula{0.5, -0.1}, 0.5, 0.5), DomainError);
        CHECK_THROWS_AS(copula_eval(GumbelCopula{0.5, 0.0, 1.0}, 0.5, 0.5), DomainError);
        CHECK_THROWS_AS(copula_eval(IndependenceCopula{}, 1.2, 0.5), DomainError);
        CHECK(describe(RafteryCopula{0.25}) == "raftery(a=0.25)");
    }

    TEST_CASE("raftery construction has the raftery survival copula") {
        for (double a : {0.35, 0.8}) {
            CAPTURE(a);
            const double lambda = 1.3;
            RandomStream rng(4711);
            const std::size_t n = 1'000'000;
            std::vector<double> us(n), vs(n);
            for (std::size_t i = 0; i < n; ++i) {
                const auto [x, y] = sample_raftery_pair(a, lambda, rng);
                us[i] = std::exp(-lambda * x);
                vs[i] = std::exp(-lambda * y);
            }
            const auto pts = grid(21);
            double d = 0;
            std::vector<std::uint32_t> counts(pts.size() * pts.size());
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t iu = std::lower_bound(pts.begin(), pts.end(), us[i]) - pts.begin();
                const std::size_t iv = std::lower_bound(pts.begin(), pts.end(), vs[i]) - pts.begin();
                ++counts[iu * pts.size() + iv];
            }
            // Cumulative counts give the empirical joint cdf on the grid.
            std::vector<double> cum(counts.size());
            for (std::size_t i = 0; i < pts.size(); ++i)
                for (std::size_t j = 0; j < pts.size(); ++j) {
                    double c = counts[i * pts.size() + j];
                    if (i) c += cum[(i - 1) * pts.size() + j];
                    if (j) c += cum[i * pts.size() + j - 1];
                    if (i && j) c -= cum[(i - 1) * pts.size() + j - 1];
                    cum[i * pts.size() + j] = c;
                    d = std::max(d, std::fabs(c / double(n) - copula_eval(RafteryCopula{a}, pts[i], pts[j])));
                }
            CHECK(d < ks_critical_value(n, 0.01));
        }
    }
}
