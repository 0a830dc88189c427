#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sdpoisson/errors.hpp"
#include "sdpoisson/harness.hpp"
#include "sdpoisson/joint_pmf.hpp"
#include "sdpoisson/special_fn.hpp"

using namespace sdpoisson;
using oracle::real;

namespace {

// h_n(x) without its atom: sum_{k>=1} beta_k(n) pi_{k-1}(x).
real mixture_density(unsigned n, real a, real x) {
    real d = 0;
    for (unsigned k = 1; k <= n; ++k) d += oracle::binom_weight(k, n, a) * oracle::poisson(k - 1, x);
    return d;
}

real kernel(unsigned m, unsigned n, real y, real z, real w) {
    real s = 0;
    for (unsigned k = n; k <= m; ++k) s += oracle::poisson(m - k, w - z) * oracle::poisson(k, y - w);
    return s;
}

// Defining integrals, written out independently of the library. The atom
// a^n delta(x - 0+) of h_n contributes a^n g(0) on ranges that start at 0.
real Q_integral(unsigned m, unsigned n, real y, real z, real a) {
    const real atom = std::pow(a, real(n)) * kernel(m, n, y, z, 0);
    return atom + a * oracle::integrate([&](real w) { return mixture_density(n, a, a * w) * kernel(m, n, y, z, w); },
                                        0, y, 1e-15L);
}

real A_integral(unsigned m, unsigned n, real y, real z, real a) {
    const real inner = std::pow(a, real(n)) +
                       a * oracle::integrate([&](real w) { return mixture_density(n, a, a * w); }, 0, z, 1e-15L);
    return oracle::poisson(m, y - z) * inner;
}

real B_integral(unsigned m, unsigned n, real y, real z, real a) {
    auto g = [&](real w) {
        real s = 0;
        for (unsigned k = 0; k <= n - m; ++k) s += oracle::poisson(k, z - w);
        return s;
    };
    const real atom = std::pow(a, real(n + 1)) * g(0);
    return oracle::poisson(m, y - z) *
           (atom + a * oracle::integrate([&](real w) { return mixture_density(n + 1, a, a * w) * g(w); }, 0, z, 1e-15L));
}

real C_integral(unsigned m, unsigned n, real y, real z, real a) {
    return a * oracle::integrate([&](real w) { return mixture_density(n, a, a * w) * kernel(m, n, y, z, w); }, z, y,
                                 1e-15L);
}

double pmf_from_integrals(unsigned m, unsigned n, real y, real z, real a) {
    if (z <= 0) {
        if (m < n) return 0;
        if (m == n) return double(Q_integral(n, n, y, z, a));
        return double(Q_integral(m, n, y, z, a) - Q_integral(m, n + 1, y, z, a));
    }
    if (n > m)
        return double(A_integral(m, n, y, z, a) - A_integral(m, n + 1, y, z, a) + B_integral(m, n, y, z, a) -
                      B_integral(m, n - 1, y, z, a));
    if (m == n)
        return double(A_integral(n, n, y, z, a) - A_integral(n, n + 1, y, z, a) + B_integral(n, n, y, z, a) +
                      C_integral(n, n, y, z, a));
    return double(A_integral(m, n, y, z, a) - A_integral(m, n + 1, y, z, a) + C_integral(m, n, y, z, a) -
                  C_integral(m, n + 1, y, z, a));
}

}  // namespace

TEST_SUITE("joint_pmf") {
    TEST_CASE("reduced coordinates") {
        const ModelParams p(1, 1, 0.5);
        const auto neg = reduced_coords(p, 1, 0.4);
        CHECK(neg.y == doctest::Approx(0.8));
        CHECK(neg.z == doctest::Approx(-0.2));
        CHECK(neg.region == Region::NegZ);
        const auto pos = reduced_coords(p, 1, 0.6);
        CHECK(pos.y == doctest::Approx(1.2));
        CHECK(pos.z == doctest::Approx(0.2));
        CHECK(pos.region == Region::PosZ);
        const auto bnd = reduced_coords(p, 1, 0.5);
        CHECK(bnd.z == 0.0);
        CHECK(bnd.region == Region::Boundary);
        CHECK(make_reduced_coords(1000.0, 1e-10).region == Region::Boundary);
        CHECK(make_reduced_coords(1.0, 1e-10).region == Region::PosZ);
        CHECK_THROWS_AS(reduced_coords(p, 0, 1), DomainError);
        CHECK_THROWS_AS(reduced_coords(p, 1, -1), DomainError);
        CHECK_THROWS_AS(make_reduced_coords(1.0, 1.0), DomainError);
    }

    TEST_CASE("joint_ge_prob") {
        CHECK(joint_ge_prob(0, 0, 1.3, 0.2, 1.0) == 1.0);
        for (unsigned n : {1u, 3u, 6u}) {
            double tail = 0;
            for (unsigned k = n; k < 80; ++k) tail += special::poisson_weight(k, 0.9 * 1.1);
            CHECK(joint_ge_prob(n, n, 1.1, 2.5, 0.9) == doctest::Approx(tail).epsilon(1e-13));
        }
        // {S_2 <= 1, S_1 <= 3} for unit-rate arrivals, by simulation.
        std::mt19937_64 eng(17);
        std::exponential_distribution<double> e(1.0);
        const int N = 1'000'000;
        int hits = 0;
        for (int i = 0; i < N; ++i) {
            const double s1 = e(eng), s2 = s1 + e(eng);
            hits += (s2 <= 1 && s1 <= 3);
        }
        const double f = double(hits) / N;
        CHECK(std::fabs(joint_ge_prob(2, 1, 1.0, 3.0, 1.0) - f) <= 3 * std::sqrt(f * (1 - f) / N));
        // Symmetric in swapping (m, rho) with (n, tau).
        CHECK(joint_ge_prob(4, 2, 1.5, 0.7, 1.3) == doctest::Approx(joint_ge_prob(2, 4, 0.7, 1.5, 1.3)));
    }

    TEST_CASE("Q examples") {
        const auto c = make_reduced_coords(0.8, -0.2);
        for (unsigned m = 0; m <= 5; ++m)
            CHECK(Q_closed(m, 0, c, 0.5) == doctest::Approx(special::poisson_weight(m, 1.0)).epsilon(1e-14));
        CHECK(Q_closed(0, 0, c, 0.5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
        CHECK(std::fabs(Q_closed(3, 2, c, 0.5) - quadrature_term(Term::Q, 3, 2, c, 0.5)) < 1e-8);
        CHECK(std::fabs(Q_closed(3, 2, c, 0.5) - double(Q_integral(3, 2, 0.8L, -0.2L, 0.5L))) < 1e-12);
        CHECK(std::fabs(quadrature_term(Term::Q, 0, 0, c, 0.5) - std::exp(-1.0)) < 1e-10);
        CHECK_THROWS_AS(Q_closed(1, 2, c, 0.5), DomainError);
        CHECK_THROWS_AS(Q_closed(2, 1, make_reduced_coords(1.2, 0.2), 0.5), DomainError);
    }

    TEST_CASE("A examples") {
        const auto c = make_reduced_coords(1.2, 0.2);
        for (unsigned m = 0; m <= 4; ++m) {
            CHECK(A_closed(m, 0, c, 0.5) == doctest::Approx(special::poisson_weight(m, 1.0)).epsilon(1e-14));
            CHECK(std::fabs(quadrature_term(Term::A, m, 0, c, 0.5) - special::poisson_weight(m, 1.0)) < 1e-10);
        }
        CHECK(std::fabs(A_closed(1, 2, c, 0.5) - quadrature_term(Term::A, 1, 2, c, 0.5)) < 1e-8);
        CHECK(std::fabs(A_closed(1, 2, c, 0.5) - double(A_integral(1, 2, 1.2L, 0.2L, 0.5L))) < 1e-12);
        // z -> 0+: only the atom survives.
        const auto tiny = make_reduced_coords(1.2, 1e-9);
        for (unsigned n : {1u, 3u})
            CHECK(std::fabs(A_closed(2, n, tiny, 0.4) - std::pow(0.4, n) * special::poisson_weight(2, 1.2)) < 1e-8);
        CHECK_THROWS_AS(A_closed(1, 1, make_reduced_coords(0.8, -0.2), 0.5), DomainError);
    }

    TEST_CASE("B examples") {
        const auto c = make_reduced_coords(1.2, 0.2);
        CHECK(std::fabs(B_closed(0, 0, c, 0.5) - quadrature_term(Term::B, 0, 0, c, 0.5)) < 1e-8);
        CHECK(std::fabs(B_closed(0, 0, c, 0.5) - double(B_integral(0, 0, 1.2L, 0.2L, 0.5L))) < 1e-12);
        const auto d = make_reduced_coords(2.0, 0.5);
        CHECK(std::fabs(B_closed(1, 3, d, 0.3) - quadrature_term(Term::B, 1, 3, d, 0.3)) < 1e-8);
        CHECK(std::fabs(B_closed(1, 3, d, 0.3) - double(B_integral(1, 3, 2.0L, 0.5L, 0.3L))) < 1e-12);
        // z -> 0+: a^{n+1} pi_m(y) from the k = 0 term.
        const auto tiny = make_reduced_coords(1.5, 1e-9);
        CHECK(std::fabs(B_closed(1, 2, tiny, 0.6) - std::pow(0.6, 3) * special::poisson_weight(1, 1.5)) < 1e-8);
        CHECK_THROWS_AS(B_closed(3, 1, c, 0.5), DomainError);
    }

    TEST_CASE("C examples") {
        const auto c = make_reduced_coords(1.2, 0.2);
        for (unsigned m = 0; m <= 4; ++m) {
            CHECK(C_closed(m, 0, c, 0.5) == 0.0);
            CHECK(std::fabs(quadrature_term(Term::C, m, 0, c, 0.5)) < 1e-10);
        }
        CHECK(std::fabs(C_closed(1, 1, c, 0.5) - quadrature_term(Term::C, 1, 1, c, 0.5)) < 1e-8);
        CHECK(std::fabs(C_closed(1, 1, c, 0.5) - double(C_integral(1, 1, 1.2L, 0.2L, 0.5L))) < 1e-12);
        const auto d = make_reduced_coords(3.0, 1.0);
        CHECK(std::fabs(C_closed(4, 2, d, 0.7) - quadrature_term(Term::C, 4, 2, d, 0.7)) < 1e-8);
        CHECK(std::fabs(C_closed(4, 2, d, 0.7) - double(C_integral(4, 2, 3.0L, 1.0L, 0.7L))) < 1e-12);
        CHECK_THROWS_AS(C_closed(1, 2, c, 0.5), DomainError);
    }

    TEST_CASE("full pmf against the independent integral forms") {
        for (double a : {0.25, 0.6}) {
            for (auto [y, z] : {std::pair{1.5, -0.7}, std::pair{2.5, 0.9}, std::pair{4.0, 3.1}}) {
                const auto c = make_reduced_coords(y, z);
                for (unsigned m = 0; m <= 4; ++m)
                    for (unsigned n = 0; n <= 4; ++n) {
                        const double ref = pmf_from_integrals(m, n, y, z, a);
                        CHECK(std::fabs(joint_pmf_reduced(m, n, c, a).raw - ref) < 1e-11);
                    }
            }
        }
    }

    TEST_CASE("joint_pmf reference examples") {
        const ModelParams p(1, 1, 0.5);
        const auto r00 = joint_pmf(p, 0, 0, 1, 0.4);
        CHECK(r00.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
        const auto r01 = joint_pmf(p, 0, 1, 1, 0.4);
        CHECK(r01.value == 0.0);
        CHECK(r01.raw == 0.0);
        CHECK(r01.method_used == MethodUsed::LemmaExact);
        CHECK(!r01.closed_form);
        CHECK(!r01.quadrature);
        const double p11 = std::exp(-1.0) / 0.5 * (0.4 - 0.5 * (1 - std::exp(-0.4)));
        CHECK(p11 == doctest::Approx(0.1730210757073180126).epsilon(1e-14));
        for (Method m : {Method::ClosedForm, Method::Quadrature, Method::Auto})
            CHECK(std::fabs(joint_pmf(p, 1, 1, 1, 0.4, m).value - p11) < 1e-12);
    }

    TEST_CASE("p_11 against a 10^7-path simulation") {
        const ModelParams p(1, 1, 0.5);
        const auto est = mc_joint_pmf(p, 1, 1, 1.0, 0.4, 10'000'000, 2718);
        const double p11 = std::exp(-1.0) / 0.5 * (0.4 - 0.5 * (1 - std::exp(-0.4)));
        CHECK(compare(p11, est) == Verdict::Pass);
    }

    TEST_CASE("explicit expressions on random points") {
        std::mt19937_64 eng(606);
        std::uniform_real_distribution<double> unit(0.05, 0.95);
        for (int i = 0; i < 50; ++i) {
            const double a = unit(eng), lambda = 0.3 + 2 * unit(eng), mu = 0.3 + 2 * unit(eng);
            const double s = 0.1 + 4 * unit(eng);
            const double t = unit(eng) * a * mu * s / lambda;
            const ModelParams p(lambda, mu, a);
            for (unsigned m = 0; m <= 2; ++m)
                for (unsigned n = 0; n <= 2; ++n)
                    CHECK(std::fabs(joint_pmf(p, m, n, s, t).raw - oracle::explicit_pmf(m, n, lambda, mu, a, s, t)) <
                          1e-10);
        }
    }

    TEST_CASE("boundary is evaluated from both sides") {
        const ModelParams p(1, 1, 0.5);
        const auto r = joint_pmf(p, 2, 1, 1, 0.5);
        CHECK(r.coords.region == Region::Boundary);
        const auto lo = joint_pmf_reduced(2, 1, make_reduced_coords(1.0, -1e-9), 0.5);
        const auto hi = joint_pmf_reduced(2, 1, make_reduced_coords(1.0, 1e-9), 0.5);
        CHECK(std::fabs(r.raw - lo.raw) < 1e-8);
        CHECK(std::fabs(r.raw - hi.raw) < 1e-8);
        // m < n on the boundary is still inside the zero region's closure.
        CHECK(std::fabs(joint_pmf(p, 0, 2, 1, 0.5).raw) < 1e-8);
    }

    TEST_CASE("continuity across z = 0") {
        for (double a : {0.15, 0.5, 0.85})
            for (double y : {0.3, 1.0, 4.0}) {
                const auto lo = make_reduced_coords(y, -1e-6);
                const auto hi = make_reduced_coords(y, 1e-6);
                for (unsigned m = 0; m <= 5; ++m)
                    for (unsigned n = 0; n <= 5; ++n)
                        CHECK(std::fabs(joint_pmf_reduced(m, n, lo, a).raw - joint_pmf_reduced(m, n, hi, a).raw) <=
                              1e-5);
            }
    }

    TEST_CASE("cross check and consistency errors") {
        const ModelParams p(1.1, 0.9, 0.35);
        PmfOptions opts;
        opts.cross_check = true;
        const auto r = joint_pmf(p, 3, 2, 2.0, 1.5, opts);
        REQUIRE(r.closed_form);
        REQUIRE(r.quadrature);
        CHECK(std::fabs(*r.closed_form - *r.quadrature) < 1e-9);
        CHECK(r.value >= 0);
        CHECK(r.value <= 1);
    }

    TEST_CASE("stability table") {
        CHECK(closed_form_stable_order(0.5, 1.0) >= 6);
        for (double a : {0.2, 0.5, 0.8})
            for (double y : {0.5, 5.0}) CHECK(closed_form_is_stable(6, 6, a, y));
        CHECK(closed_form_stable_order(0.5, 1e4) <= closed_form_stable_order(0.5, 1.0));
        // Auto beyond the table still returns a value through quadrature.
        const unsigned big = closed_form_stable_order(0.5, 30.0) + 2;
        const auto r = joint_pmf_reduced(big, big - 1, make_reduced_coords(30.0, 10.0), 0.5);
        CHECK(r.method_used == MethodUsed::Quadrature);
    }

    TEST_CASE("table normalization and marginals") {
        const ModelParams p(1, 1, 0.5);
        const auto tab = pmf_table(p, 1.0, 1.0, 40, 40);
        CHECK(tab.deficit < 1e-9);
        CHECK(tab.normalization_ok());
        for (unsigned m = 0; m <= 40; ++m)
            CHECK(std::fabs(tab.row_sums[m] - special::poisson_weight(m, 1.0)) < 1e-8);
        for (unsigned n = 0; n <= 40; ++n)
            CHECK(std::fabs(tab.column_sums[n] - special::poisson_weight(n, 1.0)) < 1e-8);
        CHECK(tab.lemma_cells + tab.closed_cells + tab.quadrature_cells == 41u * 41u);
        for (const auto& row : tab.entries)
            for (double v : row) {
                CHECK(v >= 0);
                CHECK(v <= 1);
            }
    }

    TEST_CASE("small table deficit sits below the tail bound") {
        const ModelParams p(1.3, 0.8, 0.4);
        const auto tab = pmf_table(p, 2.0, 1.5, 10, 10);
        CHECK(tab.deficit >= -1e-9);
        CHECK(tab.deficit <= tab.tail_bound + 1e-9);
        CHECK(tab.tail_bound > 0);
    }
}
