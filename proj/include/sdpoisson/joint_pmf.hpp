#pragma once

// Joint law p_{m,n}(s,t) = P(M(s) = m, N(t) = n) of the correlated Poisson
// pair. Everything is evaluated in reduced coordinates
//     y = lambda t / a,    z = (lambda t - a mu s) / a  (< y),
// with unit-rate Poisson weights. The sign of z picks the branch:
//   z < 0 : p = 0 (m < n),  Q_{n,n} (m = n),  Q_{m,n} - Q_{m,n+1} (m > n)
//   z > 0 : A_{m,n} - A_{m,n+1} + B_{m,n} - B_{m,n-1}   (n > m)
//           A_{n,n} - A_{n,n+1} + B_{n,n} + C_{n,n}     (m = n)
//           A_{m,n} - A_{m,n+1} + C_{m,n} - C_{m,n+1}   (m > n)
// Each of Q, A, B, C has a closed elementary form and an integral form; the
// integral forms are evaluated by adaptive quadrature and serve as oracle.

#include <optional>
#include <string_view>
#include <vector>

#include "sdpoisson/mc_estimate.hpp"
#include "sdpoisson/params.hpp"

namespace sdpoisson {

enum class Region { NegZ, PosZ, Boundary };

std::string_view to_string(Region r);

struct ReducedCoords {
    double y;
    double z;
    Region region;
};

/// |z| below this (times max(1, y)) is classified as Boundary.
inline constexpr double kBoundaryRelTolerance = 1e-12;
/// Boundary evaluations from the two sides must agree to this.
inline constexpr double kBoundaryAgreementTolerance = 1e-8;
/// Closed form and quadrature must agree to this when both are computed.
inline constexpr double kConsistencyTolerance = 1e-6;
/// Raw probabilities below -kNegativeSlack are reported as inconsistent.
inline constexpr double kNegativeSlack = 1e-9;
/// Default absolute tolerance of each quadrature term.
inline constexpr double kDefaultQuadratureTolerance = 1e-10;

/// Throws DomainError unless s > 0 and t > 0.
ReducedCoords reduced_coords(const ModelParams& params, double s, double t);

/// Classifies an explicit (y, z) pair; requires y > 0 and z < y.
ReducedCoords make_reduced_coords(double y, double z);

/// P(S_m <= rho, S_n <= tau) for a Poisson process of rate mu.
double joint_ge_prob(unsigned m, unsigned n, double rho, double tau, double mu);

enum class Term { Q, A, B, C };

/// Closed elementary forms. Q needs m >= n and a NegZ or Boundary point;
/// A, B, C need a PosZ or Boundary point (Boundary is read as z = 0+).
/// B needs n >= m, C needs m >= n. Violations throw DomainError.
double Q_closed(unsigned m, unsigned n, const ReducedCoords& c, double a);
double A_closed(unsigned m, unsigned n, const ReducedCoords& c, double a);
double B_closed(unsigned m, unsigned n, const ReducedCoords& c, double a);
double C_closed(unsigned m, unsigned n, const ReducedCoords& c, double a);

/// The defining integral of Q, A, B or C by adaptive Gauss-Kronrod
/// quadrature, with the atom of h_n at w = 0+ added analytically on [0, .]
/// ranges and left out on (z, y]. Throws IntegrationError when the error
/// estimate stays above tol.
double quadrature_term(Term term, unsigned m, unsigned n, const ReducedCoords& c, double a,
                       double tol = kDefaultQuadratureTolerance);

enum class Method { ClosedForm, Quadrature, Auto };
enum class MethodUsed { LemmaExact, ClosedForm, Quadrature };

std::string_view to_string(Method m);
std::string_view to_string(MethodUsed m);

/// Largest max(m, n) for which Auto trusts the closed forms at this a and y.
/// Derived by comparing against the quadrature oracle; see joint_pmf.cpp.
unsigned closed_form_stable_order(double a, double y);
bool closed_form_is_stable(unsigned m, unsigned n, double a, double y);

struct PmfOptions {
    Method method = Method::Auto;
    /// Evaluate both routes and throw ConsistencyError if they differ by more
    /// than kConsistencyTolerance.
    bool cross_check = false;
    double quadrature_tol = kDefaultQuadratureTolerance;
};

struct PmfReport {
    unsigned m = 0;
    unsigned n = 0;
    double s = 0;
    double t = 0;
    ReducedCoords coords{};
    std::optional<double> closed_form;
    std::optional<double> quadrature;
    std::optional<McEstimate> mc_estimate;
    MethodUsed method_used = MethodUsed::LemmaExact;
    /// Value from the route named by method_used, before clamping.
    double raw = 0;
    /// raw clamped to [0, 1].
    double value = 0;
};

/// Evaluates p_{m,n} in reduced coordinates; a is the decomposition
/// parameter. For m < n and z <= 0 the result is exactly 0.
PmfReport joint_pmf_reduced(unsigned m, unsigned n, const ReducedCoords& c, double a, const PmfOptions& opts = {});

PmfReport joint_pmf(const ModelParams& params, unsigned m, unsigned n, double s, double t, Method method);
PmfReport joint_pmf(const ModelParams& params, unsigned m, unsigned n, double s, double t,
                    const PmfOptions& opts = {});

struct PmfTable {
    unsigned m_max = 0;
    unsigned n_max = 0;
    /// entries[m][n] = p_{m,n}, clamped.
    std::vector<std::vector<double>> entries;
    std::vector<double> row_sums;     ///< sum over n for each m
    std::vector<double> column_sums;  ///< sum over m for each n
    double total = 0;
    double deficit = 0;     ///< 1 - total
    double tail_bound = 0;  ///< P(M(s) > m_max) + P(N(t) > n_max)
    /// Cells that took each route.
    unsigned lemma_cells = 0;
    unsigned closed_cells = 0;
    unsigned quadrature_cells = 0;

    /// deficit >= -1e-9 and deficit <= tail_bound + 1e-9.
    bool normalization_ok() const;
};

PmfTable pmf_table(const ModelParams& params, double s, double t, unsigned m_max, unsigned n_max,
                   Method method = Method::Auto);

}  // namespace sdpoisson
