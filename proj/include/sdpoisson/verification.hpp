#pragma once

// The verification suite run by `sdpoisson verify`: closed forms against the
// quadrature oracle, the exact zero region, continuity across z = 0,
// normalization of the table and Monte Carlo agreement.

#include <cstdint>
#include <string>
#include <vector>

#include "sdpoisson/harness.hpp"

namespace sdpoisson {

/// One (a, s, t) point of the verification grid. t = ratio * a mu s / lambda,
/// so ratio < 1 is the z < 0 side and ratio > 1 the z > 0 side.
struct GridPoint {
    double a;
    double s;
    double t;
    double ratio;
};

/// Each a crossed with s in {0.5, 1, 2, 3, 4} and ratio in {0.25, 0.6, 1.4, 2.2, 3.5}.
std::vector<GridPoint> verification_grid(double lambda, double mu, const std::vector<double>& a_values);

struct VerifyOptions {
    double lambda = 1.2;
    double mu = 0.8;
    std::vector<double> a_values = {0.2, 0.5, 0.8};
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 20261015;
    unsigned workers = kDefaultWorkers;
    /// Skip the Monte Carlo suite entirely.
    bool skip_monte_carlo = false;

    friend bool operator==(const VerifyOptions&, const VerifyOptions&) = default;
};

struct CheckResult {
    std::string name;
    Verdict verdict = Verdict::Pass;
    /// The statistic that was compared with the threshold.
    double measured = 0;
    double threshold = 0;
    std::string detail;
};

/// Runs every suite; checks appear in a fixed order.
std::vector<CheckResult> run_verification(const VerifyOptions& opts);

/// Worst verdict over the checks; Pass for an empty list.
Verdict overall_verdict(const std::vector<CheckResult>& checks);

}  // namespace sdpoisson
