#include "sdpoisson/sd_exponential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdpoisson/errors.hpp"

namespace sdpoisson {

double za_cdf(double z, const ModelParams& params) {
    if (z < 0) return 0;
    const double a = params.a();
    return a - (1 - a) * std::expm1(-params.lambda() * z);
}

double xy_joint_cdf(double x, double y, const ModelParams& params) {
    if (x < 0 || y < 0) return 0;
    const double a = params.a();
    const double lambda = params.lambda();
    const double m = std::min(y, x / a);
    if (std::isinf(m)) return 1;
    const double ex = std::isinf(x) ? 0.0 : std::exp(-lambda * x);
    return -std::expm1(-lambda * m) + ex * std::expm1(-lambda * (1 - a) * m);
}

double XyJointLaw::line_mass_density(double y) const {
    if (y < 0) return 0;
    return a_ * lambda_ * std::exp(-lambda_ * y);
}

double XyJointLaw::continuous_density(double x, double y) const {
    if (!(y > 0) || !(x > a_ * y)) return 0;
    return (1 - a_) * lambda_ * lambda_ * std::exp(-lambda_ * y) * std::exp(-lambda_ * (x - a_ * y));
}

XyJointLaw xy_joint_law(const ModelParams& params) { return XyJointLaw(params); }

Correlations theoretical_correlations(const ModelParams& params) {
    const double a = params.a();
    return {a, 1 - a, 1 - a * a};
}

double naive_sum_density(double x, const ModelParams& params) {
    if (!(x > 0)) return 0;
    const double a = params.a();
    const double lambda = params.lambda();
    // lambda/(1-2a) (e^{-lx/(1-a)} - e^{-lx/a}) rewritten around expm1 so the
    // a = 1/2 limit is reached continuously.
    const double c = lambda * x / (a * (1 - a));
    const double t = c * (1 - 2 * a);
    if (t == 0) return lambda * c * std::exp(-lambda * x / a);
    if (t > 0) return lambda * c * std::exp(-lambda * x / (1 - a)) * (-std::expm1(-t) / t);
    return lambda * c * std::exp(-lambda * x / a) * (std::expm1(t) / t);
}

}  // namespace sdpoisson
