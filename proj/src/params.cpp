#include "sdpoisson/params.hpp"

#include <cmath>
#include <string>

#include "sdpoisson/errors.hpp"

namespace sdpoisson {

ModelParams::ModelParams(double lambda, double mu, double a) : lambda_(lambda), mu_(mu), a_(a) {
    if (!(lambda > 0) || std::isinf(lambda)) throw DomainError("lambda must be a positive finite rate");
    if (!(mu > 0) || std::isinf(mu)) throw DomainError("mu must be a positive finite rate");
    if (!(a > 0 && a < 1))
        throw DomainError("a must lie strictly inside (0,1); got " + std::to_string(a) +
                          " (use the limit samplers for a = 0 or a = 1)");
}

}  // namespace sdpoisson
