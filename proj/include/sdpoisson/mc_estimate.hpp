#pragma once

#include <cstdint>

namespace sdpoisson {

/// Frequency estimate of a probability; std_error = sqrt(v (1 - v) / n).
struct McEstimate {
    double value = 0;
    double std_error = 0;
    std::uint64_t n_samples = 0;
    std::uint64_t seed = 0;

    friend bool operator==(const McEstimate&, const McEstimate&) = default;
};

}  // namespace sdpoisson
