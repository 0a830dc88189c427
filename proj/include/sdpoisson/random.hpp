#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <random>

namespace sdpoisson {

/// Anything the samplers can draw from. Uniforms lie in [0, 1); exponentials
/// have unit rate.
template <class R>
concept VariateSource = requires(R& r) {
    { r.uniform() } -> std::convertible_to<double>;
    { r.standard_exponential() } -> std::convertible_to<double>;
};

/// splitmix64 finalizer; used to derive independent worker seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of parallel worker `index` under `master`:
///   splitmix64(master ^ splitmix64(index + 1)).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(master ^ splitmix64(index + 1));
}

/// Reproducible stream on top of mt19937_64. Variates are produced from the
/// raw 64-bit output by fixed formulas, so sequences do not depend on the
/// standard library's distribution implementations.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    /// 53-bit uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// -log(1 - U); finite because U < 1.
    double standard_exponential() { return -std::log1p(-uniform()); }

  private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

static_assert(VariateSource<RandomStream>);

}  // namespace sdpoisson
