#include "sdpoisson/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sdpoisson/errors.hpp"

namespace sdpoisson {

RenewalPath::RenewalPath(const ModelParams& params, std::uint64_t seed, std::vector<double> y_sums,
                         std::vector<double> zeta, std::vector<unsigned> b_count)
    : params_(params),
      seed_(seed),
      y_sums_(std::move(y_sums)),
      zeta_(std::move(zeta)),
      b_count_(std::move(b_count)) {
    if (y_sums_.empty() || y_sums_.size() != zeta_.size() || y_sums_.size() != b_count_.size())
        throw DomainError("RenewalPath: inconsistent component lengths");
    const double a = params_.a();
    const double s_scale = params_.lambda() / params_.mu();
    t_.resize(y_sums_.size());
    s_.resize(y_sums_.size());
    for (std::size_t k = 0; k < y_sums_.size(); ++k) {
        t_[k] = a * y_sums_[k] + zeta_[k];
        s_[k] = s_scale * y_sums_[k];
    }
}

RenewalPath simulate_path(const ModelParams& params, std::size_t n_renewals, std::uint64_t seed) {
    if (n_renewals == 0) throw DomainError("simulate_path: n_renewals must be >= 1");
    RandomStream rng(seed);
    return simulate_path(params, n_renewals, rng, seed);
}

unsigned count_at(const RenewalPath& path, double t, Counter which) {
    if (!(t >= 0)) throw DomainError("count_at: time must be >= 0");
    const auto& arrivals = which == Counter::N ? path.t_arrivals() : path.s_arrivals();
    if (t >= arrivals.back())
        throw PathExhaustedError("count_at: t = " + std::to_string(t) + " is not below the last simulated arrival " +
                                 std::to_string(arrivals.back()));
    const auto it = std::upper_bound(arrivals.begin(), arrivals.end(), t);
    return static_cast<unsigned>(std::distance(arrivals.begin(), it) - 1);
}

double compensated_at(const RenewalPath& path, double t, Counter which) {
    const double rate = which == Counter::N ? path.params().lambda() : path.params().mu();
    return static_cast<double>(count_at(path, t, which)) - rate * t;
}

special::AtomPlusDensity zeta_pmf_mixture(unsigned n, const ModelParams& params) {
    const auto standard = special::erlang_mixture_density(n, params.a());
    return special::AtomPlusDensity(standard.atom_weight(), params.lambda(), standard.erlang_weights());
}

}  // namespace sdpoisson
