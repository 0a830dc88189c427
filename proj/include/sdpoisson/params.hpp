#pragma once

namespace sdpoisson {

/// Rates of the two renewal chains and the decomposition parameter.
/// lambda drives T_n / N(t), mu drives S_n / M(s); 0 < a < 1 strictly.
/// The a -> 0 and a -> 1 limits are not valid parameters; see
/// sd_exponential.hpp for the dedicated limit samplers.
class ModelParams {
  public:
    /// Throws DomainError unless lambda > 0, mu > 0 and 0 < a < 1.
    ModelParams(double lambda, double mu, double a);

    double lambda() const noexcept { return lambda_; }
    double mu() const noexcept { return mu_; }
    double a() const noexcept { return a_; }

    /// a * mu / lambda, the slope linking T_n and S_n.
    double slope() const noexcept { return a_ * mu_ / lambda_; }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;

  private:
    double lambda_;
    double mu_;
    double a_;
};

}  // namespace sdpoisson
