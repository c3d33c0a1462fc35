#pragma once

#include <limits>
#include <optional>
#include <string>
#include <utility>

namespace widecnn {

enum class ActivationKind { ReLU, Sigmoid, Softplus, Identity };

/// Analytic facts about an activation used by the assumption checks and the
/// constructions. Intervals are open; infinities mark unbounded ends.
struct ActivationProfile {
  std::optional<double> limit_neg;  // lim_{t -> -inf}
  std::optional<double> limit_pos;  // lim_{t -> +inf}
  // |s(t)| <= rho1 * exp(rho2 * t) for t < 0
  std::optional<std::pair<double, double>> exp_bound;
  // |s(t)| <= rho3 * t + rho4 for t >= 0
  std::optional<std::pair<double, double>> linear_bound;
  bool strictly_monotone = false;
  bool analytic = false;
  bool differentiable = false;
  std::pair<double, double> range_interval{-std::numeric_limits<double>::infinity(),
                                           std::numeric_limits<double>::infinity()};
  // An interval on which the activation is a bijection onto its image.
  std::pair<double, double> bijective_interval{-std::numeric_limits<double>::infinity(),
                                               std::numeric_limits<double>::infinity()};

  /// Either finite limits with mu+ * mu- = 0, or both growth bounds.
  bool satisfies_growth_condition() const;
};

class Activation {
 public:
  Activation() = default;

  static Activation relu() { return Activation(ActivationKind::ReLU, 1.0); }
  static Activation sigmoid() { return Activation(ActivationKind::Sigmoid, 1.0); }
  static Activation softplus(double alpha);
  static Activation identity() { return Activation(ActivationKind::Identity, 1.0); }

  ActivationKind kind() const { return kind_; }
  // Sharpness of softplus; 1 for every other kind.
  double alpha() const { return alpha_; }

  double operator()(double t) const;
  /// ReLU uses 0 as its derivative at the kink.
  double derivative(double t) const;
  /// Inverse on the open range; throws Range for values outside it or for ReLU at 0.
  double inverse(double y) const;

  ActivationProfile profile() const;
  /// A bias value with s(beta) != 0 that sits inside the bijective interval.
  double default_beta() const;

  std::string name() const;
  static Activation parse(const std::string& text);

  friend bool operator==(const Activation& a, const Activation& b) {
    return a.kind_ == b.kind_ && a.alpha_ == b.alpha_;
  }

 private:
  Activation(ActivationKind kind, double alpha) : kind_(kind), alpha_(alpha) {}

  ActivationKind kind_ = ActivationKind::Identity;
  double alpha_ = 1.0;
};

}  // namespace widecnn
