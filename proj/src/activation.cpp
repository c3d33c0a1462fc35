#include "widecnn/activation.hpp"

#include <cmath>
#include <sstream>

#include "widecnn/error.hpp"

namespace widecnn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double stable_sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1 + e^x) without overflow for large x
double log1p_exp(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

}  // namespace

bool ActivationProfile::satisfies_growth_condition() const {
  if (limit_neg && limit_pos && std::isfinite(*limit_neg) && std::isfinite(*limit_pos) &&
      (*limit_neg) * (*limit_pos) == 0.0) {
    return true;
  }
  return exp_bound.has_value() && linear_bound.has_value();
}

Activation Activation::softplus(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorKind::Structural, "softplus alpha must be a positive finite number");
  }
  return Activation(ActivationKind::Softplus, alpha);
}

double Activation::operator()(double t) const {
  switch (kind_) {
    case ActivationKind::ReLU: return t > 0.0 ? t : 0.0;
    case ActivationKind::Sigmoid: return stable_sigmoid(t);
    case ActivationKind::Softplus: return log1p_exp(alpha_ * t) / alpha_;
    case ActivationKind::Identity: return t;
  }
  return t;
}

double Activation::derivative(double t) const {
  switch (kind_) {
    case ActivationKind::ReLU: return t > 0.0 ? 1.0 : 0.0;
    case ActivationKind::Sigmoid: {
      const double s = stable_sigmoid(t);
      return s * (1.0 - s);
    }
    case ActivationKind::Softplus: return stable_sigmoid(alpha_ * t);
    case ActivationKind::Identity: return 1.0;
  }
  return 1.0;
}

double Activation::inverse(double y) const {
  auto out_of_range = [&] {
    std::ostringstream os;
    os << name() << " cannot be inverted at " << y;
    return Error(ErrorKind::Range, os.str());
  };
  switch (kind_) {
    case ActivationKind::ReLU:
      if (!(y > 0.0)) throw out_of_range();
      return y;
    case ActivationKind::Sigmoid:
      if (!(y > 0.0 && y < 1.0)) throw out_of_range();
      return std::log(y) - std::log1p(-y);
    case ActivationKind::Softplus: {
      if (!(y > 0.0) || !std::isfinite(y)) throw out_of_range();
      const double ay = alpha_ * y;
      // log(e^{ay} - 1) = ay + log(1 - e^{-ay})
      return (ay > 1.0 ? ay + std::log1p(-std::exp(-ay)) : std::log(std::expm1(ay))) / alpha_;
    }
    case ActivationKind::Identity: return y;
  }
  return y;
}

ActivationProfile Activation::profile() const {
  ActivationProfile p;
  switch (kind_) {
    case ActivationKind::ReLU:
      p.limit_neg = 0.0;
      p.exp_bound = std::make_pair(1.0, 1.0);
      p.linear_bound = std::make_pair(1.0, 1.0);
      p.range_interval = {0.0, kInf};
      p.bijective_interval = {0.0, kInf};
      break;
    case ActivationKind::Sigmoid:
      p.limit_neg = 0.0;
      p.limit_pos = 1.0;
      p.strictly_monotone = true;
      p.analytic = true;
      p.differentiable = true;
      p.range_interval = {0.0, 1.0};
      break;
    case ActivationKind::Softplus:
      p.limit_neg = 0.0;
      p.exp_bound = std::make_pair(1.0 / alpha_, alpha_);
      p.linear_bound = std::make_pair(1.0, std::log(2.0) / alpha_);
      p.strictly_monotone = true;
      p.analytic = true;
      p.differentiable = true;
      p.range_interval = {0.0, kInf};
      break;
    case ActivationKind::Identity:
      p.strictly_monotone = true;
      p.analytic = true;
      p.differentiable = true;
      break;
  }
  return p;
}

double Activation::default_beta() const {
  switch (kind_) {
    case ActivationKind::Sigmoid: return 0.0;
    case ActivationKind::ReLU:
    case ActivationKind::Softplus:
    case ActivationKind::Identity: return 1.0;
  }
  return 1.0;
}

std::string Activation::name() const {
  switch (kind_) {
    case ActivationKind::ReLU: return "relu";
    case ActivationKind::Sigmoid: return "sigmoid";
    case ActivationKind::Softplus: {
      std::ostringstream os;
      os.precision(17);
      os << "softplus(" << alpha_ << ")";
      return os.str();
    }
    case ActivationKind::Identity: return "identity";
  }
  return "identity";
}

Activation Activation::parse(const std::string& text) {
  if (text == "relu") return relu();
  if (text == "sigmoid") return sigmoid();
  if (text == "identity") return identity();
  if (text.rfind("softplus", 0) == 0) {
    if (text == "softplus") return softplus(1.0);
    if (text.size() > 10 && text[8] == '(' && text.back() == ')') {
      try {
        std::size_t used = 0;
        const std::string inner = text.substr(9, text.size() - 10);
        const double alpha = std::stod(inner, &used);
        if (used == inner.size()) return softplus(alpha);
      } catch (const std::logic_error&) {
      }
    }
  }
  throw Error(ErrorKind::Structural, "unknown activation '" + text + "'");
}

}  // namespace widecnn
