#include "widecnn/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "widecnn/backprop.hpp"
#include "widecnn/error.hpp"
#include "widecnn/forward.hpp"
#include "widecnn/lifting.hpp"

namespace widecnn {

bool BoundReport::sandwich_holds(double relative_slack) const {
  const double lo_ok = lower - relative_slack * std::max(lower, grad_norm);
  const double hi_ok = upper + relative_slack * std::max(upper, grad_norm);
  return lo_ok <= grad_norm && grad_norm <= hi_ok;
}

namespace {

void require_wide_layer(const NetworkSpec& spec, std::size_t k) {
  if (k == 0 || k >= spec.depth()) {
    throw Error(ErrorKind::Precondition, "wide layer must lie in [1, L-1], got " + std::to_string(k));
  }
}

void require_trace(const NetworkSpec& spec, const ForwardTrace& trace) {
  if (trace.F.size() != spec.depth() + 1) throw Error(ErrorKind::Structural, "trace does not cover the network");
}

}  // namespace

BoundReport gradient_bounds(const NetworkSpec& spec, const Params& params, const ForwardTrace& trace,
                            const Matrix& Y, std::size_t k) {
  require_wide_layer(spec, k);
  require_trace(spec, trace);
  const std::size_t L = spec.depth();
  for (std::size_t l = k + 1; l <= L; ++l) {
    if (spec.layer(l).kind() == LayerKind::MaxPool) {
      throw Error(ErrorKind::Precondition, "max-pool layer " + std::to_string(l) + " above the wide layer");
    }
    if (spec.width(l) > spec.width(l - 1) && l > k + 1) {
      throw Error(ErrorKind::Precondition, "widths above layer " + std::to_string(k) + " are not pyramidal");
    }
  }

  BoundReport report;
  report.wide_layer = k;
  const Matrix& Fk = trace.F[k];
  const Vector sv = singular_values(Fk);
  report.sigma_max_F = sv.size() ? sv(0) : 0.0;
  report.sigma_min_F = sv.size() ? sv(sv.size() - 1) : 0.0;
  report.residual = (trace.output() - Y).norm();

  double lower = Fk.cols() >= Fk.rows() ? report.sigma_min_F : 0.0;
  double upper = report.sigma_max_F;
  for (std::size_t l = k + 1; l + 1 <= L; ++l) {
    BoundFactor f;
    f.layer = l;
    const Vector su = singular_values(lift_weights(spec, l + 1, params.at(l + 1).W));
    f.sigma_max_U = su.size() ? su(0) : 0.0;
    f.sigma_min_U = su.size() ? su(su.size() - 1) : 0.0;
    const Matrix d = patch_ops::apply_derivative(spec.layer(l).activation(), trace.G[l]).cwiseAbs();
    f.min_abs_derivative = d.minCoeff();
    f.max_abs_derivative = d.maxCoeff();
    lower *= f.sigma_min_U * f.min_abs_derivative;
    upper *= f.sigma_max_U * f.max_abs_derivative;
    report.factors.push_back(f);
  }
  report.lower_factor = lower;
  report.upper_factor = upper;
  report.lower = lower * report.residual;
  report.upper = upper * report.residual;

  BackwardOptions options;
  options.start_layer = k + 1;
  options.lifted_layers = {k + 1};
  const GradientSet grads = backward(spec, params, trace, Y, options);
  report.grad_norm = grads.at(k + 1).grad_U->norm();
  return report;
}

SkMembership s_k_membership(const NetworkSpec& spec, const Params& params, const ForwardTrace& trace,
                            std::size_t k) {
  require_wide_layer(spec, k);
  require_trace(spec, trace);
  SkMembership out;
  out.features = estimate_rank(trace.F[k]);
  out.in_S_k = out.features.full_row_rank();
  for (std::size_t l = k + 2; l <= spec.depth(); ++l) {
    if (!spec.layer(l).has_params()) {
      out.in_S_k = false;
      continue;
    }
    out.lifted.push_back(estimate_rank(lift_weights(spec, l, params.at(l).W)));
    out.in_S_k = out.in_S_k && out.lifted.back().full_rank();
  }
  return out;
}

CriticalPointReport critical_point_check(const NetworkSpec& spec, const Params& params, const Dataset& data,
                                         std::size_t k, double tol) {
  if (tol < 0.0) throw Error(ErrorKind::Precondition, "tolerance must be non-negative");
  const ForwardTrace trace = forward(spec, params, data.X);
  CriticalPointReport report;
  report.membership = s_k_membership(spec, params, trace, k);
  report.loss = loss(trace, data.Y);
  report.applicable = report.membership.in_S_k;
  if (!report.applicable) return report;
  const BoundReport bounds = gradient_bounds(spec, params, trace, data.Y, k);
  report.grad_norm = bounds.grad_norm;
  report.grad_tolerance = bounds.upper_factor * std::sqrt(2.0 * tol);
  report.equivalence_holds = (report.loss <= tol) == (report.grad_norm <= report.grad_tolerance);
  return report;
}

WidthAudit width_audit(const NetworkSpec& spec, std::size_t N) {
  WidthAudit audit;
  audit.widths = spec.widths();
  const std::size_t L = spec.depth();
  for (std::size_t k = 1; k < L; ++k) {
    if (audit.widths[k] > audit.max_width) {
      audit.max_width = audit.widths[k];
      audit.arg_layer = k;
    }
  }
  audit.wide_enough = audit.arg_layer != 0 && audit.max_width >= N;
  // Walk down from the top while widths stay nonincreasing.
  std::size_t from = L - 1;
  while (from >= 1 && audit.widths[from] >= audit.widths[from + 1]) --from;
  if (L >= 2) audit.pyramidal_from = std::max<std::size_t>(from, 1);
  return audit;
}

}  // namespace widecnn
