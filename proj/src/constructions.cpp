#include "widecnn/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "widecnn/assumptions.hpp"
#include "widecnn/backprop.hpp"
#include "widecnn/error.hpp"
#include "widecnn/forward.hpp"
#include "widecnn/lifting.hpp"

namespace widecnn {

ConstructionParams ConstructionParams::defaults(std::uint64_t seed) {
  ConstructionParams cfg;
  for (int e = 0; e <= 20; ++e) cfg.alpha_schedule.push_back(std::ldexp(1.0, e));
  cfg.seed = seed;
  return cfg;
}

void ConstructionParams::validate() const {
  if (alpha_schedule.empty()) throw Error(ErrorKind::Precondition, "alpha schedule is empty");
  for (std::size_t i = 0; i < alpha_schedule.size(); ++i) {
    if (!(alpha_schedule[i] > 0.0) || (i > 0 && !(alpha_schedule[i] > alpha_schedule[i - 1]))) {
      throw Error(ErrorKind::Precondition, "alpha schedule must be positive and strictly increasing");
    }
  }
  if (!(sigma_min_floor > 0.0)) throw Error(ErrorKind::Precondition, "sigma_min_floor must be positive");
  if (resample_budget == 0) throw Error(ErrorKind::Precondition, "resample budget must be at least 1");
  if (collision_tolerance < 0.0) throw Error(ErrorKind::Precondition, "collision tolerance must be non-negative");
}

namespace {

std::mt19937_64 layer_stream(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag)};
  return std::mt19937_64(seq);
}

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix Q(rows, cols);
  for (Eigen::Index i = 0; i < Q.size(); ++i) Q.data()[i] = normal(rng);
  return Q;
}

// Row i*P + p, column t holds <q^t, patch p of sample i>.
Matrix inner_products(const LayerSpec& layer, const Matrix& F_prev, const Matrix& Q) {
  if (layer.layout().is_identity_patch()) return F_prev * Q;
  return patch_ops::gather(F_prev, layer.layout()) * Q;
}

// Smallest distance between values that belong to different samples; row r
// of V belongs to sample r / rows_per_sample.
double min_cross_gap(const Matrix& V, std::size_t rows_per_sample) {
  std::vector<std::pair<double, std::size_t>> tagged;
  tagged.reserve(static_cast<std::size_t>(V.size()));
  for (Eigen::Index r = 0; r < V.rows(); ++r) {
    const std::size_t sample = static_cast<std::size_t>(r) / rows_per_sample;
    for (Eigen::Index c = 0; c < V.cols(); ++c) tagged.emplace_back(V(r, c), sample);
  }
  std::sort(tagged.begin(), tagged.end());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < tagged.size(); ++i) {
    if (tagged[i].second != tagged[i - 1].second) gap = std::min(gap, tagged[i].first - tagged[i - 1].first);
  }
  return gap;
}

void require_distinct_input(const NetworkSpec& spec, const Matrix& X) {
  const DistinctPatchesResult check = check_distinct_patches(X, spec.layer(1).layout(), 0.0);
  if (!check.holds) {
    const PatchCollision& w = *check.witness;
    std::ostringstream os;
    os << "distinct-patch assumption fails: patch " << w.p << " of sample " << w.i << " equals patch " << w.q
       << " of sample " << w.j;
    throw Error(ErrorKind::Precondition, os.str());
  }
}

void require_parameterized(const NetworkSpec& spec, std::size_t k) {
  const LayerKind kind = spec.layer(k).kind();
  if (kind != LayerKind::Convolutional && kind != LayerKind::FullyConnected) {
    throw Error(ErrorKind::Precondition, "layer " + std::to_string(k) + " must be convolutional or fully connected");
  }
}

double beta_for(const Activation& act, const ConstructionParams& cfg) {
  const double beta = cfg.beta.value_or(act.default_beta());
  if (act(beta) == 0.0) throw Error(ErrorKind::Precondition, "beta must satisfy s(beta) != 0");
  return beta;
}

// Layers 1..k of `params` are filled in place; X must already satisfy the
// distinct-patch assumption.
void transport_into(const NetworkSpec& spec, const Matrix& X, std::size_t k, const ConstructionParams& cfg,
                    Params& params) {
  const std::size_t N = static_cast<std::size_t>(X.rows());
  Matrix F = X;
  for (std::size_t l = 1; l <= k; ++l) {
    const LayerSpec& layer = spec.layer(l);
    if (layer.kind() == LayerKind::MaxPool) {
      F = patch_ops::max_pool(layer.layout(), F);
      if (N > 1 && !(min_cross_gap(F, 1) > 0.0)) {
        throw Error(ErrorKind::ConstructionFailed, "pooling at layer " + std::to_string(l) + " merged feature values");
      }
      continue;
    }
    const Activation& act = layer.activation();
    const double beta = beta_for(act, cfg);
    const auto [lo, hi] = act.profile().bijective_interval;
    if (!(lo < beta && beta < hi)) {
      throw Error(ErrorKind::Precondition, "beta lies outside the bijective interval of " + act.name());
    }
    const std::size_t P = layer.layout().patch_count();
    std::mt19937_64 rng = layer_stream(cfg.seed, l);
    bool done = false;
    for (std::size_t attempt = 0; attempt < cfg.resample_budget && !done; ++attempt) {
      Matrix Q = gaussian_matrix(static_cast<Eigen::Index>(layer.filter_length()),
                                 static_cast<Eigen::Index>(layer.filter_count()), rng);
      Matrix V = inner_products(layer, F, Q);
      const double scale = V.cwiseAbs().maxCoeff();
      if (!(scale > 0.0)) continue;
      Q /= scale;
      V /= scale;
      if (N > 1 && !(min_cross_gap(V, P) > cfg.collision_tolerance)) continue;
      if (!estimate_rank(lift_weights(layer, Q)).full_rank()) continue;
      for (double s : cfg.alpha_schedule) {
        const double alpha = 1.0 / s;
        if (!(lo < beta - alpha && beta + alpha < hi)) continue;
        LayerParams lp{alpha * Q, Vector::Constant(static_cast<Eigen::Index>(layer.width()), beta)};
        Matrix next = patch_ops::apply(act, patch_ops::preactivation(layer, lp, F));
        const double out_scale = std::max(1.0, next.cwiseAbs().maxCoeff());
        if (N > 1 && !(min_cross_gap(next, 1) > cfg.collision_tolerance * out_scale)) continue;
        params.at(l) = std::move(lp);
        F = std::move(next);
        done = true;
        break;
      }
    }
    if (!done) {
      throw Error(ErrorKind::ConstructionFailed,
                  "no filter draw kept samples apart at layer " + std::to_string(l) + " within the resample budget");
    }
  }
}

Params empty_params(const NetworkSpec& spec) {
  Params params;
  params.layers.resize(spec.depth());
  return params;
}

std::pair<double, double> safe_targets(const Activation& act) {
  switch (act.kind()) {
    case ActivationKind::Sigmoid: return {0.2, 0.8};
    case ActivationKind::Softplus: return {0.5, 1.5};
    default:
      throw Error(ErrorKind::Range, "no invertible target range for activation " + act.name());
  }
}

Matrix apply_inverse(const Activation& act, const Matrix& D) {
  return D.unaryExpr([&](double v) { return act.inverse(v); });
}

}  // namespace

Params transport_construction(const NetworkSpec& spec, const Matrix& X, std::size_t k,
                              const ConstructionParams& cfg) {
  cfg.validate();
  if (k == 0 || k >= spec.depth()) throw Error(ErrorKind::Precondition, "transport layer must lie in [1, L-1]");
  require_parameterized(spec, 1);
  if (auto problem = hidden_activation_problem(spec, k)) throw Error(ErrorKind::Assumption, *problem);
  require_distinct_input(spec, X);
  Params params = empty_params(spec);
  transport_into(spec, X, k, cfg, params);
  return params;
}

IndependenceResult independence_construction(const NetworkSpec& spec, const Matrix& X, std::size_t k,
                                              const ConstructionParams& cfg) {
  cfg.validate();
  if (k == 0 || k >= spec.depth()) throw Error(ErrorKind::Precondition, "wide layer must lie in [1, L-1]");
  require_parameterized(spec, 1);
  require_parameterized(spec, k);
  const std::size_t N = static_cast<std::size_t>(X.rows());
  const LayerSpec& layer = spec.layer(k);
  if (layer.width() < N) {
    throw Error(ErrorKind::Width, "layer " + std::to_string(k) + " has " + std::to_string(layer.width()) +
                                      " units for " + std::to_string(N) + " samples");
  }
  if (auto problem = hidden_activation_problem(spec, k)) throw Error(ErrorKind::Assumption, *problem);
  require_distinct_input(spec, X);

  IndependenceResult result;
  result.params = empty_params(spec);
  transport_into(spec, X, k - 1, cfg, result.params);
  const Matrix F_prev = k == 1 ? X : forward(spec, result.params, X, k - 1).F[k - 1];

  const Activation& act = layer.activation();
  const double beta = beta_for(act, cfg);
  const std::size_t T = layer.filter_count();
  const std::size_t P = layer.layout().patch_count();
  const std::size_t n = layer.width();
  std::mt19937_64 rng = layer_stream(cfg.seed, k);

  for (std::size_t attempt = 0; attempt < cfg.resample_budget; ++attempt) {
    Matrix Q = gaussian_matrix(static_cast<Eigen::Index>(layer.filter_length()), static_cast<Eigen::Index>(T), rng);
    Matrix V = inner_products(layer, F_prev, Q);
    const double scale = V.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) continue;
    Q /= scale;
    V /= scale;
    auto value = [&](std::size_t i, std::size_t j) {
      return V(static_cast<Eigen::Index>(i * P + j / T), static_cast<Eigen::Index>(j % T));
    };

    // Every unit used by the N x N block must see N distinct inner products.
    bool separated = true;
    std::vector<double> column(N);
    for (std::size_t j = 0; j < N && separated; ++j) {
      for (std::size_t i = 0; i < N; ++i) column[i] = value(i, j);
      std::sort(column.begin(), column.end());
      for (std::size_t i = 1; i < N; ++i) {
        if (!(column[i] - column[i - 1] > cfg.collision_tolerance)) {
          separated = false;
          break;
        }
      }
    }
    if (!separated || !estimate_rank(lift_weights(layer, Q)).full_rank()) continue;

    std::vector<std::size_t> gamma(N);
    std::vector<bool> used(N, false);
    for (std::size_t j = 0; j < N; ++j) {
      std::size_t best = N;
      for (std::size_t i = 0; i < N; ++i) {
        if (!used[i] && (best == N || value(i, j) < value(best, j))) best = i;
      }
      used[best] = true;
      gamma[j] = best;
    }
    Vector offsets(static_cast<Eigen::Index>(n));
    for (std::size_t h = 0; h < n; ++h) offsets[static_cast<Eigen::Index>(h)] = value(gamma[h % N], h);

    for (double alpha : cfg.alpha_schedule) {
      LayerParams lp{-alpha * Q, (alpha * offsets.array() + beta).matrix()};
      const Matrix G = patch_ops::preactivation(layer, lp, F_prev);
      const Matrix Fk = patch_ops::apply(act, G);
      if (!Fk.allFinite()) break;
      const Vector sv = singular_values(Fk.leftCols(static_cast<Eigen::Index>(N)));
      const double smin = sv(sv.size() - 1);
      if (smin < cfg.sigma_min_floor) continue;
      RankReport rank = estimate_rank(Fk);
      if (rank.estimated_rank != N) continue;
      result.params.at(k) = std::move(lp);
      result.gamma = std::move(gamma);
      result.alpha = alpha;
      result.submatrix_sigma_min = smin;
      result.rank = rank;
      return result;
    }
  }
  throw Error(ErrorKind::ConstructionFailed,
              "alpha schedule exhausted without rank " + std::to_string(N) + " at layer " + std::to_string(k));
}

Matrix min_norm_solution(const Matrix& F, const Matrix& R) {
  if (F.rows() != R.rows()) throw Error(ErrorKind::Structural, "right-hand side has the wrong number of rows");
  const Vector sv = singular_values(F);
  const double smax = sv.size() ? sv(0) : 0.0;
  const double smin = sv.size() ? sv(sv.size() - 1) : 0.0;
  if (F.rows() > F.cols() || !(smin > 0.0) || (smax / smin) * (smax / smin) > 1e12) {
    std::ostringstream os;
    os << "Gram matrix of the features is singular or nearly so (sigma_min " << smin << ", sigma_max " << smax
       << "); a larger alpha or a wider layer may help";
    throw Error(ErrorKind::IllConditioned, os.str());
  }
  const Matrix gram = F * F.transpose();
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  // Refine on the residual of F W = R itself: z can be far larger than W, so
  // forming F^T z once would lose the small end of the solution.
  Matrix W = F.transpose() * ldlt.solve(Eigen::MatrixXd(R));
  for (int sweep = 0; sweep < 3; ++sweep) {
    const Eigen::MatrixXd residual = R - F * W;
    W += F.transpose() * ldlt.solve(residual);
  }
  return W;
}

ExpressivityResult expressivity_fit(const NetworkSpec& spec, const Matrix& X, const Vector& y,
                                    const ConstructionParams& cfg) {
  const std::size_t L = spec.depth();
  if (spec.output_width() != 1) throw Error(ErrorKind::Precondition, "expressivity fit needs a scalar output");
  if (y.size() != X.rows()) throw Error(ErrorKind::Structural, "target length differs from the sample count");
  if (L < 2) throw Error(ErrorKind::Precondition, "expressivity fit needs a hidden layer");

  IndependenceResult ind = independence_construction(spec, X, L - 1, cfg);
  ExpressivityResult result;
  result.params = std::move(ind.params);
  const Matrix F = forward(spec, result.params, X, L - 1).F[L - 1];
  result.lambda = min_norm_solution(F, Matrix(y));
  result.params.at(L) = {Matrix(result.lambda), Vector::Zero(1)};
  const Matrix out = forward(spec, result.params, X).output();
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    result.max_residual = std::max(result.max_residual, std::abs(out(i, 0) - y[i]) / (1.0 + std::abs(y[i])));
  }
  return result;
}

ZeroLossResult zero_loss_construction(const NetworkSpec& spec, const Dataset& data, std::size_t k,
                                      const ConstructionParams& cfg) {
  cfg.validate();
  data.check();
  const std::size_t L = spec.depth();
  if (!data.labels || !data.Z) throw Error(ErrorKind::Precondition, "zero-loss construction needs labels and Z");
  const Matrix& Z = *data.Z;
  const std::vector<int>& labels = *data.labels;
  const Eigen::Index m = Z.rows();
  if (estimate_rank(Z).estimated_rank != static_cast<std::size_t>(m)) {
    throw Error(ErrorKind::Precondition, "class embedding Z is not of full rank");
  }
  if (k == 0 || k >= L) throw Error(ErrorKind::Precondition, "wide layer must lie in [1, L-1]");
  for (std::size_t l = k + 2; l <= L; ++l) {
    if (spec.width(l) > spec.width(l - 1)) {
      throw Error(ErrorKind::Assumption, "widths above layer " + std::to_string(k) + " are not pyramidal");
    }
  }
  for (std::size_t l = k + 1; l < L; ++l) {
    const LayerSpec& layer = spec.layer(l);
    if (layer.kind() == LayerKind::MaxPool) {
      throw Error(ErrorKind::Assumption, "max-pool layer " + std::to_string(l) + " above the wide layer");
    }
    const ActivationProfile profile = layer.activation().profile();
    if (!profile.strictly_monotone || !profile.differentiable ||
        layer.activation().kind() == ActivationKind::Identity) {
      throw Error(ErrorKind::Assumption, "layer " + std::to_string(l) + " activation " + layer.activation().name() +
                                             " is not a strictly monotone differentiable nonlinearity");
    }
  }
  if (k + 1 < L && spec.layer(k + 1).kind() != LayerKind::FullyConnected) {
    throw Error(ErrorKind::Precondition, "layer " + std::to_string(k + 1) + " must be fully connected");
  }

  auto class_rows = [&](const Matrix& rows) {
    Matrix D(static_cast<Eigen::Index>(labels.size()), rows.cols());
    for (std::size_t i = 0; i < labels.size(); ++i) D.row(static_cast<Eigen::Index>(i)) = rows.row(labels[i]);
    return D;
  };

  ZeroLossResult result;
  IndependenceResult ind = independence_construction(spec, data.X, k, cfg);
  result.params = std::move(ind.params);
  const Matrix Fk = forward(spec, result.params, data.X, k).F[k];
  const Vector zero_out = Vector::Zero(m);
  std::mt19937_64 rng = layer_stream(cfg.seed, 0xC1A55ULL);

  if (k == L - 1) {
    result.proof_case = 1;
    result.params.at(L) = {min_norm_solution(Fk, data.Y), zero_out};
  } else if (k == L - 2) {
    result.proof_case = 2;
    const Activation& act = spec.layer(L - 1).activation();
    const auto [lo, hi] = safe_targets(act);
    std::uniform_real_distribution<double> pre(act.inverse(lo), act.inverse(hi));
    const Eigen::Index width = static_cast<Eigen::Index>(spec.width(L - 1));
    Matrix A(m, width);
    bool ok = false;
    for (std::size_t attempt = 0; attempt < cfg.resample_budget && !ok; ++attempt) {
      for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = act(pre(rng));
      ok = estimate_rank(A).estimated_rank == static_cast<std::size_t>(m);
    }
    if (!ok) throw Error(ErrorKind::ConstructionFailed, "could not draw a full-rank class feature matrix");
    result.params.at(L - 1) = {min_norm_solution(Fk, apply_inverse(act, class_rows(A))), Vector::Zero(width)};
    result.params.at(L) = {min_norm_solution(A, Z), zero_out};
  } else {
    result.proof_case = 3;
    const Activation& act = spec.layer(k + 1).activation();
    const auto [lo, hi] = safe_targets(act);
    const Eigen::Index width = static_cast<Eigen::Index>(spec.width(k + 1));
    const std::size_t count = static_cast<std::size_t>(m * width);
    std::uniform_real_distribution<double> jitter(-0.25, 0.25);
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
      values[i] = lo + (hi - lo) * (static_cast<double>(i) + 0.5 + jitter(rng)) / static_cast<double>(count);
    }
    std::shuffle(values.begin(), values.end(), rng);
    Matrix E = Eigen::Map<const Matrix>(values.data(), m, width);
    std::sort(values.begin(), values.end());
    if (std::adjacent_find(values.begin(), values.end()) != values.end()) {
      throw Error(ErrorKind::ConstructionFailed, "class targets at layer " + std::to_string(k + 1) + " collide");
    }
    result.params.at(k + 1) = {min_norm_solution(Fk, apply_inverse(act, class_rows(E))), Vector::Zero(width)};

    const NetworkSpec sub = spec.tail(k + 1);
    const std::size_t sub_wide = L - k - 2;
    ConstructionParams sub_cfg = cfg;
    sub_cfg.seed = cfg.seed ^ 0x5DEECE66DULL;
    IndependenceResult inner = independence_construction(sub, E, sub_wide, sub_cfg);
    const Matrix A = forward(sub, inner.params, E, sub_wide).F[sub_wide];
    for (std::size_t l = 1; l <= sub_wide; ++l) result.params.at(k + 1 + l) = std::move(inner.params.at(l));
    result.params.at(L) = {min_norm_solution(A, Z), zero_out};
  }

  result.loss = loss(forward(spec, result.params, data.X), data.Y);
  return result;
}

}  // namespace widecnn
