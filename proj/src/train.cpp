#include "widecnn/harness/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "widecnn/backprop.hpp"
#include "widecnn/error.hpp"
#include "widecnn/forward.hpp"

namespace widecnn {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorKind::Config, "learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw Error(ErrorKind::Config, "Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw Error(ErrorKind::Config, "Adam epsilon must be positive");
  if (!(decay_factor > 0.0)) throw Error(ErrorKind::Config, "decay factor must be positive");
  if (epochs == 0) throw Error(ErrorKind::Config, "epochs must be at least 1");
}

std::size_t classification_errors(const Matrix& output, const std::vector<int>& labels) {
  if (labels.size() != static_cast<std::size_t>(output.rows())) {
    throw Error(ErrorKind::Precondition, "label count differs from output rows");
  }
  std::size_t errors = 0;
  for (Eigen::Index i = 0; i < output.rows(); ++i) {
    Eigen::Index best = 0;
    output.row(i).maxCoeff(&best);
    if (best != labels[static_cast<std::size_t>(i)]) ++errors;
  }
  return errors;
}

std::size_t classification_errors(const NetworkSpec& spec, const Params& params, const Dataset& data) {
  if (!data.labels) throw Error(ErrorKind::Precondition, "dataset has no labels");
  return classification_errors(forward(spec, params, data.X).output(), *data.labels);
}

namespace {

struct Moments {
  Matrix mW, vW;
  Vector mb, vb;
};

}  // namespace

TrainResult train_adam(const NetworkSpec& spec, Params params, const Dataset& train,
                       const std::optional<Dataset>& test, const AdamConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  train.check();
  params.check(spec);
  if (cfg.stop_at_zero_train_error && !train.labels) {
    throw Error(ErrorKind::Precondition, "stopping at zero training error needs labels");
  }
  const std::size_t L = spec.depth();
  const std::size_t N = train.size();
  const std::size_t batch = cfg.batch_size == 0 ? N : std::min(cfg.batch_size, N);

  std::vector<Moments> moments(L);
  for (std::size_t l = 1; l <= L; ++l) {
    const LayerParams& lp = params.at(l);
    moments[l - 1] = {Matrix::Zero(lp.W.rows(), lp.W.cols()), Matrix::Zero(lp.W.rows(), lp.W.cols()),
                      Vector::Zero(lp.b.size()), Vector::Zero(lp.b.size())};
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  std::size_t step = 0;
  auto evaluate = [&](const Matrix& X, std::size_t epoch) {
    try {
      return forward(spec, params, X);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NumericOverflow) throw;
      throw Error(ErrorKind::TrainingDiverged, "epoch " + std::to_string(epoch) + ": " + e.what());
    }
  };
  auto adam_step = [&](const ForwardTrace& trace, const Matrix& Y, double lr) {
    const GradientSet grads = backward(spec, params, trace, Y);
    ++step;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    for (std::size_t l = 1; l <= L; ++l) {
      if (!spec.layer(l).has_params()) continue;
      LayerParams& lp = params.at(l);
      Moments& mo = moments[l - 1];
      const LayerGradient& g = grads.at(l);
      if (cfg.gradient_descent) {
        lp.W -= lr * g.grad_W;
        lp.b -= lr * g.grad_b;
        continue;
      }
      mo.mW = cfg.beta1 * mo.mW + (1.0 - cfg.beta1) * g.grad_W;
      mo.vW = cfg.beta2 * mo.vW + (1.0 - cfg.beta2) * g.grad_W.cwiseAbs2();
      mo.mb = cfg.beta1 * mo.mb + (1.0 - cfg.beta1) * g.grad_b;
      mo.vb = cfg.beta2 * mo.vb + (1.0 - cfg.beta2) * g.grad_b.cwiseAbs2();
      lp.W.array() -= lr * (mo.mW.array() / c1) / ((mo.vW.array() / c2).sqrt() + cfg.epsilon);
      lp.b.array() -= lr * (mo.mb.array() / c1) / ((mo.vb.array() / c2).sqrt() + cfg.epsilon);
    }
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr =
        cfg.learning_rate *
        (cfg.decay_interval ? std::pow(cfg.decay_factor, static_cast<double>(epoch / cfg.decay_interval)) : 1.0);
    double epoch_loss = 0.0;
    std::size_t errors = 0;
    if (batch == N) {
      const ForwardTrace trace = evaluate(train.X, epoch);
      epoch_loss = loss(trace, train.Y);
      if (train.labels) errors = classification_errors(trace.output(), *train.labels);
      if (cfg.stop_at_zero_train_error && errors == 0) {
        result.loss_curve.push_back(epoch_loss);
        break;
      }
      adam_step(trace, train.Y, lr);
    } else {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t start = 0; start < N; start += batch) {
        const std::size_t count = std::min(batch, N - start);
        Matrix Xb(static_cast<Eigen::Index>(count), train.X.cols());
        Matrix Yb(static_cast<Eigen::Index>(count), train.Y.cols());
        for (std::size_t r = 0; r < count; ++r) {
          Xb.row(static_cast<Eigen::Index>(r)) = train.X.row(static_cast<Eigen::Index>(order[start + r]));
          Yb.row(static_cast<Eigen::Index>(r)) = train.Y.row(static_cast<Eigen::Index>(order[start + r]));
        }
        const ForwardTrace trace = evaluate(Xb, epoch);
        epoch_loss += loss(trace, Yb);
        adam_step(trace, Yb, lr);
      }
      if (train.labels) errors = classification_errors(spec, params, train);
    }
    if (!std::isfinite(epoch_loss)) {
      throw Error(ErrorKind::TrainingDiverged, "epoch " + std::to_string(epoch) + ": loss is not finite");
    }
    result.loss_curve.push_back(epoch_loss);
    result.epochs_run = epoch + 1;
    if (on_epoch && !on_epoch(epoch, epoch_loss, errors)) break;
    if (cfg.stop_at_zero_train_error && batch != N && errors == 0) break;
  }

  const ForwardTrace final_trace = evaluate(train.X, result.epochs_run);
  result.final_loss = loss(final_trace, train.Y);
  if (train.labels) result.train_errors = classification_errors(final_trace.output(), *train.labels);
  if (test && test->labels) result.test_errors = classification_errors(spec, params, *test);
  result.params = std::move(params);
  return result;
}

}  // namespace widecnn
