#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "support.hpp"
#include "widecnn/analysis.hpp"
#include "widecnn/backprop.hpp"
#include "widecnn/constructions.hpp"
#include "widecnn/error.hpp"
#include "widecnn/lifting.hpp"
#include "widecnn/harness/datasets.hpp"
#include "widecnn/harness/templates.hpp"

using namespace widecnn;
namespace wt = widecnn::testing;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no widecnn::Error thrown");
  return ErrorKind::Structural;
}

// Smallest gap between any entry of one sample's row and any entry of another's.
double cross_sample_gap(const Matrix& F) {
  double gap = INFINITY;
  for (Eigen::Index i = 0; i < F.rows(); ++i)
    for (Eigen::Index j = i + 1; j < F.rows(); ++j)
      for (Eigen::Index a = 0; a < F.cols(); ++a)
        for (Eigen::Index b = 0; b < F.cols(); ++b) gap = std::min(gap, std::abs(F(i, a) - F(j, b)));
  return gap;
}

}  // namespace

TEST_CASE("construction parameters") {
  ConstructionParams cfg = ConstructionParams::defaults(3);
  CHECK(cfg.alpha_schedule.size() == 21);
  CHECK(cfg.alpha_schedule.back() == std::ldexp(1.0, 20));
  CHECK(cfg.sigma_min_floor == 1e-10);
  CHECK_NOTHROW(cfg.validate());
  cfg.alpha_schedule = {2.0, 1.0};
  CHECK(kind_of([&] { cfg.validate(); }) == ErrorKind::Precondition);
  cfg.alpha_schedule.clear();
  CHECK(kind_of([&] { cfg.validate(); }) == ErrorKind::Precondition);
}

TEST_CASE("transport construction") {
  SUBCASE("two samples, one conv layer") {
    const NetworkSpec spec = small_conv_spec(4, 2, 1, 2, {}, 1);
    const Dataset data = synthesize_dataset(2, 4, 1, 3, 1e-5, spec.input_layout());
    const Params p = transport_construction(spec, data.X, 1, ConstructionParams::defaults(1));
    CHECK(cross_sample_gap(forward(spec, p, data.X, 1).F[1]) > 1e-9);
  }
  SUBCASE("duplicate samples are rejected") {
    const NetworkSpec spec = small_conv_spec(4, 2, 1, 2, {}, 1);
    Matrix X(2, 4);
    X << 1, 2, 3, 4, 1, 2, 3, 4;
    CHECK(kind_of([&] { (void)transport_construction(spec, X, 1, ConstructionParams::defaults(0)); }) ==
          ErrorKind::Precondition);
  }
  SUBCASE("distinctness survives pooling") {
    const NetworkSpec spec(6, {LayerSpec::convolutional(PatchLayout::strided_1d(6, 2, 1), 2, Activation::sigmoid()),
                               LayerSpec::max_pool(PatchLayout::strided_1d(10, 2, 2)),
                               LayerSpec::fully_connected(5, 4, Activation::softplus(2.0)), LayerSpec::output(4, 1)});
    const Dataset data = synthesize_dataset(5, 6, 1, 8, 1e-5, spec.input_layout());
    const Params p = transport_construction(spec, data.X, 3, ConstructionParams::defaults(2));
    const ForwardTrace tr = forward(spec, p, data.X, 3);
    CHECK(cross_sample_gap(tr.F[2]) > 1e-12);
    CHECK(cross_sample_gap(tr.F[3]) > 1e-12);
    CHECK(estimate_rank(lift_weights(spec, 1, p.at(1).W)).full_rank());
    CHECK(estimate_rank(lift_weights(spec, 3, p.at(3).W)).full_rank());
  }
}

TEST_CASE("independence construction") {
  SUBCASE("single sigmoid conv layer") {
    const NetworkSpec spec = small_conv_spec(6, 3, 1, 2, {}, 1);
    const Dataset data = synthesize_dataset(8, 6, 1, 5, 1e-5, spec.input_layout());
    const IndependenceResult r = independence_construction(spec, data.X, 1, ConstructionParams::defaults(4));
    const Matrix F = forward(spec, r.params, data.X, 1).F[1];
    CHECK(r.rank.estimated_rank == 8);
    CHECK(wt::elimination_rank(F) == 8);
    CHECK(r.submatrix_sigma_min >= 1e-10);
    std::vector<std::size_t> gamma(r.gamma.begin(), r.gamma.begin() + 8);
    std::sort(gamma.begin(), gamma.end());
    for (std::size_t i = 0; i < 8; ++i) CHECK(gamma[i] == i);
  }
  SUBCASE("one sample") {
    const NetworkSpec spec = small_conv_spec(6, 3, 1, 2, {}, 1);
    const Dataset data = synthesize_dataset(1, 6, 1, 5, 0.0, spec.input_layout());
    CHECK(independence_construction(spec, data.X, 1, ConstructionParams::defaults(0)).rank.estimated_rank == 1);
  }
  SUBCASE("softplus with a deeper wide layer") {
    const NetworkSpec spec = small_conv_spec(8, 3, 1, 2, {20}, 1, Activation::softplus(10.0));
    const Dataset data = synthesize_dataset(16, 8, 1, 6, 1e-5, spec.input_layout());
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const IndependenceResult r = independence_construction(spec, data.X, 2, ConstructionParams::defaults(seed));
      CHECK(r.rank.estimated_rank == 16);
      CHECK(r.rank.sigma_min > 0.0);
      CHECK(estimate_rank(lift_weights(spec, 1, r.params.at(1).W)).full_rank());
    }
  }
  SUBCASE("too narrow") {
    const NetworkSpec spec = small_conv_spec(6, 3, 1, 1, {}, 1);
    const Dataset data = synthesize_dataset(8, 6, 1, 5, 1e-5, spec.input_layout());
    CHECK(kind_of([&] { (void)independence_construction(spec, data.X, 1, ConstructionParams::defaults(0)); }) ==
          ErrorKind::Width);
  }
}

TEST_CASE("minimum norm solutions") {
  std::mt19937_64 rng(1);
  const Matrix F = wt::gaussian(5, 9, rng);
  const Matrix R = wt::gaussian(5, 2, rng);
  const Matrix W = min_norm_solution(F, R);
  CHECK((F * W - R).cwiseAbs().maxCoeff() <= 1e-12);
  const Matrix pinv = F.completeOrthogonalDecomposition().pseudoInverse();
  CHECK((W - pinv * R).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(kind_of([&] { (void)min_norm_solution(F.transpose(), wt::gaussian(9, 1, rng)); }) ==
        ErrorKind::IllConditioned);
  Matrix rank_deficient = F;
  rank_deficient.row(4) = rank_deficient.row(3);
  CHECK(kind_of([&] { (void)min_norm_solution(rank_deficient, R); }) == ErrorKind::IllConditioned);
}

TEST_CASE("expressivity") {
  const NetworkSpec spec = small_conv_spec(8, 3, 1, 3, {}, 1);
  SUBCASE("zero targets") {
    const Dataset data = synthesize_dataset(8, 8, 1, 2, 1e-5, spec.input_layout());
    const ExpressivityResult fit = expressivity_fit(spec, data.X, Vector::Zero(8), ConstructionParams::defaults(0));
    CHECK(fit.lambda.isZero(0.0));
    CHECK(fit.max_residual == 0.0);
  }
  SUBCASE("random targets") {
    const Dataset data = synthesize_dataset(8, 8, 1, 3, 1e-5, spec.input_layout());
    std::mt19937_64 rng(4);
    const Vector y = wt::gaussian(8, 1, rng).col(0);
    const ExpressivityResult fit = expressivity_fit(spec, data.X, y, ConstructionParams::defaults(1));
    CHECK(fit.max_residual <= 1e-8);
  }
  SUBCASE("random labels") {
    const NetworkSpec wide = small_conv_spec(16, 4, 2, 6, {}, 1);
    const Dataset data = synthesize_dataset(32, 16, 1, 5, 1e-5, wide.input_layout());
    std::mt19937_64 rng(6);
    Vector y(32);
    for (Eigen::Index i = 0; i < 32; ++i) y[i] = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
    const ExpressivityResult fit = expressivity_fit(wide, data.X, y, ConstructionParams::defaults(2));
    const Matrix out = forward(wide, fit.params, data.X).output();
    for (Eigen::Index i = 0; i < 32; ++i) CHECK(std::abs(out(i, 0) - y[i]) <= 2e-8);
  }
  SUBCASE("vector outputs are rejected") {
    const NetworkSpec two = small_conv_spec(8, 3, 1, 3, {}, 2);
    const Dataset data = synthesize_dataset(4, 8, 1, 3, 1e-5, two.input_layout());
    CHECK(kind_of([&] { (void)expressivity_fit(two, data.X, Vector::Zero(4), ConstructionParams::defaults(0)); }) ==
          ErrorKind::Precondition);
  }
}

TEST_CASE("zero-loss construction") {
  for (int c = 1; c <= 3; ++c) {
    CAPTURE(c);
    const DemoNet demo = zero_loss_demo(c);
    const Dataset data = synthesize_dataset(8, demo.spec.input_width(), 2, 10 + static_cast<std::uint64_t>(c), 1e-5,
                                            demo.spec.input_layout());
    const ZeroLossResult a = zero_loss_construction(demo.spec, data, demo.wide_layer, ConstructionParams::defaults(1));
    const ZeroLossResult b = zero_loss_construction(demo.spec, data, demo.wide_layer, ConstructionParams::defaults(2));
    CHECK(a.proof_case == c);
    const ForwardTrace tr = forward(demo.spec, a.params, data.X);
    CHECK(loss(tr, data.Y) <= 1e-16 * (1.0 + data.Y.squaredNorm()));
    CHECK(s_k_membership(demo.spec, a.params, tr, demo.wide_layer).in_S_k);
    CHECK((tr.output() - data.Y).cwiseAbs().maxCoeff() <= 1e-10);

    BackwardOptions opt;
    opt.start_layer = demo.wide_layer + 1;
    opt.lifted_layers = {demo.wide_layer + 1};
    const GradientSet g = backward(demo.spec, a.params, tr, data.Y, opt);
    CHECK(g.at(demo.wide_layer + 1).grad_U->norm() <= 1e-10);

    double diff = 0.0;
    for (std::size_t l = 1; l <= demo.spec.depth(); ++l) diff += (a.params.at(l).W - b.params.at(l).W).squaredNorm();
    CHECK(std::sqrt(diff) > 1e-3);
    CHECK(b.loss <= 1e-14);
  }

  const DemoNet demo = zero_loss_demo(2);
  const Dataset data = synthesize_dataset(8, demo.spec.input_width(), 2, 3, 1e-5, demo.spec.input_layout());
  SUBCASE("missing labels") {
    Dataset bare = data;
    bare.labels.reset();
    CHECK(kind_of([&] { (void)zero_loss_construction(demo.spec, bare, 1, ConstructionParams::defaults(0)); }) ==
          ErrorKind::Precondition);
  }
  SUBCASE("non-pyramidal widths") {
    const NetworkSpec bulge = small_conv_spec(6, 3, 1, 4, {2, 3}, 2);
    CHECK(kind_of([&] { (void)zero_loss_construction(bulge, data, 1, ConstructionParams::defaults(0)); }) ==
          ErrorKind::Assumption);
  }
  SUBCASE("convolutional layer above the wide layer") {
    const NetworkSpec conv_above(6, {LayerSpec::convolutional(PatchLayout::strided_1d(6, 3, 1), 4, Activation::sigmoid()),
                                     LayerSpec::convolutional(PatchLayout::strided_1d(16, 4, 4), 2, Activation::sigmoid()),
                                     LayerSpec::output(8, 2)});
    CHECK(kind_of([&] { (void)zero_loss_construction(conv_above, data, 1, ConstructionParams::defaults(0)); }) ==
          ErrorKind::Precondition);
  }
}
