#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "widecnn/backprop.hpp"
#include "widecnn/error.hpp"
#include "widecnn/lifting.hpp"
#include "widecnn/rank.hpp"

using namespace widecnn;
namespace wt = widecnn::testing;

TEST_CASE("loss") {
  std::mt19937_64 rng(1);
  const Matrix Y = wt::gaussian(3, 2, rng);
  CHECK(loss(Y, Y) == 0.0);
  Matrix F = Y;
  F(1, 0) += 2.0;
  CHECK(loss(F, Y) == doctest::Approx(2.0));
  const Matrix A = wt::gaussian(3, 2, rng);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) sum += 0.5 * (A(i, j) - Y(i, j)) * (A(i, j) - Y(i, j));
  CHECK(std::abs(loss(A, Y) - sum) <= 1e-14);
  CHECK_THROWS_AS(loss(A, Matrix::Zero(2, 2)), Error);
}

TEST_CASE("backward against finite differences") {
  SUBCASE("tiny sigmoid conv net") {
    const NetworkSpec spec(3, {LayerSpec::convolutional(PatchLayout::strided_1d(3, 2, 1), 2, Activation::sigmoid()),
                               LayerSpec::output(4, 1)});
    std::mt19937_64 rng(2);
    const Matrix X = wt::gaussian(4, 3, rng), Y = wt::gaussian(4, 1, rng);
    const Params p = Params::gaussian(spec, 5);
    const GradientSet g = backward(spec, p, forward(spec, p, X), Y);
    CHECK(max_relative_error(g, finite_difference_gradient(spec, p, X, Y, 1e-6)) <= 1e-5);
  }
  SUBCASE("random softplus nets") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
      const NetworkSpec spec = wt::random_network(rng, 4, 24, 2);
      const Matrix X = wt::gaussian(3, static_cast<Eigen::Index>(spec.input_width()), rng);
      const Matrix Y = wt::gaussian(3, static_cast<Eigen::Index>(spec.output_width()), rng);
      const Params p = Params::gaussian(spec, rng(), 1.0, true);
      const GradientSet g = backward(spec, p, forward(spec, p, X), Y);
      CHECK(max_relative_error(g, finite_difference_gradient(spec, p, X, Y, 1e-6)) <= 1e-5);
    }
  }
  SUBCASE("error shrinks with the step") {
    const NetworkSpec spec(4, {LayerSpec::fully_connected(4, 5, Activation::sigmoid()),
                               LayerSpec::fully_connected(5, 3, Activation::sigmoid()), LayerSpec::output(3, 2)});
    std::mt19937_64 rng(4);
    const Matrix X = wt::gaussian(5, 4, rng), Y = wt::gaussian(5, 2, rng);
    const Params p = Params::gaussian(spec, 6, 2.0);
    const GradientSet g = backward(spec, p, forward(spec, p, X), Y);
    const double coarse = max_relative_error(g, finite_difference_gradient(spec, p, X, Y, 1e-1));
    const double mid = max_relative_error(g, finite_difference_gradient(spec, p, X, Y, 1e-3));
    const double fine = max_relative_error(g, finite_difference_gradient(spec, p, X, Y, 1e-6));
    CHECK(coarse > mid);
    CHECK(mid > fine);
    CHECK(fine <= 1e-5);
  }
  SUBCASE("relu away from kinks") {
    const NetworkSpec spec(4, {LayerSpec::fully_connected(4, 6, Activation::relu()), LayerSpec::output(6, 2)});
    std::mt19937_64 rng(8);
    int checked = 0;
    for (int trial = 0; trial < 20 && checked < 5; ++trial) {
      const Matrix X = wt::gaussian(4, 4, rng), Y = wt::gaussian(4, 2, rng);
      const Params p = Params::gaussian(spec, rng());
      const ForwardTrace tr = forward(spec, p, X);
      if (tr.G[1].cwiseAbs().minCoeff() < 1e-3) continue;
      ++checked;
      CHECK(max_relative_error(backward(spec, p, tr, Y), finite_difference_gradient(spec, p, X, Y, 1e-6)) <= 1e-5);
    }
    CHECK(checked == 5);
  }
}

TEST_CASE("backward closed forms") {
  SUBCASE("linear chain") {
    const NetworkSpec spec(3, {LayerSpec::fully_connected(3, 4, Activation::identity()), LayerSpec::output(4, 2)});
    std::mt19937_64 rng(9);
    const Matrix X = wt::gaussian(6, 3, rng), Y = wt::gaussian(6, 2, rng);
    Params p = Params::gaussian(spec, 1);
    p.at(1).b.setZero();
    p.at(2).b.setZero();
    const Matrix W1 = p.at(1).W, W2 = p.at(2).W;
    const Matrix expected = X.transpose() * (X * W1 * W2 - Y) * W2.transpose();
    const GradientSet g = backward(spec, p, forward(spec, p, X), Y);
    CHECK((g.at(1).grad_W - expected).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + expected.cwiseAbs().maxCoeff()));
  }
  SUBCASE("exact fit gives zero gradients") {
    const NetworkSpec spec(3, {LayerSpec::fully_connected(3, 4, Activation::sigmoid()), LayerSpec::output(4, 2)});
    std::mt19937_64 rng(10);
    const Matrix X = wt::gaussian(5, 3, rng);
    const Params p = Params::gaussian(spec, 2);
    const ForwardTrace tr = forward(spec, p, X);
    const GradientSet g = backward(spec, p, tr, tr.output());
    for (std::size_t l = 1; l <= 2; ++l) {
      CHECK(g.at(l).grad_W.isZero(0.0));
      CHECK(g.at(l).grad_b.isZero(0.0));
    }
  }
  SUBCASE("quadratic output layer is exact for differences") {
    const NetworkSpec spec(3, {LayerSpec::output(3, 2)});
    std::mt19937_64 rng(11);
    const Matrix X = wt::gaussian(4, 3, rng), Y = wt::gaussian(4, 2, rng);
    const Params p = Params::gaussian(spec, 3);
    const GradientSet g = backward(spec, p, forward(spec, p, X), Y);
    CHECK(max_relative_error(g, finite_difference_gradient(spec, p, X, Y, 1e-3)) <= 1e-8);
  }
  SUBCASE("lifted gradients and their pull-back") {
    const NetworkSpec spec(5, {LayerSpec::convolutional(PatchLayout::strided_1d(5, 3, 1), 2, Activation::softplus(2.0)),
                               LayerSpec::fully_connected(6, 4, Activation::sigmoid()), LayerSpec::output(4, 2)});
    std::mt19937_64 rng(12);
    const Matrix X = wt::gaussian(4, 5, rng), Y = wt::gaussian(4, 2, rng);
    const Params p = Params::gaussian(spec, 4);
    const ForwardTrace tr = forward(spec, p, X);
    BackwardOptions opt;
    opt.lift_all = true;
    opt.keep_deltas = true;
    const GradientSet g = backward(spec, p, tr, Y, opt);
    for (std::size_t l = 1; l <= 3; ++l) {
      REQUIRE(g.at(l).grad_U);
      REQUIRE(g.at(l).delta);
      CHECK((*g.at(l).grad_U - tr.F[l - 1].transpose() * *g.at(l).delta).cwiseAbs().maxCoeff() <= 1e-12);
      const Matrix pulled = lift_adjoint(spec, l, *g.at(l).grad_U);
      CHECK((pulled - g.at(l).grad_W).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((g.at(l).grad_b - g.at(l).delta->colwise().sum().transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    }
    BackwardOptions upper;
    upper.start_layer = 2;
    upper.lifted_layers = {2};
    const GradientSet partial = backward(spec, p, tr, Y, upper);
    CHECK(partial.start_layer == 2);
    CHECK((*partial.at(2).grad_U - *g.at(2).grad_U).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("max pool in the differentiated segment is rejected") {
    const NetworkSpec spec(4, {LayerSpec::fully_connected(4, 4, Activation::sigmoid()),
                               LayerSpec::max_pool(PatchLayout::strided_1d(4, 2, 2)), LayerSpec::output(2, 1)});
    const Params p = Params::gaussian(spec, 1);
    std::mt19937_64 rng(13);
    const Matrix X = wt::gaussian(3, 4, rng);
    try {
      (void)backward(spec, p, forward(spec, p, X), Matrix::Zero(3, 1));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::UnsupportedLayer);
    }
    BackwardOptions opt;
    opt.start_layer = 3;
    CHECK_NOTHROW((void)backward(spec, p, forward(spec, p, X), Matrix::Zero(3, 1), opt));
  }
}

TEST_CASE("singular value inequalities") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = std::uniform_int_distribution<Eigen::Index>(1, 8)(rng);
    const auto m = n + std::uniform_int_distribution<Eigen::Index>(0, 6)(rng);
    const Matrix A = wt::gaussian(m, n, rng);
    const Vector s = singular_values(A);
    const double smax = s(0), smin = s(s.size() - 1);
    const Vector x = wt::gaussian(n, 1, rng).col(0);
    const double ax = (A * x).norm();
    CHECK(ax <= smax * x.norm() + 1e-10);
    CHECK(ax >= smin * x.norm() - 1e-10);
    const Matrix B = wt::gaussian(n, 3, rng);
    const double ab = (A * B).norm();
    CHECK(ab <= smax * B.norm() + 1e-10);
    CHECK(ab >= smin * B.norm() - 1e-10);
  }
}
