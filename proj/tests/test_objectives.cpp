#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "airfl/objectives.hpp"
#include "airfl/rng.hpp"
#include "airfl/stats.hpp"

using namespace airfl;

namespace {

Objective random_hinge(int clients, long n, long d, double lambda, Rng& rng) {
  Objective obj;
  obj.kind = ObjectiveKind::hinge_svm;
  obj.lambda = lambda;
  for (int k = 0; k < clients; ++k) {
    Eigen::MatrixXd x(n, d);
    Eigen::VectorXd y(n);
    for (long i = 0; i < n; ++i) {
      for (long j = 0; j < d; ++j) x(i, j) = rng.gaussian();
      y[i] = rng.uniform01() < 0.5 ? 1.0 : -1.0;
    }
    obj.client_features.push_back(std::move(x));
    obj.client_targets.push_back(std::move(y));
  }
  return obj;
}

Objective random_quadratic(int clients, long n, long d, double lambda, Rng& rng) {
  Objective obj;
  obj.kind = ObjectiveKind::quadratic;
  obj.lambda = lambda;
  for (int k = 0; k < clients; ++k) {
    Eigen::MatrixXd a(n, d);
    Eigen::VectorXd b(n);
    for (long i = 0; i < n; ++i) {
      for (long j = 0; j < d; ++j) a(i, j) = rng.gaussian();
      b[i] = rng.gaussian();
    }
    obj.client_features.push_back(std::move(a));
    obj.client_targets.push_back(std::move(b));
  }
  return obj;
}

std::vector<std::size_t> all_indices(long n) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

}  // namespace

TEST_CASE("hinge gradient at w = 0 hits every margin", "[ml]") {
  Rng rng(1);
  Objective obj = random_hinge(1, 16, 4, 0.0, rng);
  const Eigen::VectorXd w = Eigen::VectorXd::Zero(4);
  const auto idx = all_indices(16);
  const Eigen::VectorXd g = minibatch_gradient(obj, 0, w, idx);
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(4);
  for (long i = 0; i < 16; ++i)
    expected -= obj.client_targets[0][i] * obj.client_features[0].row(i).transpose();
  expected /= 16.0;
  REQUIRE((g - expected).norm() < 1e-14);
  REQUIRE(loss(obj, w, obj.client_features[0], obj.client_targets[0]) ==
          Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("quadratic full-batch gradient matches the closed form", "[ml]") {
  Rng rng(2);
  Objective obj = random_quadratic(1, 24, 6, 0.05, rng);
  Eigen::VectorXd w(6);
  for (long j = 0; j < 6; ++j) w[j] = rng.gaussian();
  const auto idx = all_indices(24);
  const Eigen::VectorXd g = minibatch_gradient(obj, 0, w, idx);
  const Eigen::MatrixXd& a = obj.client_features[0];
  const Eigen::VectorXd expected =
      a.transpose() * (a * w - obj.client_targets[0]) / 24.0 + 0.05 * w;
  REQUIRE((g - expected).norm() < 1e-12);
}

TEST_CASE("mini-batch gradients are unbiased for the full gradient", "[ml]") {
  Rng rng(3);
  Objective obj = random_hinge(1, 32, 5, 1e-3, rng);
  Eigen::VectorXd w(5);
  for (long j = 0; j < 5; ++j) w[j] = 0.3 * rng.gaussian();
  const auto idx = all_indices(32);
  const Eigen::VectorXd full = minibatch_gradient(obj, 0, w, idx);

  const int draws = 10000;
  std::vector<RunningStats> coord(5);
  Rng batch_rng(4);
  for (int t = 0; t < draws; ++t) {
    const auto batch = batch_rng.sample_without_replacement(32, 8);
    const Eigen::VectorXd g = minibatch_gradient(obj, 0, w, batch);
    for (long j = 0; j < 5; ++j) coord[static_cast<std::size_t>(j)].add(g[j]);
  }
  for (long j = 0; j < 5; ++j) {
    const auto& s = coord[static_cast<std::size_t>(j)];
    REQUIRE(std::abs(s.mean() - full[j]) <= 3.0 * s.std_error() + 1e-12);
  }
}

TEST_CASE("hinge gradient is a subgradient", "[ml]") {
  Rng rng(5);
  Objective obj = random_hinge(1, 20, 4, 1e-2, rng);
  const auto idx = all_indices(20);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd w(4), v(4);
    for (long j = 0; j < 4; ++j) {
      w[j] = rng.gaussian();
      v[j] = rng.gaussian();
    }
    const double fw = loss(obj, w, obj.client_features[0], obj.client_targets[0]);
    const double fv = loss(obj, v, obj.client_features[0], obj.client_targets[0]);
    const Eigen::VectorXd g = minibatch_gradient(obj, 0, w, idx);
    REQUIRE(fv >= fw + g.dot(v - w) - 1e-9);
  }
}

TEST_CASE("regularized hinge is lambda-strongly convex", "[ml]") {
  Rng rng(6);
  const double lambda = 0.05;
  Objective obj = random_hinge(1, 20, 4, lambda, rng);
  const auto idx = all_indices(20);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd w(4), v(4);
    for (long j = 0; j < 4; ++j) {
      w[j] = rng.gaussian();
      v[j] = rng.gaussian();
    }
    const Eigen::VectorXd gw = minibatch_gradient(obj, 0, w, idx);
    const Eigen::VectorXd gv = minibatch_gradient(obj, 0, v, idx);
    REQUIRE((gv - gw).dot(v - w) >= lambda * (v - w).squaredNorm() - 1e-10);
  }
}

TEST_CASE("quadratic gradient matches central finite differences", "[ml]") {
  Rng rng(7);
  Objective obj = random_quadratic(2, 16, 5, 0.1, rng);
  Eigen::VectorXd w(5);
  for (long j = 0; j < 5; ++j) w[j] = rng.gaussian();
  const auto idx = all_indices(16);
  const Eigen::VectorXd g = minibatch_gradient(obj, 0, w, idx);
  const double h = 1e-6;
  for (long j = 0; j < 5; ++j) {
    Eigen::VectorXd wp = w, wm = w;
    wp[j] += h;
    wm[j] -= h;
    const double fd = (loss(obj, wp, obj.client_features[0], obj.client_targets[0]) -
                       loss(obj, wm, obj.client_features[0], obj.client_targets[0])) /
                      (2.0 * h);
    REQUIRE(g[j] == Catch::Approx(fd).epsilon(1e-5).margin(1e-7));
  }
}

TEST_CASE("loss is convex along segments", "[ml]") {
  Rng rng(8);
  Objective obj = random_hinge(1, 12, 3, 1e-3, rng);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd u(3), v(3);
    for (long j = 0; j < 3; ++j) {
      u[j] = rng.gaussian();
      v[j] = rng.gaussian();
    }
    const auto& x = obj.client_features[0];
    const auto& y = obj.client_targets[0];
    const double mid = loss(obj, ((u + v) / 2.0).eval(), x, y);
    REQUIRE(mid <= (loss(obj, u, x, y) + loss(obj, v, x, y)) / 2.0 + 1e-12);
  }
}

TEST_CASE("accuracy counts signs with the zero tie going positive", "[ml]") {
  Eigen::MatrixXd x(4, 2);
  x << 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 2.0, 0.0;
  Eigen::VectorXd y(4);
  y << 1.0, -1.0, 1.0, 1.0;

  SECTION("w = 0 scores every sample as +1") {
    const Eigen::VectorXd w = Eigen::VectorXd::Zero(2);
    REQUIRE(accuracy(w, x, y) == Catch::Approx(0.75));  // three +1 labels
  }
  SECTION("a separating direction is perfect") {
    Eigen::VectorXd w(2);
    w << 1.0, 0.0;
    REQUIRE(accuracy(w, x, y) == Catch::Approx(1.0));  // score 0 -> +1 tie rule
  }
}

TEST_CASE("quadratic constants: identity design", "[ml]") {
  Objective obj;
  obj.kind = ObjectiveKind::quadratic;
  obj.lambda = 0.0;
  for (double target : {1.0, 2.0, 3.0}) {
    Eigen::MatrixXd a(1, 1);
    a << 1.0;
    Eigen::VectorXd b(1);
    b << target;
    obj.client_features.push_back(a);
    obj.client_targets.push_back(b);
  }
  const QuadraticConstants c = quadratic_constants(obj);
  REQUIRE(c.mu == Catch::Approx(1.0).epsilon(1e-12));
  REQUIRE(c.lip == Catch::Approx(1.0).epsilon(1e-12));
  REQUIRE(c.w_star[0] == Catch::Approx(2.0).epsilon(1e-12));

  obj.lambda = 0.1;
  const QuadraticConstants shifted = quadratic_constants(obj);
  REQUIRE(shifted.mu == Catch::Approx(c.mu + 0.1).epsilon(1e-12));
  REQUIRE(shifted.lip == Catch::Approx(c.lip + 0.1).epsilon(1e-12));
}

TEST_CASE("quadratic minimizer zeroes the gradient", "[ml]") {
  Rng rng(9);
  Objective obj = random_quadratic(3, 30, 6, 0.05, rng);
  const QuadraticConstants c = quadratic_constants(obj);
  // global gradient at w*: average of per-client full-batch gradients
  Eigen::VectorXd g = Eigen::VectorXd::Zero(6);
  for (int k = 0; k < 3; ++k) {
    const auto idx = all_indices(30);
    g += minibatch_gradient(obj, k, c.w_star, idx);
  }
  g /= 3.0;
  REQUIRE(g.norm() <= 1e-8);
  REQUIRE(global_loss(obj, c.w_star) == Catch::Approx(c.f_star));
}

TEST_CASE("singular quadratic without ridge is rejected", "[ml]") {
  Rng rng(10);
  Objective obj = random_quadratic(1, 2, 5, 0.0, rng);  // rank <= 2 < d
  REQUIRE_THROWS_AS(quadratic_constants(obj), std::runtime_error);
}

TEST_CASE("dataset validation rejects bad labels", "[ml]") {
  LabeledDataset d;
  d.features = Eigen::MatrixXd::Zero(2, 2);
  d.labels.resize(2);
  d.labels << 1.0, 0.5;
  REQUIRE_THROWS_AS(d.validate(), std::invalid_argument);
}
