// Copyright 2026 The gmedian Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "gmedian/distributions.hpp"
#include "gmedian/error.hpp"
#include "gmedian/estimators.hpp"
#include "gmedian/rng.hpp"

using namespace gmedian;

namespace {

Eigen::MatrixXd gaussian_points(Eigen::Index dim, Eigen::Index n, std::uint64_t seed) {
  RngStream rng(seed);
  Eigen::MatrixXd pts(dim, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < dim; ++r) pts(r, c) = rng.normal();
  return pts;
}

double objective(const Eigen::MatrixXd& pts, const Eigen::VectorXd& m) {
  return (pts.colwise() - m).colwise().norm().sum();
}

}  // namespace

TEST_CASE("rm_init") {
  const Eigen::Vector2d x(0.0, 0.0);
  const auto state = rm_init(x);
  CHECK(state.iterate == x);
  CHECK(state.average == x);
  CHECK(state.step_count == 0);
  CHECK(state.hyper.c_gamma == 2.0);
  CHECK(state.hyper.alpha == 0.75);

  const Eigen::VectorXd five = Eigen::VectorXd::LinSpaced(5, 1.0, 5.0);
  CHECK(rm_init(five).average.size() == 5);

  CHECK_THROWS_AS(rm_init(Eigen::VectorXd()), DimensionError);
  RMHyperParams<double> bad;
  bad.alpha = 1.0;
  CHECK_THROWS_AS(rm_init(x, bad), ConfigError);
  bad.alpha = 0.5;
  CHECK_THROWS_AS(rm_init(x, bad), ConfigError);
  bad.alpha = 0.75;
  bad.c_gamma = 0.0;
  CHECK_THROWS_AS(rm_init(x, bad), ConfigError);
}

TEST_CASE("rm_update") {
  SUBCASE("first step with unit step size") {
    auto state = rm_init(Eigen::Vector2d(0.0, 0.0));
    state.hyper.c_gamma = 2.0;
    rm_update(state, Eigen::Vector2d(3.0, 4.0));
    // gamma_1 = 2, unit direction (0.6, 0.8)
    CHECK(state.iterate[0] == doctest::Approx(1.2));
    CHECK(state.iterate[1] == doctest::Approx(1.6));
    CHECK(state.average[0] == doctest::Approx(0.6));
    CHECK(state.average[1] == doctest::Approx(0.8));
    CHECK(state.step_count == 1);
  }
  SUBCASE("exact hit leaves the iterate in place") {
    auto state = rm_init(Eigen::Vector2d(1.0, 1.0));
    rm_update(state, Eigen::Vector2d(1.0, 1.0));
    CHECK(state.iterate == Eigen::Vector2d(1.0, 1.0));
    CHECK(state.average == Eigen::Vector2d(1.0, 1.0));
    CHECK(state.step_count == 1);
  }
  SUBCASE("dimension mismatch") {
    auto state = rm_init(Eigen::Vector2d(0.0, 0.0));
    CHECK_THROWS_AS(rm_update(state, Eigen::Vector3d(1.0, 2.0, 3.0)), DimensionError);
  }
  SUBCASE("average is the mean of all iterates, step sizes follow the schedule") {
    const Eigen::MatrixXd pts = gaussian_points(4, 200, 5);
    auto state = rm_init(pts.col(0));
    Eigen::VectorXd iterate_sum = pts.col(0);
    for (Eigen::Index k = 1; k < pts.cols(); ++k) {
      const Eigen::VectorXd before = state.iterate;
      rm_update(state, pts.col(k));
      const double moved = (state.iterate - before).norm();
      CHECK(moved == doctest::Approx(2.0 * std::pow(double(k), -0.75)));
      iterate_sum += state.iterate;
      CHECK((state.average - iterate_sum / double(k + 1)).norm() < 1e-12);
    }
  }
}

TEST_CASE("estimate_streaming") {
  SUBCASE("symmetric distribution is centred") {
    const auto model = materialize(DistributionSpec::defaults(DistributionKind::GaussIid));
    RngStream rng(8);
    const Eigen::VectorXd m = estimate_streaming(model, 8, 1'000'000, rng);
    CHECK(m.norm() <= 0.02);
  }
  SUBCASE("exponential first component sits below the mean") {
    auto spec = DistributionSpec::defaults(DistributionKind::IndepExp);
    spec.rate_low = spec.rate_high = 1.0;
    const auto model = materialize(spec);
    RngStream rng(9);
    const Eigen::VectorXd m = estimate_streaming(model, 64, 64 * 64 * 64, rng);
    CHECK(m[0] == doctest::Approx(1.0 - 1.0 / 64.0).epsilon(0.01));
  }
  SUBCASE("deterministic given the stream") {
    const auto model = materialize(DistributionSpec::defaults(DistributionKind::Ma2SkewNormal));
    RngStream a(3), b(3);
    CHECK(estimate_streaming(model, 10, 5000, a) == estimate_streaming(model, 10, 5000, b));
  }
  SUBCASE("requires two samples") {
    const auto model = materialize(DistributionSpec::defaults(DistributionKind::GaussIid));
    RngStream rng(1);
    CHECK_THROWS_AS(estimate_streaming(model, 4, 1, rng), ConfigError);
    CHECK_THROWS_AS(estimate_streaming(Eigen::MatrixXd(3, 1)), ConfigError);
  }
}

TEST_CASE("sample_mean and coordinatewise_median") {
  Eigen::MatrixXd pts(2, 3);
  pts << 0, 2, 4,
         1, 1, 7;
  CHECK(sample_mean(pts) == Eigen::Vector2d(2.0, 3.0));
  CHECK(coordinatewise_median(pts) == Eigen::Vector2d(2.0, 1.0));
  CHECK_THROWS_AS(sample_mean(Eigen::MatrixXd(2, 0)), ConfigError);
}

TEST_CASE("weiszfeld examples") {
  SUBCASE("collinear points") {
    Eigen::MatrixXd pts(1, 3);
    pts << 0, 0, 10;
    const auto r = weiszfeld(pts);
    CHECK(r.converged());
    CHECK(r.median[0] == 0.0);
  }
  SUBCASE("square corners") {
    Eigen::MatrixXd pts(2, 4);
    pts << 1, -1, 1, -1,
           1, 1, -1, -1;
    const auto r = weiszfeld(pts);
    CHECK(r.converged());
    CHECK(r.median.norm() < 1e-9);
  }
  SUBCASE("triangle against a brute-force grid") {
    Eigen::MatrixXd pts(2, 3);
    pts << 0, 1, 0,
           0, 0, 1;
    const auto r = weiszfeld(pts);
    double best = std::numeric_limits<double>::infinity();
    Eigen::Vector2d arg;
    for (int a = 0; a <= 1000; ++a) {
      for (int b = 0; b <= 1000; ++b) {
        const Eigen::Vector2d m(a * 1e-3, b * 1e-3);
        const double f = objective(pts, m);
        if (f < best) {
          best = f;
          arg = m;
        }
      }
    }
    CHECK((r.median - arg).norm() <= 1e-3 * std::sqrt(2.0));
    CHECK(objective(pts, r.median) <= best + 1e-12);
  }
  SUBCASE("empty input") {
    CHECK_THROWS_AS(weiszfeld(Eigen::MatrixXd(2, 0)), ConfigError);
  }
  SUBCASE("float instantiation") {
    const Eigen::MatrixXf pts = gaussian_points(3, 200, 21).cast<float>();
    const auto r = weiszfeld(pts, WeiszfeldConfig<float>{1e-5f, 10000, 1e-6f});
    const auto rd = weiszfeld(pts.cast<double>().eval());
    CHECK((r.median.cast<double>() - rd.median).norm() < 1e-3);
  }
}

TEST_CASE("weiszfeld optimality") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Eigen::MatrixXd pts = gaussian_points(10, 1000, seed);
    const auto r = weiszfeld(pts);
    CHECK(r.converged());
    CHECK(gradient_norm(pts, r.median) <= 1000 * 1e-8);
  }
}

TEST_CASE("weiszfeld in one dimension returns the sample median") {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 * (trial % 10) + 1;
    Eigen::MatrixXd pts(1, n);
    std::vector<double> v(n);
    for (int k = 0; k < n; ++k) v[k] = pts(0, k) = nd(gen);
    std::nth_element(v.begin(), v.begin() + n / 2, v.end());
    CHECK(std::abs(weiszfeld(pts).median[0] - v[n / 2]) <= 1e-12);
  }
}

TEST_CASE("weiszfeld equivariance") {
  std::mt19937_64 gen(99);
  std::normal_distribution<double> nd;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Eigen::MatrixXd pts = gaussian_points(5, 300, 100 + seed);
    const Eigen::VectorXd base = weiszfeld(pts).median;

    Eigen::VectorXd shift(5);
    for (auto& s : shift) s = 10.0 * nd(gen);
    const Eigen::MatrixXd shifted = pts.colwise() + shift;
    CHECK((weiszfeld(shifted).median - (base + shift)).norm() < 1e-7);

    Eigen::MatrixXd g(5, 5);
    for (auto& x : g.reshaped()) x = nd(gen);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    const Eigen::MatrixXd rotated = q * pts;
    CHECK((weiszfeld(rotated).median - q * base).norm() < 1e-7);

    const Eigen::MatrixXd scaled = 3.5 * pts;
    CHECK((weiszfeld(scaled).median - 3.5 * base).norm() < 1e-7);
  }
}

TEST_CASE("gradient_norm") {
  Eigen::MatrixXd pts(1, 2);
  pts << -1, 1;
  CHECK(gradient_norm(pts, Eigen::VectorXd::Zero(1)) == doctest::Approx(0.0));
  CHECK(gradient_norm(pts, Eigen::VectorXd::Constant(1, 100.0)) == doctest::Approx(2.0));
  // on a data point: pull of the other point is cancelled by the anchor
  CHECK(gradient_norm(pts, Eigen::VectorXd::Constant(1, 1.0)) == doctest::Approx(0.0));
  CHECK_THROWS_AS(gradient_norm(pts, Eigen::VectorXd::Zero(2)), DimensionError);
}

TEST_CASE("streaming and batch medians agree on large samples") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto model = materialize(DistributionSpec::defaults(DistributionKind::IndepExp));
    RngStream rng = RngStream::keyed(seed, "agree", 5, 0);
    Eigen::MatrixXd pts(5, 100000);
    for (Eigen::Index c = 0; c < pts.cols(); ++c) pts.col(c) = sample_vector(model, 5, rng);
    const auto batch = weiszfeld(pts);
    CHECK(batch.converged());
    CHECK((estimate_streaming(pts) - batch.median).norm() <= 0.02);
  }
}
