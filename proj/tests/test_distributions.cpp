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

#include <cmath>
#include <numbers>

#include "gmedian/distributions.hpp"
#include "gmedian/error.hpp"
#include "gmedian/rng.hpp"

using namespace gmedian;

namespace {

DistributionSpec exp_rate(double rate) {
  auto spec = DistributionSpec::defaults(DistributionKind::IndepExp);
  spec.rate_low = spec.rate_high = rate;
  return spec;
}

// Skew-normal reference values from the textbook formulas, computed here
// independently of the model code.
struct SkewNormalRef {
  double mean, var, third;
  explicit SkewNormalRef(double alpha) {
    const double delta = alpha / std::sqrt(1.0 + alpha * alpha);
    const double b = delta * std::sqrt(2.0 / std::numbers::pi);
    mean = b;
    var = 1.0 - 2.0 * delta * delta / std::numbers::pi;
    const double skew = 0.5 * (4.0 - std::numbers::pi) * std::pow(b, 3) / std::pow(1.0 - b * b, 1.5);
    third = skew * std::pow(var, 1.5);
  }
};

double pareto_skew_third(double a) {
  const double var = a / ((a - 1) * (a - 1) * (a - 2));
  const double skew = 2.0 * (1.0 + a) / (a - 3.0) * std::sqrt((a - 2.0) / a);
  return skew * std::pow(var, 1.5);
}

const DistributionKind kAllKinds[] = {DistributionKind::IndepExp, DistributionKind::Ma2SkewNormal,
                                      DistributionKind::ParetoIid, DistributionKind::IndepPareto,
                                      DistributionKind::GaussIid};

}  // namespace

TEST_CASE("rng streams are keyed and reproducible") {
  RngStream a = RngStream::keyed(7, "indep-exp", 64, 0);
  RngStream b = RngStream::keyed(7, "indep-exp", 64, 0);
  RngStream c = RngStream::keyed(7, "indep-exp", 64, 1);
  int same_as_c = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    same_as_c += x == c.next_u64();
  }
  CHECK(same_as_c == 0);
  CHECK(RngStream::derive_key(1, "a", 2, 3) != RngStream::derive_key(1, "a", 3, 2));

  RngStream d(123);
  const auto w5 = d.at(5);
  for (int k = 0; k < 5; ++k) d.next_u64();
  CHECK(d.next_u64() == w5);

  Eigen::ArrayXd block(37);
  RngStream e(99), f(99);
  e.fill_uniform(block);
  for (Eigen::Index k = 0; k < block.size(); ++k) CHECK(block[k] == f.uniform());
  CHECK(e.counter() == f.counter());
}

TEST_CASE("ziggurat normals have standard normal moments") {
  RngStream rng(2024);
  const int n = 1'000'000;
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  int beyond3 = 0;
  for (int k = 0; k < n; ++k) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
    s3 += z * z * z;
    s4 += z * z * z * z;
    beyond3 += std::abs(z) > 3.0;
  }
  CHECK(std::abs(s1 / n) < 5e-3);
  CHECK(std::abs(s2 / n - 1.0) < 6e-3);
  CHECK(std::abs(s3 / n) < 2e-2);
  CHECK(std::abs(s4 / n - 3.0) < 5e-2);
  // P(|Z| > 3) = 0.0026998
  CHECK(std::abs(beyond3 / double(n) - 0.0026998) < 3e-4);
}

TEST_CASE("materialize") {
  SUBCASE("degenerate rate range gives a common rate") {
    const auto model = DistributionModel::materialize(exp_rate(1.0));
    for (int i = 1; i <= 50; ++i) CHECK(model.component_parameter(i) == 1.0);
  }
  SUBCASE("pareto-iid shape") {
    const auto model = materialize(DistributionSpec::defaults(DistributionKind::ParetoIid));
    for (int i = 1; i <= 50; ++i) CHECK(model.component_parameter(i) == 3.1);
  }
  SUBCASE("heterogeneous parameters are deterministic and capacity independent") {
    const auto spec = DistributionSpec::defaults(DistributionKind::IndepExp);
    const auto a = DistributionModel::materialize(spec, 10);
    const auto b = DistributionModel::materialize(spec, 200);
    for (int i = 1; i <= 100; ++i) {
      CHECK(a.component_parameter(i) == b.component_parameter(i));
      CHECK(a.component_parameter(i) >= 0.75);
      CHECK(a.component_parameter(i) <= 1.25);
    }
    auto other = spec;
    other.param_seed = 2;
    CHECK(DistributionModel::materialize(other).component_parameter(1) != a.component_parameter(1));
  }
  SUBCASE("invalid ranges are configuration errors") {
    auto spec = DistributionSpec::defaults(DistributionKind::IndepExp);
    spec.rate_low = 2.0;
    spec.rate_high = 1.0;
    CHECK_THROWS_AS(materialize(spec), ConfigError);
    auto pareto = DistributionSpec::defaults(DistributionKind::ParetoIid);
    pareto.shape = 3.0;
    CHECK_THROWS_AS(materialize(pareto), ConfigError);
    auto ip = DistributionSpec::defaults(DistributionKind::IndepPareto);
    ip.shape_low = 2.5;
    CHECK_THROWS_AS(materialize(ip), ConfigError);
    auto sn = DistributionSpec::defaults(DistributionKind::Ma2SkewNormal);
    sn.sn_scale = 0.0;
    CHECK_THROWS_AS(materialize(sn), ConfigError);
  }
  SUBCASE("dependence order") {
    CHECK(materialize(DistributionSpec::defaults(DistributionKind::IndepExp)).dependence_order() == 0);
    CHECK(materialize(DistributionSpec::defaults(DistributionKind::ParetoIid)).dependence_order() == 0);
    CHECK(materialize(DistributionSpec::defaults(DistributionKind::IndepPareto)).dependence_order() == 0);
    CHECK(materialize(DistributionSpec::defaults(DistributionKind::Ma2SkewNormal)).dependence_order() == 2);
  }
  SUBCASE("kind names round trip") {
    for (auto kind : kAllKinds) CHECK(parse_kind(kind_name(kind)) == kind);
    CHECK_THROWS_AS(parse_kind("cauchy"), ConfigError);
  }
}

TEST_CASE("sample_vector") {
  SUBCASE("exponential mean") {
    const auto model = materialize(exp_rate(1.0));
    VectorSampler sampler(model, 3);
    RngStream rng(11);
    Eigen::VectorXd x(3);
    double sum = 0.0;
    const int n = 1'000'000;
    for (int k = 0; k < n; ++k) {
      sampler.draw(rng, x);
      sum += x[0];
    }
    CHECK(sum / n == doctest::Approx(1.0).epsilon(0.01));
  }
  SUBCASE("ma2 components at lag 3 are uncorrelated") {
    const auto model = materialize(DistributionSpec::defaults(DistributionKind::Ma2SkewNormal));
    VectorSampler sampler(model, 6);
    RngStream rng(12);
    Eigen::VectorXd x(6);
    const int n = 1'000'000;
    double s1 = 0, s4 = 0, s14 = 0, q1 = 0, q4 = 0;
    for (int k = 0; k < n; ++k) {
      sampler.draw(rng, x);
      s1 += x[0];
      s4 += x[3];
      s14 += x[0] * x[3];
      q1 += x[0] * x[0];
      q4 += x[3] * x[3];
    }
    const double m1 = s1 / n, m4 = s4 / n;
    const double cov = s14 / n - m1 * m4;
    const double corr = cov / std::sqrt((q1 / n - m1 * m1) * (q4 / n - m4 * m4));
    CHECK(std::abs(corr) < 0.01);
  }
  SUBCASE("pareto support") {
    const auto model = materialize(DistributionSpec::defaults(DistributionKind::ParetoIid));
    RngStream rng(13);
    for (int k = 0; k < 1000; ++k) CHECK(sample_vector(model, 20, rng).minCoeff() >= 1.0);
  }
  SUBCASE("same key gives identical draws") {
    for (auto kind : kAllKinds) {
      const auto model = materialize(DistributionSpec::defaults(kind));
      RngStream a = RngStream::keyed(5, "x", 16, 0);
      RngStream b = RngStream::keyed(5, "x", 16, 0);
      CHECK(sample_vector(model, 16, a) == sample_vector(model, 16, b));
    }
  }
  SUBCASE("dimension mismatch") {
    const auto model = materialize(exp_rate(1.0));
    VectorSampler sampler(model, 4);
    RngStream rng(1);
    Eigen::VectorXd wrong(3);
    CHECK_THROWS_AS(sampler.draw(rng, wrong), DimensionError);
  }
}

TEST_CASE("analytic component moments") {
  SUBCASE("means") {
    CHECK(component_mean(materialize(exp_rate(2.0)), 1) == doctest::Approx(0.5));
    const auto pareto = materialize(DistributionSpec::defaults(DistributionKind::ParetoIid));
    CHECK(component_mean(pareto, 7) == doctest::Approx(3.1 / 2.1));
    CHECK(component_mean(pareto, 7) == doctest::Approx(1.476190).epsilon(1e-6));
    const auto ma = materialize(DistributionSpec::defaults(DistributionKind::Ma2SkewNormal));
    CHECK(component_mean(ma, 3) == doctest::Approx(1.1 * SkewNormalRef(5.0).mean));
  }
  SUBCASE("variances") {
    CHECK(component_variance(materialize(exp_rate(1.0)), 4) == doctest::Approx(1.0));
    const auto pareto = materialize(DistributionSpec::defaults(DistributionKind::ParetoIid));
    CHECK(component_variance(pareto, 1) == doctest::Approx(3.1 / (2.1 * 2.1 * 1.1)).epsilon(1e-12));
    const auto ma = materialize(DistributionSpec::defaults(DistributionKind::Ma2SkewNormal));
    CHECK(component_variance(ma, 1) == doctest::Approx(1.05 * SkewNormalRef(5.0).var));
  }
  SUBCASE("third cross moments") {
    CHECK(third_cross_moment(materialize(exp_rate(1.0)), 1, 1) == doctest::Approx(2.0));
    const auto pareto = materialize(DistributionSpec::defaults(DistributionKind::ParetoIid));
    CHECK(third_cross_moment(pareto, 1, 1) == doctest::Approx(pareto_skew_third(3.1)).epsilon(1e-12));
    CHECK(third_cross_moment(pareto, 1, 1) == doctest::Approx(24.96).epsilon(1e-3));
    CHECK(third_cross_moment(pareto, 1, 2) == 0.0);
    const auto ma = materialize(DistributionSpec::defaults(DistributionKind::Ma2SkewNormal));
    CHECK(third_cross_moment(ma, 5, 6) == doctest::Approx(0.042 * SkewNormalRef(5.0).third));
    CHECK(third_cross_moment(ma, 5, 8) == 0.0);
    CHECK(third_cross_moment(ma, 1, 1) ==
          doctest::Approx((1.0 + 0.2 * 0.04 + (-0.1) * 0.01) * SkewNormalRef(5.0).third));
    CHECK_THROWS_AS(third_cross_moment(ma, 0, 1), DomainError);
  }
  SUBCASE("sigma_bar_sq") {
    CHECK(sigma_bar_sq(materialize(exp_rate(1.0)), 37) == doctest::Approx(1.0));
    CHECK(sigma_bar_sq(materialize(DistributionSpec::defaults(DistributionKind::ParetoIid)), 5) ==
          doctest::Approx(3.1 / (2.1 * 2.1 * 1.1)).epsilon(1e-12));
    // E[1/rate^2] for rate ~ U[0.75, 1.25] is 2 (4/3 - 4/5) = 16/15.
    const auto model = DistributionModel::materialize(DistributionSpec::defaults(DistributionKind::IndepExp), 100000);
    CHECK(sigma_bar_sq(model, 100000) == doctest::Approx(16.0 / 15.0).epsilon(0.005));
  }
}

TEST_CASE("variance floor holds for every component") {
  for (auto kind : kAllKinds) {
    const auto model = DistributionModel::materialize(DistributionSpec::defaults(kind), 10000);
    const double floor = model.class_params().sigma_min_sq;
    CHECK(floor > 0.0);
    CHECK(model.class_params().c_moment >= 1.0);
    CHECK(model.class_params().q >= 2.0);
    for (Eigen::Index i = 1; i <= 10000; ++i) {
      if (model.component_variance(i) < floor) {
        FAIL("variance below floor for " << kind_name(kind) << " at i=" << i);
      }
    }
  }
}

TEST_CASE("Monte Carlo moment oracle agrees with the closed forms") {
  SUBCASE("oracle examples at 3 standard errors") {
    RngStream rng(31);
    const auto exp1 = materialize(exp_rate(1.0));
    auto est = mc_moment_oracle(exp1, 1, 1, 1'000'000, rng);
    CHECK(std::abs(est.value - 2.0) <= 3.0 * est.standard_error);
    est = mc_moment_oracle(exp1, 1, 3, 1'000'000, rng);
    CHECK(std::abs(est.value) <= 3.0 * est.standard_error);
    const auto ma = materialize(DistributionSpec::defaults(DistributionKind::Ma2SkewNormal));
    est = mc_moment_oracle(ma, 5, 6, 1'000'000, rng);
    CHECK(std::abs(est.value - third_cross_moment(ma, 5, 6)) <= 3.0 * est.standard_error);
    est = mc_moment_oracle(ma, 2, 6, 1'000'000, rng);
    CHECK(std::abs(est.value) <= 3.0 * est.standard_error);
  }
  SUBCASE("all kinds, all lags within M, 4 standard errors") {
    for (auto kind : kAllKinds) {
      const auto model = materialize(DistributionSpec::defaults(kind));
      const int dep = model.dependence_order();
      for (Eigen::Index i = 3; i <= 4; ++i) {
        for (Eigen::Index j = i - dep; j <= i + dep; ++j) {
          RngStream rng = RngStream::keyed(77, kind_name(kind), static_cast<std::uint64_t>(i),
                                           static_cast<std::uint64_t>(j));
          const auto est = mc_moment_oracle(model, i, j, 1'000'000, rng);
          const double z = (est.value - model.third_cross_moment(i, j)) / est.standard_error;
          INFO(kind_name(kind) << " i=" << i << " j=" << j << " z=" << z);
          CHECK(std::abs(z) <= 4.0);
        }
      }
    }
  }
  SUBCASE("n_samples must be positive") {
    RngStream rng(1);
    CHECK_THROWS_AS(mc_moment_oracle(materialize(exp_rate(1.0)), 1, 1, 0, rng), ConfigError);
  }
}

TEST_CASE("components beyond the dependence order are uncorrelated") {
  for (auto kind : {DistributionKind::Ma2SkewNormal, DistributionKind::IndepExp}) {
    const auto model = materialize(DistributionSpec::defaults(kind));
    const Eigen::Index lag = model.dependence_order() + 1;
    const Eigen::Index p = 2 + lag;
    VectorSampler sampler(model, p);
    RngStream rng(404);
    Eigen::VectorXd x(p);
    const int n = 1'000'000;
    const double mu_a = model.component_mean(2);
    const double mu_b = model.component_mean(2 + lag);
    double sum = 0.0, sum_sq = 0.0;
    for (int k = 0; k < n; ++k) {
      sampler.draw(rng, x);
      const double prod = (x[1] - mu_a) * (x[1 + lag] - mu_b);
      sum += prod;
      sum_sq += prod * prod;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum_sq / n - mean * mean) / n);
    CHECK(std::abs(mean) <= 4.0 * se);
  }
}
