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

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "gmedian/rng.hpp"

namespace gmedian {

enum class DistributionKind {
  IndepExp,      // independent exponentials, rates ~ U[rate_low, rate_high]
  Ma2SkewNormal, // X_i = th0 L_i + th1 L_{i-1} + th2 L_{i-2}, L iid skew normal
  ParetoIid,     // iid Pareto(shape, scale)
  IndepPareto,   // independent Pareto, shapes ~ U[shape_low, shape_high]
  GaussIid,      // iid Gaussian; symmetric control
};

std::string_view kind_name(DistributionKind kind);
DistributionKind parse_kind(std::string_view name);

/// Moment-class metadata of a component sequence: dependence order M,
/// moment order q, variance floor, density bound and moment bound C.
struct ClassParams {
  int m_dep = 0;
  double q = 2.0;
  double sigma_min_sq = 1.0;
  double c_density = 1.0;
  double c_moment = 1.0;

  void validate() const;
};

struct DistributionSpec {
  DistributionKind kind = DistributionKind::IndepExp;
  /// Identifier used in records and stream keys; empty means kind_name(kind).
  std::string name;

  double rate_low = 0.75;
  double rate_high = 1.25;

  std::array<double, 3> theta{1.0, 0.2, -0.1};
  double sn_location = 0.0;
  double sn_scale = 1.0;
  double sn_shape = 5.0;

  double shape = 3.1;
  double shape_low = 7.0;
  double shape_high = 8.0;
  /// Pareto scale (both Pareto kinds) or Gaussian standard deviation.
  double scale = 1.0;
  double location = 0.0;  // Gaussian mean

  std::uint64_t param_seed = 1;

  static DistributionSpec defaults(DistributionKind kind);

  std::string id() const { return name.empty() ? std::string(kind_name(kind)) : name; }

  /// Throws ConfigError on invalid ranges (low > high, Pareto shape <= 3, ...).
  void validate() const;

  /// Sets one key of the documented key-value schema. Throws ConfigError on
  /// unknown keys or unparsable values.
  void set(std::string_view key, std::string_view value);
};

/// Estimate with its Monte Carlo standard error.
struct MomentEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::int64_t n_samples = 0;
};

/// A materialized generative process with exact per-component moments.
///
/// Components are 1-based. Heterogeneous parameters (rate or shape of
/// component i) are a pure function of (param_seed, i); the first `capacity`
/// of them are cached at materialization. The model is immutable afterwards
/// and may be shared across threads.
class DistributionModel {
 public:
  static DistributionModel materialize(const DistributionSpec& spec, Eigen::Index capacity = 1024);

  const DistributionSpec& spec() const { return spec_; }
  DistributionKind kind() const { return spec_.kind; }
  const ClassParams& class_params() const { return class_params_; }
  int dependence_order() const { return class_params_.m_dep; }

  /// Rate (indep-exp) or shape (Pareto kinds) of component i; 0 for others.
  double component_parameter(Eigen::Index i) const;

  double component_mean(Eigen::Index i) const;
  double component_variance(Eigen::Index i) const;
  /// E[(X_i - mu_i)(X_j - mu_j)^2]; exactly 0 when |i - j| > M.
  double third_cross_moment(Eigen::Index i, Eigen::Index j) const;
  /// (1/p) sum_{i<=p} Var(X_i).
  double sigma_bar_sq(Eigen::Index p) const;

  Eigen::VectorXd mean_vector(Eigen::Index p) const;

  /// Skew-normal noise moments (ma2-skewnorm only).
  double noise_mean() const;
  double noise_variance() const;
  double noise_third_central() const;

 private:
  DistributionSpec spec_;
  ClassParams class_params_;
  std::vector<double> params_;

  double draw_parameter(Eigen::Index i) const;
};

/// Draws whole vectors (X_1, ..., X_p) from a model into caller storage.
/// Holds per-p scratch so the hot loop does not allocate.
class VectorSampler {
 public:
  VectorSampler(const DistributionModel& model, Eigen::Index p);

  Eigen::Index dim() const { return p_; }
  void draw(RngStream& rng, Eigen::Ref<Eigen::VectorXd> out);

 private:
  const DistributionModel* model_;
  Eigen::Index p_;
  Eigen::ArrayXd coeff_;    // 1/rate, -1/shape, or unused
  Eigen::ArrayXd noise_;    // skew-normal L_{-1..p} or Gaussian draws
  Eigen::ArrayXd gauss0_;
  Eigen::ArrayXd gauss1_;
};

// Free-function surface mirroring the model methods.

DistributionModel materialize(const DistributionSpec& spec);
Eigen::VectorXd sample_vector(const DistributionModel& model, Eigen::Index p, RngStream& rng);
double component_mean(const DistributionModel& model, Eigen::Index i);
double component_variance(const DistributionModel& model, Eigen::Index i);
double third_cross_moment(const DistributionModel& model, Eigen::Index i, Eigen::Index j);
double sigma_bar_sq(const DistributionModel& model, Eigen::Index p);

/// Monte Carlo estimate of E[(X_i - mu_i)(X_j - mu_j)^2] from n_samples
/// independent draws, using the exact means. Light-tailed kinds use plain
/// vector draws. Pareto components entering the product are drawn from a
/// heavier Pareto proposal and reweighted by the likelihood ratio, which
/// keeps the estimator unbiased with a finite variance (the plain estimator
/// has infinite variance for shapes close to 3).
MomentEstimate mc_moment_oracle(const DistributionModel& model, Eigen::Index i, Eigen::Index j,
                                std::int64_t n_samples, RngStream& rng);

}  // namespace gmedian
