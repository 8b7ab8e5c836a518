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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "gmedian/distributions.hpp"
#include "gmedian/error.hpp"
#include "gmedian/rng.hpp"

namespace gmedian {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// ---------------------------------------------------------------------------
// Averaged Robbins-Monro

template <typename Scalar = double>
struct RMHyperParams {
  Scalar c_gamma = Scalar(2);
  Scalar alpha = Scalar(0.75);

  void validate() const {
    if (!(c_gamma > Scalar(0))) throw ConfigError("c_gamma must be > 0");
    if (!(alpha > Scalar(0.5) && alpha < Scalar(1))) throw ConfigError("alpha must lie in (1/2, 1)");
  }

  Scalar step_size(std::int64_t t) const {
    using std::pow;
    return c_gamma * pow(static_cast<Scalar>(t), -alpha);
  }
};

/// Running state of the averaged estimator. `average` is the arithmetic mean
/// of every iterate so far, the initial one included.
template <typename Scalar = double>
struct RMState {
  Vector<Scalar> iterate;
  Vector<Scalar> average;
  std::int64_t step_count = 0;
  RMHyperParams<Scalar> hyper;
};

template <typename Derived>
RMState<typename Derived::Scalar> rm_init(const Eigen::MatrixBase<Derived>& first_sample,
                                          const RMHyperParams<typename Derived::Scalar>& hyper = {}) {
  if (first_sample.size() == 0) throw DimensionError("rm_init: empty sample");
  hyper.validate();
  RMState<typename Derived::Scalar> state;
  state.iterate = first_sample;
  state.average = first_sample;
  state.hyper = hyper;
  return state;
}

/// One step: iterate moves by gamma_t along the unit vector towards the
/// sample (no move on an exact hit), then the average absorbs the new
/// iterate with weight 1/(t+1).
template <typename Scalar, typename Derived>
void rm_update(RMState<Scalar>& state, const Eigen::MatrixBase<Derived>& sample) {
  if (sample.size() != state.iterate.size()) {
    throw DimensionError("rm_update: sample dimension mismatch");
  }
  const std::int64_t t = state.step_count + 1;
  const Scalar dist = (sample - state.iterate).norm();
  if (dist > Scalar(0)) {
    state.iterate += (state.hyper.step_size(t) / dist) * (sample - state.iterate);
  }
  state.average += (state.iterate - state.average) / static_cast<Scalar>(t + 1);
  state.step_count = t;
}

/// Averaged Robbins-Monro estimate from n fresh draws of `model` in
/// dimension p. Memory is O(p).
Eigen::VectorXd estimate_streaming(const DistributionModel& model, Eigen::Index p, std::int64_t n,
                                   RngStream& rng, const RMHyperParams<double>& hyper = {});

/// Averaged Robbins-Monro over the columns of `points`, in order.
template <typename Derived>
Vector<typename Derived::Scalar> estimate_streaming(
    const Eigen::MatrixBase<Derived>& points,
    const RMHyperParams<typename Derived::Scalar>& hyper = {}) {
  if (points.cols() < 2) throw ConfigError("estimate_streaming: need at least 2 samples");
  auto state = rm_init(points.col(0), hyper);
  for (Eigen::Index k = 1; k < points.cols(); ++k) rm_update(state, points.col(k));
  return state.average;
}

// ---------------------------------------------------------------------------
// Batch estimators over point sets stored column-wise (dim x n).

template <typename Scalar = double>
struct WeiszfeldConfig {
  Scalar tolerance = Scalar(1e-10);
  std::int64_t max_iterations = 10000;
  Scalar anchor_epsilon = Scalar(1e-12);

  void validate() const {
    if (!(tolerance > Scalar(0))) throw ConfigError("weiszfeld: tolerance must be > 0");
    if (max_iterations < 1) throw ConfigError("weiszfeld: max_iterations must be >= 1");
    if (!(anchor_epsilon > Scalar(0))) throw ConfigError("weiszfeld: anchor_epsilon must be > 0");
  }
};

enum class WeiszfeldStatus { Converged, MaxIterations };

template <typename Scalar>
struct WeiszfeldResult {
  Vector<Scalar> median;
  WeiszfeldStatus status = WeiszfeldStatus::MaxIterations;
  std::int64_t iterations = 0;

  bool converged() const { return status == WeiszfeldStatus::Converged; }
};

template <typename Derived>
Vector<typename Derived::Scalar> sample_mean(const Eigen::MatrixBase<Derived>& points) {
  if (points.cols() == 0 || points.rows() == 0) throw ConfigError("sample_mean: empty input");
  return points.rowwise().mean();
}

template <typename Derived>
Vector<typename Derived::Scalar> coordinatewise_median(const Eigen::MatrixBase<Derived>& points) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = points.cols();
  Vector<Scalar> med(points.rows());
  std::vector<Scalar> buf(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    for (Eigen::Index c = 0; c < n; ++c) buf[static_cast<std::size_t>(c)] = points(r, c);
    const auto mid = buf.begin() + n / 2;
    std::nth_element(buf.begin(), mid, buf.end());
    if (n % 2 == 1) {
      med[r] = *mid;
    } else {
      const Scalar upper = *mid;
      const Scalar lower = *std::max_element(buf.begin(), mid);
      med[r] = (lower + upper) / Scalar(2);
    }
  }
  return med;
}

namespace detail {

// Sum of unit vectors from m towards every point farther than eps, and the
// number of points within eps of m.
template <typename Derived, typename VecT>
std::pair<Vector<typename Derived::Scalar>, Eigen::Index> pull_and_multiplicity(
    const Eigen::MatrixBase<Derived>& points, const VecT& m, typename Derived::Scalar eps) {
  using Scalar = typename Derived::Scalar;
  Vector<Scalar> pull = Vector<Scalar>::Zero(points.rows());
  Eigen::Index anchored = 0;
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    const Scalar d = (points.col(c) - m).norm();
    if (d <= eps) {
      ++anchored;
    } else {
      pull += (points.col(c) - m) / d;
    }
  }
  return {pull, anchored};
}

}  // namespace detail

/// Norm of the empirical subgradient of m -> sum_j ||x_j - m||, i.e. the
/// distance from 0 to the subdifferential. Points within anchor_epsilon of m
/// are anchored: each removes up to one unit of pull.
template <typename Derived, typename DerivedM>
typename Derived::Scalar gradient_norm(const Eigen::MatrixBase<Derived>& points,
                                       const Eigen::MatrixBase<DerivedM>& m,
                                       typename Derived::Scalar anchor_epsilon = 1e-12) {
  using Scalar = typename Derived::Scalar;
  if (m.size() != points.rows()) throw DimensionError("gradient_norm: dimension mismatch");
  const auto [pull, anchored] = detail::pull_and_multiplicity(points, m, anchor_epsilon);
  return std::max(Scalar(0), pull.norm() - static_cast<Scalar>(anchored));
}

/// Weiszfeld fixed-point iteration for the sample geometric median, started
/// at the coordinatewise median. When the iterate sits on data points the
/// Vardi-Zhang anchored step is used. Each iteration also tests the nearest
/// data point for optimality, so medians located at a data point (e.g. odd
/// one-dimensional samples) are returned exactly.
template <typename Derived>
WeiszfeldResult<typename Derived::Scalar> weiszfeld(
    const Eigen::MatrixBase<Derived>& points,
    const WeiszfeldConfig<typename Derived::Scalar>& config = {}) {
  using Scalar = typename Derived::Scalar;
  config.validate();
  if (points.cols() == 0 || points.rows() == 0) throw ConfigError("weiszfeld: empty input");

  const Eigen::Index n = points.cols();
  const Eigen::Index dim = points.rows();
  WeiszfeldResult<Scalar> result;
  Vector<Scalar> m = coordinatewise_median(points);
  Vector<Scalar> weighted(dim);
  Eigen::Index last_tested = -1;

  for (std::int64_t it = 1; it <= config.max_iterations; ++it) {
    result.iterations = it;
    weighted.setZero();
    Scalar weight_sum(0);
    Eigen::Index anchored = 0;
    Eigen::Index nearest = 0;
    Scalar nearest_dist = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index c = 0; c < n; ++c) {
      const Scalar d = (points.col(c) - m).norm();
      if (d < nearest_dist) {
        nearest_dist = d;
        nearest = c;
      }
      if (d <= config.anchor_epsilon) {
        ++anchored;
        continue;
      }
      weighted += points.col(c) / d;
      weight_sum += Scalar(1) / d;
    }

    if (weight_sum == Scalar(0)) {  // every point coincides with m
      result.median = m;
      result.status = WeiszfeldStatus::Converged;
      return result;
    }

    Vector<Scalar> next = weighted / weight_sum;
    if (anchored > 0) {
      // R = sum (x_j - m)/||x_j - m|| = weight_sum * (T - m)
      const Scalar pull = weight_sum * (next - m).norm();
      if (pull <= static_cast<Scalar>(anchored)) {
        result.median = m;
        result.status = WeiszfeldStatus::Converged;
        return result;
      }
      const Scalar lambda = static_cast<Scalar>(anchored) / pull;
      next = (Scalar(1) - lambda) * next + lambda * m;
    }

    if (nearest != last_tested) {
      last_tested = nearest;
      const auto [pull, mult] =
          detail::pull_and_multiplicity(points, points.col(nearest), config.anchor_epsilon);
      if (pull.norm() <= static_cast<Scalar>(mult)) {
        result.median = points.col(nearest);
        result.status = WeiszfeldStatus::Converged;
        return result;
      }
    }

    const Scalar step = (next - m).norm();
    m = std::move(next);
    if (step <= config.tolerance) {
      result.median = m;
      result.status = WeiszfeldStatus::Converged;
      return result;
    }
  }
  result.median = m;
  result.status = WeiszfeldStatus::MaxIterations;
  return result;
}

}  // namespace gmedian
