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
#include <cstdint>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gmedian/distributions.hpp"
#include "gmedian/error.hpp"

namespace gmedian {

/// Indices (1-based, sorted) within order*M of `center`, clipped to [1, p].
struct ExclusionSet {
  Eigen::Index center = 1;
  Eigen::Index order = 1;
  Eigen::Index dependence = 0;
  std::vector<Eigen::Index> members;

  bool contains(Eigen::Index j) const {
    return std::binary_search(members.begin(), members.end(), j);
  }
};

ExclusionSet exclusion_set(Eigen::Index i, Eigen::Index order, Eigen::Index dependence,
                           Eigen::Index p);

struct ExpansionPrediction {
  Eigen::Index i = 1;
  Eigen::Index p = 1;
  double mu_i = 0.0;
  double term = 0.0;
  double predicted = 0.0;
};

/// -(1 / (2 sigma_bar^2 p)) * sum_{j in E(i)} E[(X_i - mu_i)(X_j - mu_j)^2].
/// Requires p >= i + M.
double expansion_term(const DistributionModel& model, Eigen::Index i, Eigen::Index p);

ExpansionPrediction predicted_component(const DistributionModel& model, Eigen::Index i,
                                        Eigen::Index p);

/// |m_hat_i - (mu_i + expansion_term)|.
double residual(double m_hat_i, const DistributionModel& model, Eigen::Index i, Eigen::Index p);

/// Euclidean distance between m_hat and the mean vector of the model in
/// dimension p = m_hat.size().
double l2_bias(const Eigen::Ref<const Eigen::VectorXd>& m_hat, const DistributionModel& model,
               Eigen::Index p);

/// True iff l2_bias(m_hat) <= sqrt(C p).
bool bias_bound_check(const Eigen::Ref<const Eigen::VectorXd>& m_hat,
                      const DistributionModel& model, Eigen::Index p, double c_bound);

/// Relative gap of the exact per-sample identity
///
///   1/||x - m|| - 1/||x' - m'||
///     = -S / (||x - m|| ||x' - m'|| (||x - m|| + ||x' - m'||)),
///
/// where x', m' drop the coordinates in E(i) and S is the squared distance
/// over those coordinates. The gap is scaled by ||x' - m'|| (i.e. relative to
/// 1/||x' - m'||). Throws DomainError when the reduced vectors are empty or
/// zero.
template <typename DerivedX, typename DerivedM>
typename DerivedX::Scalar identity_gap(const Eigen::MatrixBase<DerivedX>& x,
                                       const Eigen::MatrixBase<DerivedM>& m, Eigen::Index i,
                                       Eigen::Index dependence) {
  using Scalar = typename DerivedX::Scalar;
  const Eigen::Index p = x.size();
  if (m.size() != p) throw DimensionError("identity_gap: dimension mismatch");
  const ExclusionSet excl = exclusion_set(i, 1, dependence, p);
  if (static_cast<Eigen::Index>(excl.members.size()) >= p) {
    throw DomainError("identity_gap: reduced vector is empty (p=" + std::to_string(p) +
                      ", i=" + std::to_string(i) + ", M=" + std::to_string(dependence) + ")");
  }
  Scalar excluded_sq(0);
  Scalar kept_sq(0);
  for (Eigen::Index k = 0; k < p; ++k) {
    const Scalar d = x[k] - m[k];
    if (excl.contains(k + 1)) {
      excluded_sq += d * d;
    } else {
      kept_sq += d * d;
    }
  }
  using std::sqrt;
  const Scalar full = sqrt(kept_sq + excluded_sq);
  const Scalar reduced = sqrt(kept_sq);
  if (!(reduced > Scalar(0))) throw DomainError("identity_gap: reduced distance is zero");
  const Scalar lhs = Scalar(1) / full - Scalar(1) / reduced;
  const Scalar rhs = -excluded_sq / (full * reduced * (full + reduced));
  using std::abs;
  return abs(lhs - rhs) * reduced;
}

}  // namespace gmedian

namespace gmedian {

struct IdentityCheck {
  double max_gap = 0.0;
  std::int64_t trials = 0;
};

/// identity_gap over `trials` random (x, m) pairs in dimension p with
/// dependence M. The centre index is drawn among those whose reduced vector
/// is nonempty; throws DomainError if there is none.
IdentityCheck check_identity(std::int64_t trials, Eigen::Index p, Eigen::Index dependence,
                             std::uint64_t seed);

}  // namespace gmedian
