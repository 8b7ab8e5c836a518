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

#include "gmedian/theory.hpp"

#include <cmath>

#include "gmedian/rng.hpp"

namespace gmedian {

ExclusionSet exclusion_set(Eigen::Index i, Eigen::Index order, Eigen::Index dependence,
                           Eigen::Index p) {
  if (p < 1 || i < 1 || i > p) {
    throw DomainError("exclusion_set: index " + std::to_string(i) + " outside [1, " +
                      std::to_string(p) + "]");
  }
  if (order < 1) throw DomainError("exclusion_set: order must be >= 1");
  if (dependence < 0) throw DomainError("exclusion_set: dependence must be >= 0");
  ExclusionSet set;
  set.center = i;
  set.order = order;
  set.dependence = dependence;
  const Eigen::Index reach = order * dependence;
  for (Eigen::Index j = std::max<Eigen::Index>(1, i - reach); j <= std::min(p, i + reach); ++j) {
    set.members.push_back(j);
  }
  return set;
}

double expansion_term(const DistributionModel& model, Eigen::Index i, Eigen::Index p) {
  const Eigen::Index dep = model.dependence_order();
  if (i < 1 || p < i + dep) {
    throw DomainError("expansion_term: need 1 <= i and p >= i + M (i=" + std::to_string(i) +
                      ", p=" + std::to_string(p) + ", M=" + std::to_string(dep) + ")");
  }
  const ExclusionSet excl = exclusion_set(i, 1, dep, p);
  double acc = 0.0;
  for (Eigen::Index j : excl.members) acc += model.third_cross_moment(i, j);
  return -acc / (2.0 * model.sigma_bar_sq(p) * static_cast<double>(p));
}

ExpansionPrediction predicted_component(const DistributionModel& model, Eigen::Index i,
                                        Eigen::Index p) {
  ExpansionPrediction pred;
  pred.i = i;
  pred.p = p;
  pred.term = expansion_term(model, i, p);
  pred.mu_i = model.component_mean(i);
  pred.predicted = pred.mu_i + pred.term;
  return pred;
}

double residual(double m_hat_i, const DistributionModel& model, Eigen::Index i, Eigen::Index p) {
  return std::abs(m_hat_i - predicted_component(model, i, p).predicted);
}

double l2_bias(const Eigen::Ref<const Eigen::VectorXd>& m_hat, const DistributionModel& model,
               Eigen::Index p) {
  if (m_hat.size() != p) throw DimensionError("l2_bias: m_hat has wrong dimension");
  return (m_hat - model.mean_vector(p)).norm();
}

bool bias_bound_check(const Eigen::Ref<const Eigen::VectorXd>& m_hat,
                      const DistributionModel& model, Eigen::Index p, double c_bound) {
  return l2_bias(m_hat, model, p) <= std::sqrt(c_bound * static_cast<double>(p));
}

}  // namespace gmedian

namespace gmedian {

IdentityCheck check_identity(std::int64_t trials, Eigen::Index p, Eigen::Index dependence,
                             std::uint64_t seed) {
  if (trials < 1) throw ConfigError("check_identity: trials must be >= 1");
  if (p < 1) throw DomainError("check_identity: p must be >= 1");
  std::vector<Eigen::Index> centres;
  for (Eigen::Index i = 1; i <= p; ++i) {
    if (static_cast<Eigen::Index>(exclusion_set(i, 1, dependence, p).members.size()) < p) {
      centres.push_back(i);
    }
  }
  if (centres.empty()) {
    throw DomainError("check_identity: reduced vector is empty for every index (p=" +
                      std::to_string(p) + ", M=" + std::to_string(dependence) + ")");
  }
  RngStream rng(RngStream::derive_key(seed, "check-identity", static_cast<std::uint64_t>(p),
                                      static_cast<std::uint64_t>(dependence)));
  IdentityCheck out;
  out.trials = trials;
  Eigen::VectorXd x(p);
  Eigen::VectorXd m(p);
  for (std::int64_t t = 0; t < trials; ++t) {
    const auto pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(centres.size()));
    const Eigen::Index i = centres[std::min(pick, centres.size() - 1)];
    const double scale = std::pow(10.0, -3.0 + 6.0 * rng.uniform());
    for (Eigen::Index k = 0; k < p; ++k) {
      x[k] = scale * rng.normal();
      m[k] = 0.5 * scale * rng.normal();
    }
    out.max_gap = std::max(out.max_gap, identity_gap(x, m, i, dependence));
  }
  return out;
}

}  // namespace gmedian
