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

#include "gmedian/estimators.hpp"

namespace gmedian {

Eigen::VectorXd estimate_streaming(const DistributionModel& model, Eigen::Index p, std::int64_t n,
                                   RngStream& rng, const RMHyperParams<double>& hyper) {
  if (n < 2) throw ConfigError("estimate_streaming: n must be >= 2");
  VectorSampler sampler(model, p);
  Eigen::VectorXd x(p);
  sampler.draw(rng, x);
  RMState<double> state = rm_init(x, hyper);
  for (std::int64_t k = 1; k < n; ++k) {
    sampler.draw(rng, x);
    rm_update(state, x);
  }
  return state.average;
}

}  // namespace gmedian
