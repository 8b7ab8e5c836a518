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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "gmedian/distributions.hpp"
#include "gmedian/experiments.hpp"

namespace gmedian {

// Plain-text configuration
//
//   # comment
//   base_seed   = 20240521
//   p_grid      = 8, 12, 16, 24
//   sample_rule = capped-cube        # cube | capped-cube | fixed
//   n_cap       = 20000000
//   n_fixed     = 1000
//   replicates  = 5
//   c_gamma     = 2
//   alpha       = 0.75
//   slope_p_min = 100
//
//   [distribution]
//   kind      = indep-exp
//   rate_low  = 0.75
//   rate_high = 1.25
//
// Each [distribution] section starts a new spec; keys are those accepted
// by DistributionSpec::set. Without any section the four default
// distributions are used.

ExperimentConfig parse_experiment_config(std::istream& in, std::string_view source = "<config>");

/// Throws ConfigError naming the path when it cannot be read.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

std::string format_experiment_config(const ExperimentConfig& config);

/// "kind" or "kind:key=value,key=value".
DistributionSpec parse_distribution_arg(std::string_view text);

}  // namespace gmedian
