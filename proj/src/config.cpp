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

#include "gmedian/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "gmedian/error.hpp"

namespace gmedian {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("invalid value for '" + std::string(key) + "': '" + std::string(text) + "'");
  }
  return value;
}

// Shortest text that parses back to the same double.
std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void set_experiment_key(ExperimentConfig& config, std::string_view key, std::string_view value) {
  if (key == "base_seed") {
    config.base_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "p_grid") {
    config.p_grid.clear();
    std::size_t pos = 0;
    while (pos <= value.size()) {
      const auto comma = value.find(',', pos);
      const auto item = trim(value.substr(pos, comma == std::string_view::npos ? value.npos : comma - pos));
      if (!item.empty()) config.p_grid.push_back(parse_number<Eigen::Index>(key, item));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
  } else if (key == "sample_rule") {
    config.sample_rule = parse_sample_rule(value);
  } else if (key == "n_cap") {
    config.n_cap = parse_number<std::int64_t>(key, value);
  } else if (key == "n_fixed") {
    config.n_fixed = parse_number<std::int64_t>(key, value);
  } else if (key == "replicates") {
    config.replicates = parse_number<int>(key, value);
  } else if (key == "c_gamma") {
    config.rm_hyper.c_gamma = parse_number<double>(key, value);
  } else if (key == "alpha") {
    config.rm_hyper.alpha = parse_number<double>(key, value);
  } else if (key == "slope_p_min") {
    config.slope_p_min = parse_number<Eigen::Index>(key, value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in, std::string_view source) {
  ExperimentConfig config = ExperimentConfig::defaults();
  config.distributions.clear();
  bool in_distribution = false;
  std::string raw;
  std::size_t line_no = 0;
  try {
    while (std::getline(in, raw)) {
      ++line_no;
      std::string_view line(raw);
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line != "[distribution]") throw ConfigError("unknown section " + std::string(line));
        config.distributions.emplace_back();
        in_distribution = true;
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ConfigError("expected key = value");
      const auto key = trim(line.substr(0, eq));
      const auto value = trim(line.substr(eq + 1));
      if (in_distribution) {
        config.distributions.back().set(key, value);
      } else {
        set_experiment_key(config, key, value);
      }
    }
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
  }
  if (config.distributions.empty()) config.distributions = ExperimentConfig::defaults().distributions;
  config.validate();
  return config;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  return parse_experiment_config(in, path.string());
}

std::string format_experiment_config(const ExperimentConfig& config) {
  std::ostringstream out;
  out << "base_seed = " << config.base_seed << '\n';
  out << "p_grid = ";
  for (std::size_t k = 0; k < config.p_grid.size(); ++k) {
    out << (k ? ", " : "") << config.p_grid[k];
  }
  out << '\n';
  out << "sample_rule = " << sample_rule_name(config.sample_rule) << '\n';
  out << "n_cap = " << config.n_cap << '\n';
  out << "n_fixed = " << config.n_fixed << '\n';
  out << "replicates = " << config.replicates << '\n';
  out << "c_gamma = " << format_double(config.rm_hyper.c_gamma) << '\n';
  out << "alpha = " << format_double(config.rm_hyper.alpha) << '\n';
  out << "slope_p_min = " << config.slope_p_min << '\n';
  for (const auto& spec : config.distributions) {
    out << "\n[distribution]\n";
    out << "kind = " << kind_name(spec.kind) << '\n';
    if (!spec.name.empty()) out << "name = " << spec.name << '\n';
    switch (spec.kind) {
      case DistributionKind::IndepExp:
        out << "rate_low = " << format_double(spec.rate_low) << '\n';
        out << "rate_high = " << format_double(spec.rate_high) << '\n';
        break;
      case DistributionKind::Ma2SkewNormal:
        out << "theta0 = " << format_double(spec.theta[0]) << '\n';
        out << "theta1 = " << format_double(spec.theta[1]) << '\n';
        out << "theta2 = " << format_double(spec.theta[2]) << '\n';
        out << "sn_location = " << format_double(spec.sn_location) << '\n';
        out << "sn_scale = " << format_double(spec.sn_scale) << '\n';
        out << "sn_shape = " << format_double(spec.sn_shape) << '\n';
        break;
      case DistributionKind::ParetoIid:
        out << "shape = " << format_double(spec.shape) << '\n';
        out << "scale = " << format_double(spec.scale) << '\n';
        break;
      case DistributionKind::IndepPareto:
        out << "shape_low = " << format_double(spec.shape_low) << '\n';
        out << "shape_high = " << format_double(spec.shape_high) << '\n';
        out << "scale = " << format_double(spec.scale) << '\n';
        break;
      case DistributionKind::GaussIid:
        out << "location = " << format_double(spec.location) << '\n';
        out << "scale = " << format_double(spec.scale) << '\n';
        break;
    }
    out << "param_seed = " << spec.param_seed << '\n';
  }
  return out.str();
}

DistributionSpec parse_distribution_arg(std::string_view text) {
  text = trim(text);
  const auto colon = text.find(':');
  DistributionSpec spec = DistributionSpec::defaults(parse_kind(trim(text.substr(0, colon))));
  if (colon != std::string_view::npos) {
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = trim(rest.substr(0, comma));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError("expected key=value in distribution argument, got '" + std::string(item) + "'");
      }
      spec.set(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
    }
  }
  spec.validate();
  return spec;
}

}  // namespace gmedian
