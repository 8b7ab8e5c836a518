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

#include "gmedian/distributions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <string>

#include "gmedian/error.hpp"

namespace gmedian {
namespace {

constexpr std::uint64_t kParamSalt = 0x243f6a8885a308d3ULL;

double pareto_mean(double a, double s) { return a * s / (a - 1.0); }

double pareto_variance(double a, double s) {
  return s * s * a / ((a - 1.0) * (a - 1.0) * (a - 2.0));
}

// skewness * variance^{3/2} in closed form.
double pareto_third_central(double a, double s) {
  return 2.0 * s * s * s * a * (1.0 + a) / ((a - 1.0) * (a - 1.0) * (a - 1.0) * (a - 2.0) * (a - 3.0));
}

// E|Z|^q for standard normal Z.
double abs_normal_moment(double q) {
  return std::pow(2.0, q / 2.0) * std::tgamma((q + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
}

double parse_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto* first = value.data();
  const auto* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || !std::isfinite(out)) {
    throw ConfigError("invalid number for '" + std::string(key) + "': '" + std::string(value) + "'");
  }
  return out;
}

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("invalid integer for '" + std::string(key) + "': '" + std::string(value) + "'");
  }
  return out;
}

void check_index(Eigen::Index i) {
  if (i < 1) throw DomainError("component index must be >= 1, got " + std::to_string(i));
}

}  // namespace

std::string_view kind_name(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::IndepExp: return "indep-exp";
    case DistributionKind::Ma2SkewNormal: return "ma2-skewnorm";
    case DistributionKind::ParetoIid: return "pareto-iid";
    case DistributionKind::IndepPareto: return "indep-pareto";
    case DistributionKind::GaussIid: return "gauss-iid";
  }
  return "unknown";
}

DistributionKind parse_kind(std::string_view name) {
  for (auto kind : {DistributionKind::IndepExp, DistributionKind::Ma2SkewNormal,
                    DistributionKind::ParetoIid, DistributionKind::IndepPareto,
                    DistributionKind::GaussIid}) {
    if (kind_name(kind) == name) return kind;
  }
  throw ConfigError("unknown distribution kind '" + std::string(name) + "'");
}

void ClassParams::validate() const {
  if (m_dep < 0) throw ConfigError("dependence order must be >= 0");
  if (!(q >= 2.0)) throw ConfigError("moment order q must be >= 2");
  if (!(sigma_min_sq > 0.0)) throw ConfigError("variance floor must be > 0");
  if (!(c_density > 0.0)) throw ConfigError("density bound must be > 0");
  if (!(c_moment >= 1.0)) throw ConfigError("moment bound C must be >= 1");
}

DistributionSpec DistributionSpec::defaults(DistributionKind kind) {
  DistributionSpec spec;
  spec.kind = kind;
  return spec;
}

void DistributionSpec::validate() const {
  switch (kind) {
    case DistributionKind::IndepExp:
      if (!(rate_low > 0.0)) throw ConfigError("indep-exp: rate_low must be > 0");
      if (rate_low > rate_high) throw ConfigError("indep-exp: rate_low > rate_high");
      break;
    case DistributionKind::Ma2SkewNormal:
      if (!(sn_scale > 0.0)) throw ConfigError("ma2-skewnorm: sn_scale must be > 0");
      if (theta[0] == 0.0) throw ConfigError("ma2-skewnorm: theta0 must be nonzero");
      break;
    case DistributionKind::ParetoIid:
      if (!(shape > 3.0)) throw ConfigError("pareto-iid: shape must be > 3");
      if (!(scale > 0.0)) throw ConfigError("pareto-iid: scale must be > 0");
      break;
    case DistributionKind::IndepPareto:
      if (!(shape_low > 3.0)) throw ConfigError("indep-pareto: shape_low must be > 3");
      if (shape_low > shape_high) throw ConfigError("indep-pareto: shape_low > shape_high");
      if (!(scale > 0.0)) throw ConfigError("indep-pareto: scale must be > 0");
      break;
    case DistributionKind::GaussIid:
      if (!(scale > 0.0)) throw ConfigError("gauss-iid: scale must be > 0");
      break;
  }
}

void DistributionSpec::set(std::string_view key, std::string_view value) {
  if (key == "kind") {
    kind = parse_kind(value);
  } else if (key == "name") {
    name = std::string(value);
  } else if (key == "rate_low") {
    rate_low = parse_double(key, value);
  } else if (key == "rate_high") {
    rate_high = parse_double(key, value);
  } else if (key == "theta0") {
    theta[0] = parse_double(key, value);
  } else if (key == "theta1") {
    theta[1] = parse_double(key, value);
  } else if (key == "theta2") {
    theta[2] = parse_double(key, value);
  } else if (key == "sn_location") {
    sn_location = parse_double(key, value);
  } else if (key == "sn_scale") {
    sn_scale = parse_double(key, value);
  } else if (key == "sn_shape") {
    sn_shape = parse_double(key, value);
  } else if (key == "shape") {
    shape = parse_double(key, value);
  } else if (key == "shape_low") {
    shape_low = parse_double(key, value);
  } else if (key == "shape_high") {
    shape_high = parse_double(key, value);
  } else if (key == "scale") {
    scale = parse_double(key, value);
  } else if (key == "location") {
    location = parse_double(key, value);
  } else if (key == "param_seed") {
    param_seed = parse_u64(key, value);
  } else {
    throw ConfigError("unknown distribution key '" + std::string(key) + "'");
  }
}

// ---------------------------------------------------------------------------

DistributionModel DistributionModel::materialize(const DistributionSpec& spec,
                                                 Eigen::Index capacity) {
  spec.validate();
  DistributionModel model;
  model.spec_ = spec;

  const bool heterogeneous =
      spec.kind == DistributionKind::IndepExp || spec.kind == DistributionKind::IndepPareto;
  if (heterogeneous) {
    model.params_.resize(static_cast<std::size_t>(std::max<Eigen::Index>(capacity, 0)));
    for (std::size_t k = 0; k < model.params_.size(); ++k) {
      model.params_[k] = model.draw_parameter(static_cast<Eigen::Index>(k) + 1);
    }
  }

  ClassParams& cp = model.class_params_;
  const double q_light = 4.0;
  switch (spec.kind) {
    case DistributionKind::IndepExp: {
      cp.m_dep = 0;
      cp.q = q_light;
      cp.sigma_min_sq = 1.0 / (spec.rate_high * spec.rate_high);
      cp.c_density = spec.rate_high;
      const double raw = std::tgamma(cp.q + 1.0) / std::pow(spec.rate_low, cp.q);
      const double mean = 1.0 / spec.rate_low;
      cp.c_moment = std::max({1.0, raw, std::pow(2.0, cp.q - 1.0) * (raw + std::pow(mean, cp.q)),
                              mean * mean});
      break;
    }
    case DistributionKind::ParetoIid:
    case DistributionKind::IndepPareto: {
      const bool iid = spec.kind == DistributionKind::ParetoIid;
      const double a_min = iid ? spec.shape : spec.shape_low;
      const double a_max = iid ? spec.shape : spec.shape_high;
      const double s = spec.scale;
      cp.m_dep = 0;
      cp.q = std::min(q_light, 0.5 * (3.0 + a_min));
      cp.sigma_min_sq = pareto_variance(a_max, s);
      cp.c_density = a_max / s;
      const double raw = a_min * std::pow(s, cp.q) / (a_min - cp.q);
      const double mean = pareto_mean(a_min, s);
      cp.c_moment = std::max({1.0, raw, std::pow(2.0, cp.q - 1.0) * (raw + std::pow(mean, cp.q)),
                              pareto_variance(a_min, s), mean});
      break;
    }
    case DistributionKind::GaussIid: {
      cp.m_dep = 0;
      cp.q = q_light;
      cp.sigma_min_sq = spec.scale * spec.scale;
      cp.c_density = 1.0 / (spec.scale * std::sqrt(2.0 * std::numbers::pi));
      const double central = std::pow(spec.scale, cp.q) * abs_normal_moment(cp.q);
      const double raw = std::pow(2.0, cp.q - 1.0) * (std::pow(std::abs(spec.location), cp.q) + central);
      cp.c_moment = std::max({1.0, raw, central, std::abs(spec.location), cp.sigma_min_sq});
      break;
    }
    case DistributionKind::Ma2SkewNormal: {
      cp.m_dep = 2;
      cp.q = q_light;
      const double delta = spec.sn_shape / std::sqrt(1.0 + spec.sn_shape * spec.sn_shape);
      double theta_sq = 0.0;
      double theta_abs = 0.0;
      for (double t : spec.theta) {
        theta_sq += t * t;
        theta_abs += std::abs(t);
      }
      cp.sigma_min_sq = theta_sq * model.noise_variance();
      cp.c_density = 2.0 / (spec.sn_scale * std::abs(spec.theta[0]) * std::sqrt(2.0 * std::numbers::pi));
      // Minkowski bounds on ||X||_q through ||L||_q.
      const double z_norm = std::pow(abs_normal_moment(cp.q), 1.0 / cp.q);
      const double l_norm = std::abs(spec.sn_location) +
                            spec.sn_scale * z_norm * (delta + std::sqrt(1.0 - delta * delta));
      const double x_norm = theta_abs * l_norm;
      const double mean = std::abs(model.component_mean(1));
      cp.c_moment = std::max({1.0, std::pow(x_norm, cp.q), std::pow(x_norm + mean, cp.q), mean,
                              cp.sigma_min_sq});
      break;
    }
  }
  cp.validate();
  return model;
}

double DistributionModel::draw_parameter(Eigen::Index i) const {
  const RngStream stream(mix64(spec_.param_seed ^ kParamSalt));
  const double u = RngStream::to_open_unit(stream.at(static_cast<std::uint64_t>(i - 1)));
  switch (spec_.kind) {
    case DistributionKind::IndepExp:
      return spec_.rate_low + (spec_.rate_high - spec_.rate_low) * u;
    case DistributionKind::IndepPareto:
      return spec_.shape_low + (spec_.shape_high - spec_.shape_low) * u;
    case DistributionKind::ParetoIid:
      return spec_.shape;
    default:
      return 0.0;
  }
}

double DistributionModel::component_parameter(Eigen::Index i) const {
  check_index(i);
  if (static_cast<std::size_t>(i) <= params_.size()) return params_[static_cast<std::size_t>(i - 1)];
  return draw_parameter(i);
}

double DistributionModel::noise_mean() const {
  const double delta = spec_.sn_shape / std::sqrt(1.0 + spec_.sn_shape * spec_.sn_shape);
  return spec_.sn_location + spec_.sn_scale * delta * std::sqrt(2.0 / std::numbers::pi);
}

double DistributionModel::noise_variance() const {
  const double delta = spec_.sn_shape / std::sqrt(1.0 + spec_.sn_shape * spec_.sn_shape);
  const double b = delta * std::sqrt(2.0 / std::numbers::pi);
  return spec_.sn_scale * spec_.sn_scale * (1.0 - b * b);
}

double DistributionModel::noise_third_central() const {
  const double delta = spec_.sn_shape / std::sqrt(1.0 + spec_.sn_shape * spec_.sn_shape);
  const double b = delta * std::sqrt(2.0 / std::numbers::pi);
  const double w = spec_.sn_scale;
  return w * w * w * 0.5 * (4.0 - std::numbers::pi) * b * b * b;
}

double DistributionModel::component_mean(Eigen::Index i) const {
  check_index(i);
  switch (spec_.kind) {
    case DistributionKind::IndepExp:
      return 1.0 / component_parameter(i);
    case DistributionKind::ParetoIid:
    case DistributionKind::IndepPareto:
      return pareto_mean(component_parameter(i), spec_.scale);
    case DistributionKind::GaussIid:
      return spec_.location;
    case DistributionKind::Ma2SkewNormal:
      return (spec_.theta[0] + spec_.theta[1] + spec_.theta[2]) * noise_mean();
  }
  return 0.0;
}

double DistributionModel::component_variance(Eigen::Index i) const {
  check_index(i);
  switch (spec_.kind) {
    case DistributionKind::IndepExp: {
      const double rate = component_parameter(i);
      return 1.0 / (rate * rate);
    }
    case DistributionKind::ParetoIid:
    case DistributionKind::IndepPareto:
      return pareto_variance(component_parameter(i), spec_.scale);
    case DistributionKind::GaussIid:
      return spec_.scale * spec_.scale;
    case DistributionKind::Ma2SkewNormal: {
      const auto& t = spec_.theta;
      return (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]) * noise_variance();
    }
  }
  return 0.0;
}

double DistributionModel::third_cross_moment(Eigen::Index i, Eigen::Index j) const {
  check_index(i);
  check_index(j);
  const Eigen::Index lag = j - i;
  if (std::abs(lag) > dependence_order()) return 0.0;
  switch (spec_.kind) {
    case DistributionKind::IndepExp: {
      const double rate = component_parameter(i);
      return 2.0 / (rate * rate * rate);
    }
    case DistributionKind::ParetoIid:
    case DistributionKind::IndepPareto:
      return pareto_third_central(component_parameter(i), spec_.scale);
    case DistributionKind::GaussIid:
      return 0.0;
    case DistributionKind::Ma2SkewNormal: {
      // X_i = sum_k theta_k L_{i-k}; only shared noise terms contribute.
      double acc = 0.0;
      for (Eigen::Index k = 0; k < 3; ++k) {
        const Eigen::Index kj = k + lag;
        if (kj < 0 || kj > 2) continue;
        const double tj = spec_.theta[static_cast<std::size_t>(kj)];
        acc += spec_.theta[static_cast<std::size_t>(k)] * tj * tj;
      }
      return noise_third_central() * acc;
    }
  }
  return 0.0;
}

double DistributionModel::sigma_bar_sq(Eigen::Index p) const {
  if (p < 1) throw DomainError("sigma_bar_sq: p must be >= 1");
  if (spec_.kind != DistributionKind::IndepExp && spec_.kind != DistributionKind::IndepPareto) {
    return component_variance(1);
  }
  double acc = 0.0;
  for (Eigen::Index i = 1; i <= p; ++i) acc += component_variance(i);
  return acc / static_cast<double>(p);
}

Eigen::VectorXd DistributionModel::mean_vector(Eigen::Index p) const {
  Eigen::VectorXd mu(p);
  for (Eigen::Index i = 0; i < p; ++i) mu[i] = component_mean(i + 1);
  return mu;
}

// ---------------------------------------------------------------------------

VectorSampler::VectorSampler(const DistributionModel& model, Eigen::Index p)
    : model_(&model), p_(p) {
  if (p < 1) throw DimensionError("sampler dimension must be >= 1");
  switch (model.kind()) {
    case DistributionKind::IndepExp:
      coeff_.resize(p);
      for (Eigen::Index i = 0; i < p; ++i) coeff_[i] = -1.0 / model.component_parameter(i + 1);
      noise_.resize(p);
      break;
    case DistributionKind::ParetoIid:
    case DistributionKind::IndepPareto:
      coeff_.resize(p);
      for (Eigen::Index i = 0; i < p; ++i) coeff_[i] = -1.0 / model.component_parameter(i + 1);
      noise_.resize(p);
      break;
    case DistributionKind::GaussIid:
      noise_.resize(p);
      break;
    case DistributionKind::Ma2SkewNormal:
      noise_.resize(p + 2);
      gauss0_.resize(p + 2);
      gauss1_.resize(p + 2);
      break;
  }
}

void VectorSampler::draw(RngStream& rng, Eigen::Ref<Eigen::VectorXd> out) {
  if (out.size() != p_) throw DimensionError("sampler output size mismatch");
  const auto& spec = model_->spec();
  switch (model_->kind()) {
    case DistributionKind::IndepExp:
      rng.fill_uniform(noise_);
      out.array() = noise_.log() * coeff_;
      break;
    case DistributionKind::ParetoIid:
    case DistributionKind::IndepPareto:
      rng.fill_uniform(noise_);
      out.array() = spec.scale * (noise_.log() * coeff_).exp();
      break;
    case DistributionKind::GaussIid:
      rng.fill_normal(noise_);
      out.array() = spec.location + spec.scale * noise_;
      break;
    case DistributionKind::Ma2SkewNormal: {
      // Stationary start: fresh L_{-1}, L_0, ..., L_p per vector.
      const double delta = spec.sn_shape / std::sqrt(1.0 + spec.sn_shape * spec.sn_shape);
      rng.fill_normal(gauss0_);
      rng.fill_normal(gauss1_);
      noise_ = spec.sn_location +
               spec.sn_scale * (delta * gauss0_.abs() + std::sqrt(1.0 - delta * delta) * gauss1_);
      out.array() = spec.theta[0] * noise_.segment(2, p_) + spec.theta[1] * noise_.segment(1, p_) +
                    spec.theta[2] * noise_.head(p_);
      break;
    }
  }
}

// ---------------------------------------------------------------------------

DistributionModel materialize(const DistributionSpec& spec) {
  return DistributionModel::materialize(spec);
}

Eigen::VectorXd sample_vector(const DistributionModel& model, Eigen::Index p, RngStream& rng) {
  VectorSampler sampler(model, p);
  Eigen::VectorXd x(p);
  sampler.draw(rng, x);
  return x;
}

double component_mean(const DistributionModel& model, Eigen::Index i) {
  return model.component_mean(i);
}

double component_variance(const DistributionModel& model, Eigen::Index i) {
  return model.component_variance(i);
}

double third_cross_moment(const DistributionModel& model, Eigen::Index i, Eigen::Index j) {
  return model.third_cross_moment(i, j);
}

double sigma_bar_sq(const DistributionModel& model, Eigen::Index p) {
  return model.sigma_bar_sq(p);
}

namespace {

struct Welford {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }

  MomentEstimate result() const {
    const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(n)), n};
  }
};

// (X - mu)^power * f_a(X) / f_b(X) for X ~ Pareto(b, s), computed from
// t = log(X / s) without overflow.
double pareto_weighted_power(double t, double a, double b, double s, double mu, int power) {
  const double ratio = 1.0 - (mu / s) * std::exp(-t);
  return (a / b) * std::pow(s, power) * std::exp((power - (a - b)) * t) * std::pow(ratio, power);
}

}  // namespace

MomentEstimate mc_moment_oracle(const DistributionModel& model, Eigen::Index i, Eigen::Index j,
                                std::int64_t n_samples, RngStream& rng) {
  check_index(i);
  check_index(j);
  if (n_samples < 1) throw ConfigError("mc_moment_oracle: n_samples must be >= 1");

  const double mu_i = model.component_mean(i);
  const double mu_j = model.component_mean(j);
  Welford acc;

  const bool pareto =
      model.kind() == DistributionKind::ParetoIid || model.kind() == DistributionKind::IndepPareto;
  if (pareto) {
    const double s = model.spec().scale;
    const double a_i = model.component_parameter(i);
    const double a_j = model.component_parameter(j);
    if (i == j) {
      const double b = 2.0 * (a_i - 3.0) / 3.0;
      for (std::int64_t k = 0; k < n_samples; ++k) {
        const double t = -std::log(rng.uniform()) / b;
        acc.add(pareto_weighted_power(t, a_i, b, s, mu_i, 3));
      }
    } else {
      const double b_i = 2.0 * (a_i - 1.0) / 3.0;
      const double b_j = 2.0 * (a_j - 2.0) / 3.0;
      for (std::int64_t k = 0; k < n_samples; ++k) {
        const double t_i = -std::log(rng.uniform()) / b_i;
        const double t_j = -std::log(rng.uniform()) / b_j;
        acc.add(pareto_weighted_power(t_i, a_i, b_i, s, mu_i, 1) *
                pareto_weighted_power(t_j, a_j, b_j, s, mu_j, 2));
      }
    }
    return acc.result();
  }

  const Eigen::Index dim = std::max(i, j);
  VectorSampler sampler(model, dim);
  Eigen::VectorXd x(dim);
  for (std::int64_t k = 0; k < n_samples; ++k) {
    sampler.draw(rng, x);
    const double di = x[i - 1] - mu_i;
    const double dj = x[j - 1] - mu_j;
    acc.add(di * dj * dj);
  }
  return acc.result();
}

}  // namespace gmedian
