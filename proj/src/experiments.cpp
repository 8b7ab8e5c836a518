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

#include "gmedian/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include <Eigen/QR>

#include "gmedian/error.hpp"
#include "gmedian/theory.hpp"

namespace gmedian {

std::string_view sample_rule_name(SampleRule rule) {
  switch (rule) {
    case SampleRule::Cube: return "cube";
    case SampleRule::CappedCube: return "capped-cube";
    case SampleRule::Fixed: return "fixed";
  }
  return "unknown";
}

SampleRule parse_sample_rule(std::string_view name) {
  for (auto rule : {SampleRule::Cube, SampleRule::CappedCube, SampleRule::Fixed}) {
    if (sample_rule_name(rule) == name) return rule;
  }
  throw ConfigError("unknown sample_rule '" + std::string(name) + "'");
}

std::vector<Eigen::Index> ExperimentConfig::default_grid() {
  return {8, 12, 16, 24, 32, 48, 64, 96, 128, 192, 256};
}

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig config;
  config.distributions = {DistributionSpec::defaults(DistributionKind::IndepExp),
                          DistributionSpec::defaults(DistributionKind::Ma2SkewNormal),
                          DistributionSpec::defaults(DistributionKind::ParetoIid),
                          DistributionSpec::defaults(DistributionKind::IndepPareto)};
  config.p_grid = default_grid();
  return config;
}

std::int64_t ExperimentConfig::samples_for(Eigen::Index p) const {
  const std::int64_t cube = static_cast<std::int64_t>(p) * p * p;
  switch (sample_rule) {
    case SampleRule::Cube: return cube;
    case SampleRule::CappedCube: return std::min(cube, n_cap);
    case SampleRule::Fixed: return n_fixed;
  }
  return cube;
}

void ExperimentConfig::validate() const {
  if (distributions.empty()) throw ConfigError("config: no distributions");
  if (p_grid.empty()) throw ConfigError("config: p_grid is empty");
  for (std::size_t k = 0; k < p_grid.size(); ++k) {
    if (p_grid[k] < 1) throw ConfigError("config: p_grid entries must be positive");
    if (k > 0 && p_grid[k] <= p_grid[k - 1]) {
      throw ConfigError("config: p_grid must be strictly increasing");
    }
  }
  if (replicates < 1) throw ConfigError("config: replicates must be >= 1");
  if (n_cap < 2) throw ConfigError("config: n_cap must be >= 2");
  if (slope_p_min < 1) throw ConfigError("config: slope_p_min must be >= 1");
  for (Eigen::Index p : p_grid) {
    if (samples_for(p) < 2) {
      throw ConfigError("config: sample rule gives n < 2 at p=" + std::to_string(p));
    }
  }
  rm_hyper.validate();
  std::vector<std::string> ids;
  for (const auto& spec : distributions) {
    spec.validate();
    const std::string id = spec.id();
    if (id.empty() || id.find_first_of(",\"\n\r") != std::string::npos) {
      throw ConfigError("config: invalid distribution name '" + id + "'");
    }
    if (std::find(ids.begin(), ids.end(), id) != ids.end()) {
      throw ConfigError("config: duplicate distribution name '" + id + "'");
    }
    ids.push_back(id);
  }
}

// ---------------------------------------------------------------------------

RunRecord run_point(const DistributionModel& model, Eigen::Index p, int replicate,
                    const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const std::string id = model.spec().id();
  const std::int64_t n = config.samples_for(p);
  RngStream rng = RngStream::keyed(config.base_seed, id, static_cast<std::uint64_t>(p),
                                   static_cast<std::uint64_t>(replicate));
  const Eigen::VectorXd m_hat = estimate_streaming(model, p, n, rng, config.rm_hyper);

  RunRecord rec;
  rec.dist = id;
  rec.p = p;
  rec.replicate = replicate;
  rec.n = n;
  rec.l2_bias = l2_bias(m_hat, model, p);
  rec.component_dev_1 = m_hat[0] - model.component_mean(1);
  rec.residual_1 = residual(m_hat[0], model, 1, p);
  rec.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

RunRecord run_point(const DistributionSpec& spec, Eigen::Index p, int replicate,
                    const ExperimentConfig& config) {
  const DistributionModel model = DistributionModel::materialize(spec, p);
  return run_point(model, p, replicate, config);
}

SweepResult run_sweep(const ExperimentConfig& config, unsigned workers,
                      const ProgressCallback& progress) {
  config.validate();
  const Eigen::Index max_p = config.p_grid.back();
  std::vector<DistributionModel> models;
  models.reserve(config.distributions.size());
  for (const auto& spec : config.distributions) {
    models.push_back(DistributionModel::materialize(spec, max_p));
  }

  struct Task {
    std::size_t model;
    Eigen::Index p;
    int replicate;
  };
  std::vector<Task> tasks;
  for (std::size_t d = 0; d < models.size(); ++d) {
    for (Eigen::Index p : config.p_grid) {
      for (int r = 0; r < config.replicates; ++r) tasks.push_back({d, p, r});
    }
  }
  // Largest points first for load balance; results are stored by task index.
  std::vector<std::size_t> order(tasks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return tasks[a].p > tasks[b].p; });

  std::vector<RunRecord> slots(tasks.size());
  std::vector<std::string> errors(tasks.size());
  std::vector<char> ok(tasks.size(), 0);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= order.size()) return;
      const std::size_t idx = order[k];
      const Task& task = tasks[idx];
      try {
        slots[idx] = run_point(models[task.model], task.p, task.replicate, config);
        ok[idx] = 1;
      } catch (const std::exception& e) {
        errors[idx] = e.what();
      }
      const std::size_t finished = done.fetch_add(1) + 1;
      if (progress && ok[idx]) {
        std::lock_guard lock(progress_mutex);
        progress(slots[idx], finished, tasks.size());
      }
    }
  };

  const unsigned n_threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(tasks.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  SweepResult result;
  for (std::size_t idx = 0; idx < tasks.size(); ++idx) {
    if (ok[idx]) {
      result.records.push_back(std::move(slots[idx]));
    } else {
      const Task& task = tasks[idx];
      result.failures.push_back(
          {config.distributions[task.model].id(), task.p, task.replicate, errors[idx]});
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

std::string_view field_name(RecordField field) {
  return field == RecordField::L2Bias ? "l2_bias" : "residual_1";
}

std::vector<std::string> distribution_ids(std::span<const RunRecord> records) {
  std::vector<std::string> ids;
  for (const auto& rec : records) {
    if (std::find(ids.begin(), ids.end(), rec.dist) == ids.end()) ids.push_back(rec.dist);
  }
  return ids;
}

std::vector<RunRecord> records_for(std::span<const RunRecord> records, const std::string& dist) {
  std::vector<RunRecord> out;
  for (const auto& rec : records) {
    if (rec.dist == dist) out.push_back(rec);
  }
  return out;
}

namespace {

// The per-run identity dev_r - term = +-residual_r pins term; choose the
// candidate from the first run that is consistent with all runs.
double recover_term(std::span<const RunRecord* const> group) {
  const double plus = group.front()->component_dev_1 - group.front()->residual_1;
  const double minus = group.front()->component_dev_1 + group.front()->residual_1;
  auto mismatch = [&](double term) {
    double worst = 0.0;
    for (const RunRecord* rec : group) {
      worst = std::max(worst, std::abs(std::abs(rec->component_dev_1 - term) - rec->residual_1));
    }
    return worst;
  };
  return mismatch(plus) <= mismatch(minus) ? plus : minus;
}

}  // namespace

std::vector<PointSummary> summarize(std::span<const RunRecord> records) {
  if (records.empty()) return {};
  const std::string& dist = records.front().dist;
  std::map<Eigen::Index, std::vector<const RunRecord*>> by_p;
  for (const auto& rec : records) {
    if (rec.dist != dist) throw FitError("summarize: records span several distributions");
    by_p[rec.p].push_back(&rec);
  }

  std::vector<PointSummary> out;
  for (const auto& [p, group] : by_p) {
    PointSummary s;
    s.dist = dist;
    s.p = p;
    s.replicates = static_cast<int>(group.size());
    const double count = static_cast<double>(group.size());
    for (const RunRecord* rec : group) {
      s.mean_l2_bias += rec->l2_bias / count;
      s.mean_component_dev += rec->component_dev_1 / count;
    }
    if (group.size() > 1) {
      double ss = 0.0;
      for (const RunRecord* rec : group) {
        const double d = rec->component_dev_1 - s.mean_component_dev;
        ss += d * d;
      }
      s.sd_component_dev = std::sqrt(ss / (count - 1.0));
      s.residual_se = s.sd_component_dev / std::sqrt(count);
      s.residual = std::abs(s.mean_component_dev - recover_term(group));
    } else {
      s.residual = group.front()->residual_1;
    }
    out.push_back(s);
  }
  return out;
}

SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw FitError("fit_loglog: size mismatch");
  if (x.size() < 2) throw FitError("fit_loglog: need at least 2 points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  std::vector<double> lx(x.size());
  std::vector<double> ly(y.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) throw FitError("fit_loglog: non-positive value");
    lx[k] = std::log10(x[k]);
    ly[k] = std::log10(y[k]);
    mx += lx[k] / n;
    my += ly[k] / n;
  }
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
    syy += (ly[k] - my) * (ly[k] - my);
  }
  if (sxx == 0.0) throw FitError("fit_loglog: all x values are equal");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double e = ly[k] - (fit.intercept + fit.slope * lx[k]);
    ss_res += e * e;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  fit.points_used = static_cast<int>(x.size());
  return fit;
}

SlopeFit fit_slope(std::span<const RunRecord> records, RecordField field, Eigen::Index p_min) {
  std::vector<RunRecord> window;
  for (const auto& rec : records) {
    if (rec.p >= p_min) window.push_back(rec);
  }
  int nonpositive = 0;
  int noisy = 0;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const PointSummary& s : summarize(window)) {
    const double value = field == RecordField::L2Bias ? s.mean_l2_bias : s.residual;
    if (!(value > 0.0)) {
      ++nonpositive;
      continue;
    }
    if (field == RecordField::Residual1 && s.replicates > 1 && value < 3.0 * s.residual_se) {
      ++noisy;
      continue;
    }
    xs.push_back(static_cast<double>(s.p));
    ys.push_back(value);
  }
  if (xs.size() < 2) {
    throw FitError("fit_slope(" + std::string(field_name(field)) + "): only " +
                   std::to_string(xs.size()) + " usable points with p >= " +
                   std::to_string(p_min) + " (" + std::to_string(nonpositive) +
                   " non-positive, " + std::to_string(noisy) + " below noise floor)");
  }
  SlopeFit fit = fit_loglog(xs, ys);
  fit.excluded_nonpositive = nonpositive;
  fit.excluded_noise = noisy;
  return fit;
}

// ---------------------------------------------------------------------------

double TwoTermFit::deviation(double p) const { return a / p + b / std::pow(p, gamma); }

double TwoTermFit::l2_curve(double p) const { return std::sqrt(p) * std::abs(deviation(p)); }

namespace {

struct LinearSolve {
  double a = 0.0;
  double b = 0.0;
  double residual = 0.0;
};

// Weighted LS with weights p: p*y ~ a + b * p^{1-gamma}.
LinearSolve solve_for_gamma(const Eigen::ArrayXd& p, const Eigen::ArrayXd& scaled, double gamma) {
  Eigen::MatrixXd design(p.size(), 2);
  design.col(0).setOnes();
  design.col(1) = p.pow(1.0 - gamma).matrix();
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(scaled.matrix());
  LinearSolve out;
  out.a = coef[0];
  out.b = coef[1];
  out.residual = (design * coef - scaled.matrix()).norm();
  return out;
}

}  // namespace

TwoTermFit fit_two_term(std::span<const double> p_values, std::span<const double> deviation) {
  if (p_values.size() != deviation.size()) throw FitError("fit_two_term: size mismatch");
  std::vector<double> distinct(p_values.begin(), p_values.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 4) throw FitError("fit_two_term: need at least 4 distinct p values");
  if (distinct.front() <= 0.0) throw FitError("fit_two_term: p must be positive");

  const auto n = static_cast<Eigen::Index>(p_values.size());
  const Eigen::ArrayXd p = Eigen::Map<const Eigen::ArrayXd>(p_values.data(), n);
  const Eigen::ArrayXd scaled = p * Eigen::Map<const Eigen::ArrayXd>(deviation.data(), n);

  // One-term model first: if a/p explains the data to rounding, gamma is
  // unidentifiable and b = 0.
  const double a0 = scaled.mean();
  const double r0 = (scaled - a0).matrix().norm();
  if (r0 <= 1e-12 * std::max(1.0, scaled.matrix().norm())) {
    return {a0, 0.0, 1.0, r0};
  }

  constexpr double kLow = 0.9;
  constexpr double kHigh = 1.2;
  constexpr int kSteps = 300;
  const double h = (kHigh - kLow) / kSteps;
  auto objective = [&](double g) { return solve_for_gamma(p, scaled, g).residual; };

  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kSteps; ++k) {
    const double g = kLow + h * k;
    if (std::abs(g - 1.0) < 1e-9) continue;  // columns coincide
    const double v = objective(g);
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }

  double lo = kLow + h * std::max(best - 1, 0);
  double hi = kLow + h * std::min(best + 1, kSteps);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  while (hi - lo > 1e-10) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = objective(x2);
    }
  }
  double gamma = 0.5 * (lo + hi);
  if (best_val < std::min(f1, f2) && std::abs(kLow + h * best - 1.0) >= 1e-9) {
    gamma = kLow + h * best;
  }
  const LinearSolve sol = solve_for_gamma(p, scaled, gamma);
  return {sol.a, sol.b, gamma, sol.residual};
}

TwoTermFit fit_two_term(std::span<const RunRecord> records) {
  std::vector<double> ps;
  std::vector<double> devs;
  for (const PointSummary& s : summarize(records)) {
    ps.push_back(static_cast<double>(s.p));
    devs.push_back(s.mean_component_dev);
  }
  return fit_two_term(ps, devs);
}

}  // namespace gmedian
