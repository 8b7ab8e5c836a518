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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gmedian/distributions.hpp"
#include "gmedian/estimators.hpp"

namespace gmedian {

enum class SampleRule { Cube, CappedCube, Fixed };

std::string_view sample_rule_name(SampleRule rule);
SampleRule parse_sample_rule(std::string_view name);

/// Definition of a simulation sweep over distributions x p_grid x replicates.
struct ExperimentConfig {
  std::vector<DistributionSpec> distributions;
  std::vector<Eigen::Index> p_grid;
  SampleRule sample_rule = SampleRule::CappedCube;
  std::int64_t n_cap = 20'000'000;
  std::int64_t n_fixed = 1000;  // used by SampleRule::Fixed
  int replicates = 5;
  std::uint64_t base_seed = 20240521;
  RMHyperParams<double> rm_hyper;
  Eigen::Index slope_p_min = 100;

  /// Four simulation distributions, geometric grid 8..256, capped-cube rule.
  static ExperimentConfig defaults();
  static std::vector<Eigen::Index> default_grid();

  std::int64_t samples_for(Eigen::Index p) const;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Outcome of one (distribution, p, replicate) simulation.
struct RunRecord {
  std::string dist;
  Eigen::Index p = 0;
  int replicate = 0;
  std::int64_t n = 0;
  double l2_bias = 0.0;
  double component_dev_1 = 0.0;  // m_hat_1 - mu_1
  double residual_1 = 0.0;       // |m_hat_1 - predicted_1|
  double wall_time_s = 0.0;

  bool operator==(const RunRecord&) const = default;
};

struct PointFailure {
  std::string dist;
  Eigen::Index p = 0;
  int replicate = 0;
  std::string message;
};

struct SweepResult {
  std::vector<RunRecord> records;  // ordered by (distribution order, p, replicate)
  std::vector<PointFailure> failures;
};

using ProgressCallback = std::function<void(const RunRecord&, std::size_t done, std::size_t total)>;

RunRecord run_point(const DistributionSpec& spec, Eigen::Index p, int replicate,
                    const ExperimentConfig& config);
RunRecord run_point(const DistributionModel& model, Eigen::Index p, int replicate,
                    const ExperimentConfig& config);

/// Runs every point on `workers` threads. Each point owns the rng sub-stream
/// keyed by (base_seed, dist id, p, replicate), so the records do not depend
/// on the worker count. Per-point failures are collected, not thrown.
/// `progress` may be invoked from worker threads (serialized).
SweepResult run_sweep(const ExperimentConfig& config, unsigned workers = 1,
                      const ProgressCallback& progress = {});

// ---------------------------------------------------------------------------
// Aggregation and fits

enum class RecordField { L2Bias, Residual1 };

std::string_view field_name(RecordField field);

/// Replicate aggregate for one (distribution, p).
struct PointSummary {
  std::string dist;
  Eigen::Index p = 0;
  int replicates = 0;
  double mean_l2_bias = 0.0;
  double mean_component_dev = 0.0;
  double sd_component_dev = 0.0;  // sample sd across replicates (0 if one)
  double residual = 0.0;          // residual of the replicate-averaged deviation
  double residual_se = 0.0;       // sd_component_dev / sqrt(replicates)
};

/// Distribution ids in order of first appearance.
std::vector<std::string> distribution_ids(std::span<const RunRecord> records);
std::vector<RunRecord> records_for(std::span<const RunRecord> records, const std::string& dist);

/// Groups records of one distribution by p (ascending). The expansion term
/// needed for the averaged residual is recovered from the per-run pairs
/// (component_dev_1, residual_1), which share it.
std::vector<PointSummary> summarize(std::span<const RunRecord> records);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int points_used = 0;
  int excluded_nonpositive = 0;
  int excluded_noise = 0;
};

/// Ordinary least squares of log10(y) on log10(x).
SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y);

/// Log-log slope of a replicate-averaged field against p over p >= p_min.
/// Non-positive values are dropped (counted). For residual_1, points whose
/// averaged residual is below 3 Monte Carlo standard errors are dropped
/// too. Throws FitError with fewer than two usable points.
SlopeFit fit_slope(std::span<const RunRecord> records, RecordField field, Eigen::Index p_min);

/// deviation(p) ~ a/p + b/p^gamma.
struct TwoTermFit {
  double a = 0.0;
  double b = 0.0;
  double gamma = 1.0;
  double residual_norm = 0.0;  // of p * (deviation - model)

  double deviation(double p) const;
  /// Predicted Euclidean bias for an iid model: sqrt(p) * |a/p + b/p^gamma|.
  double l2_curve(double p) const;
};

/// Scans gamma over [0.9, 1.2], solves (a, b) by weighted least squares with
/// weights p for each gamma, then refines gamma by golden-section search.
TwoTermFit fit_two_term(std::span<const double> p, std::span<const double> deviation);
/// Same on replicate-averaged component_dev_1 of one distribution.
TwoTermFit fit_two_term(std::span<const RunRecord> records);

// ---------------------------------------------------------------------------
// CSV persistence

inline constexpr const char* kRecordsHeader =
    "dist,p,replicate,n,l2_bias,component_dev_1,residual_1,wall_time_s";

void write_records(std::span<const RunRecord> records, std::ostream& out);
void write_records(std::span<const RunRecord> records, const std::filesystem::path& path);
std::vector<RunRecord> read_records(std::istream& in);
std::vector<RunRecord> read_records(const std::filesystem::path& path);

}  // namespace gmedian
