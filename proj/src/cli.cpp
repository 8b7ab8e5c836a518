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

#include "gmedian/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "gmedian/chart.hpp"
#include "gmedian/config.hpp"
#include "gmedian/distributions.hpp"
#include "gmedian/error.hpp"
#include "gmedian/experiments.hpp"
#include "gmedian/theory.hpp"

namespace gmedian {
namespace {

std::string fmt(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

struct SharedOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  unsigned workers = 1;
};

ExperimentConfig load_config_or_default(const SharedOptions& opts) {
  ExperimentConfig config =
      opts.config_path.empty() ? ExperimentConfig::defaults() : load_experiment_config(opts.config_path);
  if (opts.seed) config.base_seed = *opts.seed;
  config.validate();
  return config;
}

// A --dist value is either the id of a distribution in --config or an
// inline "kind[:key=value,...]" spec.
DistributionSpec resolve_distribution(const SharedOptions& opts, const std::string& dist) {
  if (!opts.config_path.empty()) {
    const ExperimentConfig config = load_experiment_config(opts.config_path);
    for (const auto& spec : config.distributions) {
      if (spec.id() == dist) return spec;
    }
  }
  return parse_distribution_arg(dist);
}

int cmd_simulate(const SharedOptions& opts, bool omit_timing, bool quiet, bool print_config,
                 std::ostream& out, std::ostream& err) {
  const ExperimentConfig config = load_config_or_default(opts);
  if (print_config) {
    out << format_experiment_config(config);
    return kExitOk;
  }
  const std::string path = opts.out_path.empty() ? "records.csv" : opts.out_path;
  ProgressCallback progress;
  if (!quiet) {
    progress = [&err](const RunRecord& rec, std::size_t done, std::size_t total) {
      err << '[' << done << '/' << total << "] " << rec.dist << " p=" << rec.p
          << " rep=" << rec.replicate << " n=" << rec.n << " l2_bias=" << fmt(rec.l2_bias)
          << " residual_1=" << fmt(rec.residual_1) << " (" << fmt(rec.wall_time_s, 3) << " s)\n";
    };
  }
  SweepResult result = run_sweep(config, opts.workers, progress);
  for (const auto& f : result.failures) {
    err << "warning: " << f.dist << " p=" << f.p << " rep=" << f.replicate
        << " failed: " << f.message << '\n';
  }
  if (omit_timing) {
    for (auto& rec : result.records) rec.wall_time_s = 0.0;
  }
  write_records(result.records, std::filesystem::path(path));
  err << "wrote " << result.records.size() << " records to " << path << '\n';
  return result.failures.empty() ? kExitOk : kExitConfig;
}

int cmd_slopes(const std::string& records_path, Eigen::Index p_min, std::ostream& out,
               std::ostream& err) {
  const auto records = read_records(std::filesystem::path(records_path));
  const auto ids = distribution_ids(records);
  if (ids.empty()) {
    err << "warning: no records in " << records_path << '\n';
    return kExitOk;
  }

  struct Cell {
    std::optional<SlopeFit> fit;
    std::string error;
  };
  std::vector<std::array<Cell, 2>> cells(ids.size());
  const std::array<RecordField, 2> fields = {RecordField::L2Bias, RecordField::Residual1};
  for (std::size_t d = 0; d < ids.size(); ++d) {
    const auto subset = records_for(records, ids[d]);
    for (std::size_t f = 0; f < fields.size(); ++f) {
      try {
        cells[d][f].fit = fit_slope(subset, fields[f], p_min);
      } catch (const FitError& e) {
        cells[d][f].error = e.what();
        err << "warning: " << ids[d] << ": " << e.what() << '\n';
      }
    }
  }

  constexpr int kLabel = 20;
  constexpr int kCol = 16;
  out << "Log-log regression slopes for p >= " << p_min << "\n";
  out << std::left << std::setw(kLabel) << "";
  for (const auto& id : ids) out << std::right << std::setw(kCol) << id;
  out << '\n';
  for (std::size_t f = 0; f < fields.size(); ++f) {
    out << std::left << std::setw(kLabel) << ("slope " + std::string(field_name(fields[f])));
    for (std::size_t d = 0; d < ids.size(); ++d) {
      const auto& cell = cells[d][f];
      out << std::right << std::setw(kCol) << (cell.fit ? fmt(cell.fit->slope, 4) : std::string("n/a"));
    }
    out << '\n';
  }
  out << '\n' << "dist,field,slope,intercept,r_squared,points_used,excluded_nonpositive,excluded_noise\n";
  for (std::size_t d = 0; d < ids.size(); ++d) {
    for (std::size_t f = 0; f < fields.size(); ++f) {
      const auto& cell = cells[d][f];
      out << ids[d] << ',' << field_name(fields[f]) << ',';
      if (cell.fit) {
        out << fmt(cell.fit->slope, 10) << ',' << fmt(cell.fit->intercept, 10) << ','
            << fmt(cell.fit->r_squared, 10) << ',' << cell.fit->points_used << ','
            << cell.fit->excluded_nonpositive << ',' << cell.fit->excluded_noise << '\n';
      } else {
        out << "n/a,n/a,n/a,0,,\n";
      }
    }
  }
  return kExitOk;
}

int cmd_expansion(const SharedOptions& opts, const std::string& dist, Eigen::Index i,
                  const std::vector<Eigen::Index>& p_list, std::ostream& out) {
  const DistributionSpec spec = resolve_distribution(opts, dist);
  Eigen::Index max_p = i;
  for (Eigen::Index p : p_list) max_p = std::max(max_p, p);
  const DistributionModel model = DistributionModel::materialize(spec, max_p);
  // Validate every p before printing anything.
  std::vector<ExpansionPrediction> rows;
  for (Eigen::Index p : p_list) rows.push_back(predicted_component(model, i, p));
  out << "# " << spec.id() << " i=" << i << " M=" << model.dependence_order() << '\n';
  out << "p,mu_i,term,p_times_term,predicted\n";
  for (const auto& row : rows) {
    out << row.p << ',' << fmt(row.mu_i, 12) << ',' << fmt(row.term, 12) << ','
        << fmt(row.term * static_cast<double>(row.p), 12) << ',' << fmt(row.predicted, 12) << '\n';
  }
  return kExitOk;
}

int cmd_check_identity(std::int64_t trials, Eigen::Index p, Eigen::Index dependence,
                       std::uint64_t seed, std::ostream& out) {
  constexpr double kThreshold = 1e-10;
  const IdentityCheck check = check_identity(trials, p, dependence, seed);
  const bool pass = check.max_gap <= kThreshold;
  out << "trials=" << check.trials << " p=" << p << " M=" << dependence
      << " max_relative_gap=" << fmt(check.max_gap, 6) << " threshold=" << fmt(kThreshold) << ' '
      << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? kExitOk : kExitCheck;
}

int cmd_moments(const SharedOptions& opts, const std::string& dist, Eigen::Index i, Eigen::Index j,
                std::int64_t n, std::uint64_t seed, std::ostream& out) {
  const DistributionSpec spec = resolve_distribution(opts, dist);
  const DistributionModel model = DistributionModel::materialize(spec, std::max(i, j));
  const double analytic = model.third_cross_moment(i, j);
  RngStream rng(RngStream::derive_key(seed, spec.id(), static_cast<std::uint64_t>(i),
                                      static_cast<std::uint64_t>(j)));
  const MomentEstimate mc = mc_moment_oracle(model, i, j, n, rng);
  const double z = mc.standard_error > 0.0 ? (mc.value - analytic) / mc.standard_error
                                           : (mc.value == analytic ? 0.0 : INFINITY);
  const bool pass = std::abs(z) <= 4.0;
  out << spec.id() << " i=" << i << " j=" << j << " analytic=" << fmt(analytic, 10)
      << " mc=" << fmt(mc.value, 10) << " se=" << fmt(mc.standard_error, 6) << " z=" << fmt(z, 4)
      << " n=" << mc.n_samples << ' ' << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? kExitOk : kExitCheck;
}

int cmd_report(const std::string& records_path, const std::string& out_dir, std::ostream& out,
               std::ostream& err) {
  const auto records = read_records(std::filesystem::path(records_path));
  const auto ids = distribution_ids(records);
  if (ids.empty()) {
    err << "warning: no records in " << records_path << "; no charts written\n";
    return kExitOk;
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create directory '" + out_dir + "': " + ec.message());

  auto write_file = [&](const std::string& name, const std::string& body) {
    const auto path = std::filesystem::path(out_dir) / name;
    std::ofstream file(path, std::ios::binary);
    if (!file || !(file << body)) throw IoError("cannot write '" + path.string() + "'");
    out << path.string() << '\n';
  };

  for (const auto& id : ids) {
    const auto summary = summarize(records_for(records, id));
    ChartSeries l2{"||m_hat - mu||", "#d6336c", {}, {}, true};
    ChartSeries res{"residual (i=1)", "#1c7ed6", {}, {}, true};
    for (const auto& s : summary) {
      l2.x.push_back(static_cast<double>(s.p));
      l2.y.push_back(s.mean_l2_bias);
      res.x.push_back(static_cast<double>(s.p));
      res.y.push_back(s.residual);
    }
    std::vector<ChartPanel> panels(2);
    panels[0].title = id + ": Euclidean distance";
    panels[0].y_label = "||m_hat - mu||";
    panels[0].series.push_back(l2);
    panels[1].title = id + ": component residual";
    panels[1].y_label = "residual";
    panels[1].series.push_back(res);
    const double x_ref = l2.x.empty() ? 1.0 : l2.x.front();
    const double y_l2 = l2.y.empty() || !(l2.y.front() > 0) ? 1.0 : l2.y.front();
    double y_res = 1.0;
    for (double v : res.y) {
      if (v > 0.0) {
        y_res = v;
        break;
      }
    }
    panels[0].references.push_back({-0.5, x_ref, y_l2, "O(1/sqrt(p))", "#000000"});
    panels[1].references.push_back({-1.0, x_ref, y_res, "O(1/p)", "#000000"});
    write_file(id + ".svg", render_loglog_svg(panels, id));

    if (id == kind_name(DistributionKind::ParetoIid)) {
      try {
        const TwoTermFit fit = fit_two_term(records_for(records, id));
        ChartSeries curve{"f(p) = sqrt(p)|a/p + b/p^g|, a=" + fmt(fit.a, 4) + " b=" + fmt(fit.b, 4) +
                              " g=" + fmt(fit.gamma, 4),
                          "#000000", {}, {}, false};
        for (double p : l2.x) {
          curve.x.push_back(p);
          curve.y.push_back(fit.l2_curve(p));
        }
        ChartSeries wide{"f(p)", "#000000", {}, {}, false};
        for (int k = 0; k <= 60; ++k) {
          const double p = std::pow(10.0, 2.0 + 3.0 * k / 60.0);
          wide.x.push_back(p);
          wide.y.push_back(fit.l2_curve(p));
        }
        std::vector<ChartPanel> overlay(2);
        overlay[0].title = id + ": distance vs two-term fit";
        overlay[0].y_label = "||m_hat - mu||";
        overlay[0].series = {l2, curve};
        overlay[1].title = "f(p) for 1e2 <= p <= 1e5";
        overlay[1].y_label = "f(p)";
        overlay[1].series = {wide};
        overlay[1].references.push_back(
            {-0.5, wide.x.front(), std::max(wide.y.front(), 1e-300), "O(1/sqrt(p))", "#1c7ed6"});
        write_file(id + "_two_term.svg", render_loglog_svg(overlay, id + " two-term fit"));
      } catch (const FitError& e) {
        err << "warning: " << id << ": two-term fit skipped: " << e.what() << '\n';
      }
    }
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Streaming geometric median: bias simulations and numerical checks",
               "gmedian"};
  app.require_subcommand(1);

  SharedOptions opts;
  auto add_shared = [&](CLI::App* cmd) {
    cmd->add_option("--config", opts.config_path, "Experiment config file");
    cmd->add_option("--seed", opts.seed, "Base seed override");
    cmd->add_option("--out", opts.out_path, "Output path");
    cmd->add_option("--workers", opts.workers, "Worker threads")->check(CLI::PositiveNumber);
  };

  bool omit_timing = false;
  bool quiet = false;
  bool print_config = false;
  auto* simulate = app.add_subcommand("simulate", "Run the simulation sweep and write CSV records");
  add_shared(simulate);
  simulate->add_flag("--omit-timing", omit_timing, "Write wall_time_s as 0");
  simulate->add_flag("--quiet", quiet, "No per-point progress");
  simulate->add_flag("--print-config", print_config, "Print the effective config and exit");

  std::string records_path;
  Eigen::Index p_min = 100;
  auto* slopes = app.add_subcommand("slopes", "Fit log-log slopes per distribution");
  add_shared(slopes);
  slopes->add_option("records", records_path, "Records CSV")->required();
  slopes->add_option("--p-min", p_min, "Smallest p in the fit window");

  std::string dist = "indep-exp";
  Eigen::Index index_i = 1;
  Eigen::Index index_j = 1;
  std::vector<Eigen::Index> p_list = {100};
  auto* expansion = app.add_subcommand("expansion", "Predicted median components");
  add_shared(expansion);
  expansion->add_option("--dist", dist, "Distribution id from --config or kind[:key=value,...]");
  expansion->add_option("--i", index_i, "Component index (1-based)");
  expansion->add_option("--p", p_list, "Dimensions")->delimiter(',');

  std::int64_t trials = 1000;
  Eigen::Index dim = 10;
  Eigen::Index dependence = 1;
  std::uint64_t check_seed = 1;
  auto* identity = app.add_subcommand("check-identity", "Randomized check of the exclusion identity");
  add_shared(identity);
  identity->add_option("--trials", trials, "Number of random pairs");
  identity->add_option("--p", dim, "Dimension");
  identity->add_option("--M", dependence, "Dependence order");

  std::int64_t n_samples = 1'000'000;
  auto* moments = app.add_subcommand("moments", "Analytic third cross moment vs Monte Carlo");
  add_shared(moments);
  moments->add_option("--dist", dist, "Distribution id from --config or kind[:key=value,...]");
  moments->add_option("--i", index_i, "First index (1-based)");
  moments->add_option("--j", index_j, "Second index (1-based)");
  moments->add_option("--n", n_samples, "Monte Carlo samples");

  auto* report = app.add_subcommand("report", "Write SVG charts from records");
  add_shared(report);
  report->add_option("records", records_path, "Records CSV")->required();

  std::vector<const char*> argv;
  argv.push_back("gmedian");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(opts, omit_timing, quiet, print_config, out, err);
    if (slopes->parsed()) return cmd_slopes(records_path, p_min, out, err);
    if (expansion->parsed()) return cmd_expansion(opts, dist, index_i, p_list, out);
    if (identity->parsed()) {
      return cmd_check_identity(trials, dim, dependence, opts.seed.value_or(check_seed), out);
    }
    if (moments->parsed()) {
      return cmd_moments(opts, dist, index_i, index_j, n_samples, opts.seed.value_or(check_seed), out);
    }
    if (report->parsed()) {
      return cmd_report(records_path, opts.out_path.empty() ? "charts" : opts.out_path, out, err);
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace gmedian
