#include "cca/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "cca/errors.hpp"
#include "cca/parallel.hpp"
#include "cca/rng.hpp"
#include "cca/theory.hpp"

namespace cca {

Verdict Verdict::at_most(std::string name, double statistic, double threshold) {
  return {std::move(name), statistic, threshold, "<=", statistic <= threshold};
}

Verdict Verdict::below(std::string name, double statistic, double threshold) {
  return {std::move(name), statistic, threshold, "<", statistic < threshold};
}

Verdict Verdict::at_least(std::string name, double statistic,
                          double threshold) {
  return {std::move(name), statistic, threshold, ">=", statistic >= threshold};
}

bool all_pass(const std::vector<Verdict> &verdicts) {
  return std::all_of(verdicts.begin(), verdicts.end(),
                     [](const Verdict &v) { return v.pass; });
}

nlohmann::json verdicts_json(const std::vector<Verdict> &verdicts) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto &v : verdicts) {
    out.push_back({{"name", v.name},
                   {"statistic", v.statistic},
                   {"threshold", v.threshold},
                   {"relation", v.relation},
                   {"pass", v.pass}});
  }
  return out;
}

namespace {

double fraction(std::size_t count, std::size_t total) {
  return total == 0 ? 0.0
                    : static_cast<double>(count) / static_cast<double>(total);
}

} // namespace

// ---------------------------------------------------------------------------

LimitLawReport limit_law_from_samples(std::vector<double> scaled, double p,
                                      const LimitLawSetup &setup) {
  const auto law = LimitLawParams::from_p(p);
  LimitLawReport report;
  report.expected_mean = limit_mean(law);
  const Ecdf ecdf(std::move(scaled));
  report.scaled.assign(ecdf.samples().begin(), ecdf.samples().end());
  report.ks = ks_distance(ecdf, [&](double x) { return limit_cdf(x, law); });
  report.mean = std::accumulate(report.scaled.begin(), report.scaled.end(),
                                0.0) /
                static_cast<double>(report.scaled.size());
  report.verdicts.push_back(
      Verdict::at_most("ks_distance", report.ks, setup.ks_threshold));
  report.verdicts.push_back(Verdict::at_most(
      "mean_relative_error",
      std::abs(report.mean / report.expected_mean - 1.0),
      setup.mean_tolerance));
  return report;
}

LimitLawReport verify_limit_law(const LimitLawSetup &setup) {
  Config1D base;
  base.alpha = 0.0;
  base.p = setup.p;
  base.L = setup.L;
  base.t_max = setup.t;
  base.obs_times = {setup.t};
  base.guard_fraction = setup.guard_fraction;

  EnsembleConfig config;
  config.base = base;
  config.replicas = setup.replicas;
  config.master_seed = setup.seed;
  config.parallelism = setup.parallelism;
  config.validate();

  auto ensemble = run_ensemble(config);
  std::vector<double> scaled;
  scaled.reserve(ensemble.replicas.size());
  const double root_t = std::sqrt(setup.t);
  for (const auto &r : ensemble.replicas) {
    if (!r.error.empty() || r.series.c0_size.empty())
      continue;
    scaled.push_back(static_cast<double>(r.series.c0_size.back()) / root_t);
  }
  if (scaled.empty())
    throw EmptySample();

  auto report = limit_law_from_samples(std::move(scaled), setup.p, setup);
  report.config = config;
  report.contaminated_fraction =
      fraction(ensemble.counts.contaminated, ensemble.replicas.size());
  report.verdicts.push_back(Verdict::below("contaminated_fraction",
                                           report.contaminated_fraction,
                                           setup.max_contamination));
  report.ensemble = std::move(ensemble);
  return report;
}

// ---------------------------------------------------------------------------

ExponentReport exponent_from_ensemble(EnsembleResult ensemble,
                                      const ExponentSetup &setup) {
  ExponentReport report;
  report.expected_slope = growth_exponent(setup.alpha);

  std::vector<const ReplicaResult *> usable;
  for (const auto &r : ensemble.replicas)
    if (r.error.empty() && !r.series.empty && !r.series.times.empty())
      usable.push_back(&r);
  if (usable.empty())
    throw EmptySample();

  report.times = usable.front()->series.times;
  for (const auto *r : usable)
    if (r->series.times != report.times)
      throw SchemaMismatch("replicas disagree on observation times");

  std::vector<std::pair<double, double>> points;
  for (std::size_t k = 0; k < report.times.size(); ++k) {
    std::vector<double> sizes;
    sizes.reserve(usable.size());
    for (const auto *r : usable)
      sizes.push_back(static_cast<double>(r->series.c0_size[k]));
    report.medians.push_back(median(std::move(sizes)));
    points.emplace_back(report.times[k], report.medians.back());
  }
  report.fit = fit_power_law(points);

  ensemble.recount();
  report.contaminated_fraction =
      fraction(ensemble.counts.contaminated, ensemble.replicas.size());
  report.verdicts.push_back(
      Verdict::at_most("slope_abs_error",
                       std::abs(report.fit.slope - report.expected_slope),
                       setup.slope_tolerance));
  report.verdicts.push_back(Verdict::below("contaminated_fraction",
                                           report.contaminated_fraction,
                                           setup.max_contamination));
  report.ensemble = std::move(ensemble);
  return report;
}

ExponentReport verify_exponent(const ExponentSetup &setup) {
  Config1D base;
  base.alpha = setup.alpha;
  base.p = setup.p;
  base.L = setup.L;
  base.obs_times = setup.obs_times;
  base.t_max = setup.obs_times.empty()
                   ? 0.0
                   : *std::max_element(setup.obs_times.begin(),
                                       setup.obs_times.end());
  base.guard_fraction = setup.guard_fraction;

  EnsembleConfig config;
  config.base = base;
  config.replicas = setup.replicas;
  config.master_seed = setup.seed;
  config.parallelism = setup.parallelism;
  config.validate();
  auto ensemble = run_ensemble(config);
  ensemble.config_digest = config_digest(config);
  return exponent_from_ensemble(std::move(ensemble), setup);
}

// ---------------------------------------------------------------------------

TimeChangeReport verify_timechange(const TimeChangeSetup &setup) {
  Config1D config;
  config.alpha = setup.alpha;
  config.p = setup.p;
  config.L = setup.L;
  config.t_max = setup.t_max;
  config.obs_times = {setup.t_max};
  config.guard_fraction = setup.guard_fraction;
  config.log_tagged_steps = true;
  config.validate();

  TimeChangeReport report;
  report.runs.resize(setup.runs);
  parallel_for(setup.runs, setup.parallelism, [&](std::size_t i) {
    auto &out = report.runs[i];
    out.seed = derive_replica_seed(setup.seed, i);
    auto cfg = config;
    cfg.seed = out.seed;
    Rng rng(out.seed);
    auto result = run(cfg, rng);
    const auto intervals = time_change_intervals(
        result.log.value_or(TaggedClusterLog{}), setup.alpha);
    out.intervals = intervals.size();
    if (intervals.empty())
      return;
    out.ks = exp1_ks(intervals);
    out.critical = ks_critical_value(intervals.size(), setup.significance);
    out.pass = out.ks < out.critical;
  });

  for (const auto &r : report.runs) {
    if (r.intervals < setup.min_intervals)
      ++report.short_runs;
    else if (r.pass)
      ++report.passed;
  }
  report.verdicts.push_back(
      Verdict::at_least("runs_passing_ks", static_cast<double>(report.passed),
                        static_cast<double>(setup.min_pass)));
  report.verdicts.push_back(Verdict::at_most(
      "runs_below_min_intervals", static_cast<double>(report.short_runs), 0.0));
  return report;
}

// ---------------------------------------------------------------------------

OracleReport oracle_compare(const OracleSetup &setup) {
  OracleReport report;
  std::uint64_t case_index = 0;
  for (const double p : setup.ps) {
    for (const int m : setup.ms) {
      OracleCase c;
      c.m = m;
      c.p = p;
      const auto engine_seed = derive_replica_seed(setup.seed, 2 * case_index);
      Rng oracle_rng(derive_replica_seed(setup.seed, 2 * case_index + 1));
      c.engine = engine_connection_estimate(m, p, setup.t, setup.L,
                                            setup.engine_replicas, engine_seed,
                                            setup.parallelism);
      c.oracle = difference_walk_oracle(m, p, setup.t, setup.oracle_replicas,
                                        oracle_rng);
      c.difference = std::abs(c.engine.value - c.oracle.value);
      c.combined_std_error = std::hypot(c.engine.std_error, c.oracle.std_error);
      report.verdicts.push_back(Verdict::at_most(
          "m=" + std::to_string(m) + ",p=" + format_real(p), c.difference,
          setup.sigma_factor * c.combined_std_error));
      report.cases.push_back(c);
      ++case_index;
    }
  }
  return report;
}

// ---------------------------------------------------------------------------

BlowupReport blowup_scan(const BlowupSetup &setup) {
  if (setup.sizes.size() < 2)
    throw InvalidConfig("blowup scan needs at least two sizes");
  BlowupReport report;
  report.points = coalescence_scaling(setup.alpha, setup.sizes, setup.replicas,
                                      setup.p, setup.seed, setup.parallelism);
  const double first = report.points.front().median_time;
  const double last = report.points.back().median_time;
  report.ratio = first > 0.0 ? last / first
                             : std::numeric_limits<double>::infinity();
  if (setup.alpha < -2.0)
    report.verdicts.push_back(
        Verdict::at_most("median_time_ratio", report.ratio, setup.max_ratio));
  else
    report.verdicts.push_back(
        Verdict::at_least("median_time_ratio", report.ratio, setup.min_ratio));
  return report;
}

} // namespace cca
