#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cca/ensemble.hpp"
#include "cca/stats.hpp"

namespace cca {

/// Outcome of one check: `statistic` compared against `threshold`.
struct Verdict {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  std::string relation; // "<=", "<" or ">="
  bool pass = false;

  static Verdict at_most(std::string name, double statistic, double threshold);
  static Verdict below(std::string name, double statistic, double threshold);
  static Verdict at_least(std::string name, double statistic,
                          double threshold);
};

bool all_pass(const std::vector<Verdict> &verdicts);
nlohmann::json verdicts_json(const std::vector<Verdict> &verdicts);

// ---------------------------------------------------------------------------
// Scaling law of the tagged cluster at alpha = 0.

struct LimitLawSetup {
  double p = 0.5;
  std::int64_t L = 8192;
  double t = 4096.0;
  std::size_t replicas = 500;
  std::uint64_t seed = 0;
  std::size_t parallelism = 1;
  double guard_fraction = 0.25;
  double ks_threshold = 0.08;
  double mean_tolerance = 0.05;   // relative
  double max_contamination = 0.01; // fraction of replicas, strict
};

struct LimitLawReport {
  EnsembleConfig config;
  EnsembleResult ensemble;
  std::vector<double> scaled; // c0_size / sqrt(t)
  double ks = 0.0;
  double mean = 0.0;
  double expected_mean = 0.0;
  double contaminated_fraction = 0.0;
  std::vector<Verdict> verdicts;
};

LimitLawReport verify_limit_law(const LimitLawSetup &setup);

/// KS and mean checks on already scaled samples.
LimitLawReport limit_law_from_samples(std::vector<double> scaled, double p,
                                      const LimitLawSetup &setup);

// ---------------------------------------------------------------------------
// Growth exponent 1/(alpha + 2) from medians of the tagged cluster size.

struct ExponentSetup {
  double alpha = 0.0;
  double p = 0.5;
  std::int64_t L = 16384;
  std::vector<double> obs_times = {256.0, 1024.0, 4096.0, 16384.0};
  std::size_t replicas = 200;
  std::uint64_t seed = 0;
  std::size_t parallelism = 1;
  double guard_fraction = 0.25;
  double slope_tolerance = 0.07;
  double max_contamination = 0.01;
};

struct ExponentReport {
  EnsembleResult ensemble;
  std::vector<double> times;
  std::vector<double> medians;
  PowerLawFit fit;
  double expected_slope = 0.0;
  double contaminated_fraction = 0.0;
  std::vector<Verdict> verdicts;
};

ExponentReport verify_exponent(const ExponentSetup &setup);

/// Exponent check on an existing ensemble (for example one read from CSV).
ExponentReport exponent_from_ensemble(EnsembleResult ensemble,
                                      const ExponentSetup &setup);

// ---------------------------------------------------------------------------
// Intrinsic-time step intervals of the tagged cluster against Exp(1).

struct TimeChangeSetup {
  double alpha = -1.0;
  double p = 0.5;
  std::int64_t L = 4096;
  double t_max = 1000.0;
  std::size_t runs = 100;
  std::size_t min_intervals = 500;
  std::uint64_t seed = 0;
  std::size_t parallelism = 1;
  double guard_fraction = 0.25;
  double significance = 0.01;
  std::size_t min_pass = 95;
};

struct TimeChangeRun {
  std::uint64_t seed = 0;
  std::size_t intervals = 0;
  double ks = 0.0;
  double critical = 0.0;
  bool pass = false;
};

struct TimeChangeReport {
  std::vector<TimeChangeRun> runs;
  std::size_t passed = 0;
  std::size_t short_runs = 0; // fewer than min_intervals intervals
  std::vector<Verdict> verdicts;
};

TimeChangeReport verify_timechange(const TimeChangeSetup &setup);

// ---------------------------------------------------------------------------
// Full engine against the gap-walk oracle.

struct OracleSetup {
  std::vector<int> ms = {1, 5, 10};
  std::vector<double> ps = {0.3, 0.5};
  double t = 100.0;
  std::int64_t L = 256;
  std::size_t engine_replicas = 10000;
  std::size_t oracle_replicas = 100000;
  std::uint64_t seed = 0;
  std::size_t parallelism = 1;
  double sigma_factor = 3.0;
};

struct OracleCase {
  int m = 0;
  double p = 0.0;
  Estimate engine;
  Estimate oracle;
  double difference = 0.0;
  double combined_std_error = 0.0;
};

struct OracleReport {
  std::vector<OracleCase> cases;
  std::vector<Verdict> verdicts;
};

OracleReport oracle_compare(const OracleSetup &setup);

// ---------------------------------------------------------------------------
// Coalescence time against torus size.

struct BlowupSetup {
  double alpha = -3.0;
  std::vector<std::int64_t> sizes = {512, 4096};
  std::size_t replicas = 50;
  double p = 0.5;
  std::uint64_t seed = 0;
  std::size_t parallelism = 1;
  double max_ratio = 1.5; // applied when alpha < -2
  double min_ratio = 8.0; // applied otherwise
};

struct BlowupReport {
  std::vector<CoalescencePoint> points;
  double ratio = 0.0; // median T(last size) / median T(first size)
  std::vector<Verdict> verdicts;
};

BlowupReport blowup_scan(const BlowupSetup &setup);

} // namespace cca
