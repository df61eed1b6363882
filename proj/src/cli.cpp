#include "cca/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cca/ensemble.hpp"
#include "cca/theory.hpp"

namespace cca::cli {

namespace {

using nlohmann::json;

std::vector<std::string> split_list(const std::string &text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ','))
    out.push_back(item);
  return out;
}

template <class T> T parse_number(const std::string &text, const char *flag) {
  T value{};
  const auto *end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw UsageError(std::string("invalid value '") + text + "' for --" + flag);
  return value;
}

template <class T>
std::vector<T> parse_list(const std::string &text, const char *flag) {
  std::vector<T> out;
  for (const auto &item : split_list(text))
    out.push_back(parse_number<T>(item, flag));
  if (out.empty())
    throw UsageError(std::string("--") + flag + " needs at least one value");
  return out;
}

// Raw text of list flags, parsed after CLI11 is done.
struct ListArgs {
  std::string obs_times;
  std::string sizes;
  std::string ms;
  std::string ps;
  std::string rate_cap;
  std::string config;
};

struct Builder {
  CLI::App app{"Cluster-cluster aggregation simulator and verification "
               "harness",
               "cca"};
  Command cmd;
  ListArgs lists;

  Builder() {
    app.require_subcommand(1, 1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    add_simulate();
    add_ensemble();
    add_limit_law();
    add_exponent();
    add_timechange();
    add_oracle();
    add_blowup();
    add_simulate_2d();
  }

  CLI::App *sub(const std::string &name, const std::string &description) {
    auto *s = app.add_subcommand(name, description);
    s->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    s->add_option("--config", lists.config,
                  "JSON file of flag values; explicit flags take precedence");
    s->add_option("--out", cmd.out, "Output directory")->capture_default_str();
    return s;
  }

  static void seed(CLI::App *s, std::uint64_t &target, bool required = true) {
    auto *o = s->add_option("--seed", target,
                            "Master seed (unsigned 64-bit; required)");
    if (required)
      o->required();
  }

  static void parallelism(CLI::App *s, std::size_t &target) {
    s->add_option("--parallelism", target, "Concurrent replicas (threads)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  }

  void model_1d(CLI::App *s, Config1D &c) {
    s->add_option("--alpha", c.alpha,
                  "Mobility exponent: a cluster of size s moves at rate "
                  "s^-alpha")
        ->capture_default_str();
    s->add_option("--p", c.p, "Initial site density, in (0,1]")
        ->capture_default_str();
    s->add_option("--L", c.L, "Torus circumference (sites)")
        ->capture_default_str();
    s->add_option("--t-max", c.t_max, "Final time (model time units)")
        ->capture_default_str();
    s->add_option("--obs-times", lists.obs_times,
                  "Comma list of observation times (model time units); "
                  "default: t-max only");
    s->add_option("--rate-cap", lists.rate_cap,
                  "Upper bound on cluster clock rates (1/time); default: "
                  "none");
    s->add_option("--guard-fraction", c.guard_fraction,
                  "Stop a replica once its largest cluster exceeds this "
                  "fraction of L")
        ->capture_default_str();
  }

  void add_simulate() {
    auto *s = sub("simulate", "Run one replica in one dimension");
    auto &c = cmd.config1d;
    c.L = 1024;
    c.t_max = 100.0;
    model_1d(s, c);
    seed(s, c.seed);
    s->add_flag("--log-steps", c.log_tagged_steps,
                "Also write the tagged cluster's step log (tagged_steps.csv)");
  }

  void add_ensemble() {
    auto *s = sub("ensemble", "Run independent replicas in one dimension");
    auto &c = cmd.config1d;
    model_1d(s, c);
    seed(s, c.seed);
    s->add_option("--replicas", cmd.replicas, "Number of replicas")
        ->capture_default_str();
    parallelism(s, cmd.parallelism);
  }

  void add_limit_law() {
    auto *s = sub("verify-limit-law",
                  "Compare c0_size/sqrt(t) at alpha = 0 with the limit law");
    auto &c = cmd.limit_law;
    s->add_option("--p", c.p, "Initial site density, in (0,1)")
        ->capture_default_str();
    s->add_option("--L", c.L, "Torus circumference (sites)")
        ->capture_default_str();
    s->add_option("--t-max", c.t, "Observation time (model time units)")
        ->capture_default_str();
    s->add_option("--replicas", c.replicas, "Number of replicas")
        ->capture_default_str();
    s->add_option("--guard-fraction", c.guard_fraction,
                  "Contamination guard as a fraction of L")
        ->capture_default_str();
    seed(s, c.seed);
    parallelism(s, c.parallelism);
    s->add_option("--ks-threshold", c.ks_threshold,
                  "Largest accepted KS distance")
        ->capture_default_str();
    s->add_option("--mean-tolerance", c.mean_tolerance,
                  "Largest accepted relative error of the mean")
        ->capture_default_str();
    s->add_option("--max-contamination", c.max_contamination,
                  "Contaminated fraction of replicas must stay below this")
        ->capture_default_str();
  }

  void add_exponent() {
    auto *s = sub("verify-exponent",
                  "Fit the growth exponent of the median tagged cluster size");
    auto &c = cmd.exponent;
    s->add_option("--alpha", c.alpha, "Mobility exponent (> -2)")->required();
    s->add_option("--p", c.p, "Initial site density, in (0,1]")
        ->capture_default_str();
    s->add_option("--L", c.L, "Torus circumference (sites)")
        ->capture_default_str();
    s->add_option("--obs-times", lists.obs_times,
                  "Comma list of observation times (model time units); "
                  "default: 256,1024,4096,16384");
    s->add_option("--replicas", c.replicas, "Number of replicas")
        ->capture_default_str();
    s->add_option("--guard-fraction", c.guard_fraction,
                  "Contamination guard as a fraction of L")
        ->capture_default_str();
    seed(s, c.seed, false);
    parallelism(s, c.parallelism);
    s->add_option("--from-csv", cmd.from_csv,
                  "Fit an existing ensemble CSV instead of simulating");
    s->add_option("--slope-tolerance", c.slope_tolerance,
                  "Largest accepted |slope - 1/(alpha+2)|")
        ->capture_default_str();
    s->add_option("--max-contamination", c.max_contamination,
                  "Contaminated fraction of replicas must stay below this")
        ->capture_default_str();
  }

  void add_timechange() {
    auto *s = sub("verify-timechange",
                  "KS test of the tagged cluster's intrinsic-time step "
                  "intervals against Exp(1)");
    auto &c = cmd.timechange;
    s->add_option("--alpha", c.alpha, "Mobility exponent")
        ->capture_default_str();
    s->add_option("--p", c.p, "Initial site density, in (0,1]")
        ->capture_default_str();
    s->add_option("--L", c.L, "Torus circumference (sites)")
        ->capture_default_str();
    s->add_option("--t-max", c.t_max, "Length of each run (model time units)")
        ->capture_default_str();
    s->add_option("--replicas", c.runs, "Number of independent runs")
        ->capture_default_str();
    s->add_option("--guard-fraction", c.guard_fraction,
                  "Contamination guard as a fraction of L")
        ->capture_default_str();
    seed(s, c.seed);
    parallelism(s, c.parallelism);
    s->add_option("--min-intervals", c.min_intervals,
                  "Intervals every run must produce")
        ->capture_default_str();
    s->add_option("--significance", c.significance, "KS significance level")
        ->capture_default_str();
    s->add_option("--min-pass", c.min_pass, "Runs that must pass the KS test")
        ->capture_default_str();
  }

  void add_oracle() {
    auto *s = sub("oracle-compare",
                  "Connection probability of particles 0 and m at alpha = 0: "
                  "engine against the gap-walk oracle");
    auto &c = cmd.oracle;
    lists.ms = "1,5,10";
    lists.ps = "0.3,0.5";
    s->add_option("--m", lists.ms, "Comma list of particle offsets")
        ->capture_default_str();
    s->add_option("--p", lists.ps, "Comma list of site densities, in (0,1)")
        ->capture_default_str();
    s->add_option("--t-max", c.t, "Time horizon (model time units)")
        ->capture_default_str();
    s->add_option("--L", c.L, "Engine torus circumference (sites)")
        ->capture_default_str();
    s->add_option("--replicas", c.engine_replicas, "Engine replicas per case")
        ->capture_default_str();
    s->add_option("--oracle-replicas", c.oracle_replicas,
                  "Oracle replicas per case")
        ->capture_default_str();
    seed(s, c.seed);
    parallelism(s, c.parallelism);
    s->add_option("--sigma-factor", c.sigma_factor,
                  "Accepted difference in combined standard errors")
        ->capture_default_str();
  }

  void add_blowup() {
    auto *s = sub("blowup-scan",
                  "Median full-coalescence time against torus size");
    auto &c = cmd.blowup;
    lists.sizes = "512,4096";
    s->add_option("--alpha", c.alpha, "Mobility exponent")
        ->capture_default_str();
    s->add_option("--sizes", lists.sizes, "Comma list of torus sizes (sites)")
        ->capture_default_str();
    s->add_option("--p", c.p, "Initial site density, in (0,1]")
        ->capture_default_str();
    s->add_option("--replicas", c.replicas, "Replicas per size")
        ->capture_default_str();
    seed(s, c.seed);
    parallelism(s, c.parallelism);
    s->add_option("--max-ratio", c.max_ratio,
                  "Largest accepted T(last)/T(first) when alpha < -2")
        ->capture_default_str();
    s->add_option("--min-ratio", c.min_ratio,
                  "Smallest accepted T(last)/T(first) when alpha >= -2")
        ->capture_default_str();
  }

  void add_simulate_2d() {
    auto *s = sub("simulate-2d", "Run one replica on a d-dimensional torus");
    auto &c = cmd.configd;
    c.t_max = 100.0;
    s->add_option("--d", c.d, "Dimension (>= 2)")->capture_default_str();
    s->add_option("--alpha", c.alpha, "Mobility exponent")
        ->capture_default_str();
    s->add_option("--p", c.p, "Initial site density, in (0,1]")
        ->capture_default_str();
    s->add_option("--L", c.L, "Side length (sites)")->capture_default_str();
    s->add_option("--t-max", c.t_max, "Final time (model time units)")
        ->capture_default_str();
    s->add_option("--obs-times", lists.obs_times,
                  "Comma list of observation times (model time units); "
                  "default: t-max only");
    s->add_option("--rate-cap", lists.rate_cap,
                  "Upper bound on cluster clock rates (1/time); default: "
                  "none");
    seed(s, c.seed);
    s->add_flag("--snapshots", c.snapshots,
                "Write snapshot_<k>.csv at each observation time");
  }
};

// Turns the JSON config into flags placed before the explicit ones, so that
// the explicit flags (parsed later, last value wins) take precedence.
std::vector<std::string> config_args(const std::filesystem::path &path,
                                     const CLI::App &sub) {
  std::ifstream in(path);
  if (!in)
    throw UsageError("cannot open config file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception &e) {
    throw UsageError("config file " + path.string() + ": " + e.what());
  }
  if (!doc.is_object())
    throw UsageError("config file must hold a JSON object");

  std::vector<std::string> out;
  for (const auto &[raw_key, value] : doc.items()) {
    std::string key = raw_key;
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "config")
      throw UsageError("config files cannot include other config files");
    const auto *opt = sub.get_option_no_throw("--" + key);
    if (opt == nullptr)
      throw UsageError("unknown config key '" + raw_key + "' for " +
                       sub.get_name());
    const std::string flag = "--" + key;
    if (opt->get_expected_min() == 0) {
      if (!value.is_boolean())
        throw UsageError("config key '" + raw_key + "' must be a boolean");
      if (value.get<bool>())
        out.push_back(flag);
      continue;
    }
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_number()) {
      text = value.is_number_float() ? format_real(value.get<double>())
                                     : value.dump();
    } else if (value.is_array()) {
      for (std::size_t i = 0; i < value.size(); ++i) {
        const auto &item = value[i];
        if (!item.is_number())
          throw UsageError("config key '" + raw_key +
                           "' must hold numbers only");
        text += (i ? "," : "") + (item.is_number_float()
                                      ? format_real(item.get<double>())
                                      : item.dump());
      }
    } else {
      throw UsageError("config key '" + raw_key + "' has an unsupported type");
    }
    out.push_back(flag);
    out.push_back(text);
  }
  return out;
}

std::optional<std::filesystem::path>
find_config(const std::vector<std::string> &args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0)
      return args[i].substr(9);
  }
  return std::nullopt;
}

void finish(Command &cmd, const ListArgs &lists) {
  const auto &name = cmd.name;
  std::optional<double> rate_cap;
  if (!lists.rate_cap.empty())
    rate_cap = parse_number<double>(lists.rate_cap, "rate-cap");

  try {
    if (name == "simulate" || name == "ensemble") {
      auto &c = cmd.config1d;
      c.rate_cap = rate_cap;
      c.obs_times = lists.obs_times.empty()
                        ? std::vector<double>{c.t_max}
                        : parse_list<double>(lists.obs_times, "obs-times");
      c.validate();
      if (name == "ensemble") {
        EnsembleConfig e;
        e.base = c;
        e.replicas = cmd.replicas;
        e.master_seed = c.seed;
        e.parallelism = cmd.parallelism;
        e.validate();
      }
    } else if (name == "simulate-2d") {
      auto &c = cmd.configd;
      c.rate_cap = rate_cap;
      c.obs_times = lists.obs_times.empty()
                        ? std::vector<double>{c.t_max}
                        : parse_list<double>(lists.obs_times, "obs-times");
      c.validate();
    } else if (name == "verify-limit-law") {
      auto &c = cmd.limit_law;
      Config1D probe;
      probe.p = c.p;
      probe.L = c.L;
      probe.t_max = c.t;
      probe.obs_times = {c.t};
      probe.guard_fraction = c.guard_fraction;
      probe.validate();
      LimitLawParams::from_p(c.p);
      if (c.replicas < 1)
        throw UsageError("replicas must be at least 1");
    } else if (name == "verify-exponent") {
      auto &c = cmd.exponent;
      growth_exponent(c.alpha);
      if (!lists.obs_times.empty())
        c.obs_times = parse_list<double>(lists.obs_times, "obs-times");
      if (!cmd.from_csv) {
        Config1D probe;
        probe.alpha = c.alpha;
        probe.p = c.p;
        probe.L = c.L;
        probe.obs_times = c.obs_times;
        probe.t_max = c.obs_times.back();
        probe.guard_fraction = c.guard_fraction;
        probe.validate();
        if (c.replicas < 1)
          throw UsageError("replicas must be at least 1");
      }
    } else if (name == "verify-timechange") {
      auto &c = cmd.timechange;
      Config1D probe;
      probe.alpha = c.alpha;
      probe.p = c.p;
      probe.L = c.L;
      probe.t_max = c.t_max;
      probe.guard_fraction = c.guard_fraction;
      probe.validate();
      if (!(c.significance > 0.0 && c.significance < 1.0))
        throw UsageError("significance must lie in (0,1)");
    } else if (name == "oracle-compare") {
      auto &c = cmd.oracle;
      c.ms = parse_list<int>(lists.ms, "m");
      c.ps = parse_list<double>(lists.ps, "p");
      for (const int m : c.ms)
        if (m < 1)
          throw UsageError("m must be at least 1");
      for (const double p : c.ps)
        LimitLawParams::from_p(p);
      if (!(c.t >= 0.0))
        throw UsageError("t-max must be nonnegative");
      if (c.L < 2)
        throw UsageError("L must be at least 2");
    } else if (name == "blowup-scan") {
      auto &c = cmd.blowup;
      c.sizes = parse_list<std::int64_t>(lists.sizes, "sizes");
      if (c.sizes.size() < 2)
        throw UsageError("--sizes needs at least two values");
      Config1D probe;
      probe.alpha = c.alpha;
      probe.p = c.p;
      for (const auto L : c.sizes) {
        probe.L = L;
        probe.validate();
      }
    }
  } catch (const InvalidConfig &e) {
    throw UsageError(e.what());
  } catch (const InvalidParams &e) {
    throw UsageError(e.what());
  }
}

void write_json(const json &doc, const std::filesystem::path &path) {
  std::ofstream out(path);
  out << doc.dump(2) << '\n';
  out.flush();
  if (!out)
    throw Error("failed writing " + path.string());
}

void write_text(const std::string &text, const std::filesystem::path &path) {
  std::ofstream out(path);
  out << text;
  out.flush();
  if (!out)
    throw Error("failed writing " + path.string());
}

int report_verdicts(const std::string &command,
                    const std::vector<Verdict> &verdicts, json params,
                    json details, const std::filesystem::path &out,
                    std::ostream &log) {
  const bool pass = all_pass(verdicts);
  json doc = {{"command", command},
              {"pass", pass},
              {"params", std::move(params)},
              {"verdicts", verdicts_json(verdicts)},
              {"details", std::move(details)}};
  write_json(doc, out / "verdict.json");
  for (const auto &v : verdicts)
    log << (v.pass ? "PASS " : "FAIL ") << v.name << ": " << v.statistic
        << ' ' << v.relation << ' ' << v.threshold << '\n';
  return pass ? 0 : 1;
}

std::string tagged_steps_csv(const TaggedClusterLog &log) {
  std::string out = "step_index,time,size_before,size_after,kind\n";
  for (std::size_t i = 0; i < log.entries.size(); ++i) {
    const auto &e = log.entries[i];
    out += std::to_string(i) + ',' + format_real(e.t) + ',' +
           std::to_string(e.size_before) + ',' +
           std::to_string(e.size_after) + ',' +
           (e.kind == TaggedEventKind::Move ? "move" : "merge") + '\n';
  }
  return out;
}

int run_simulate(const Command &cmd, std::ostream &log) {
  const auto &c = cmd.config1d;
  Rng rng(c.seed);
  auto result = run(c, rng);
  EnsembleResult single;
  single.replicas.push_back({0, c.seed, result.series, {}});
  single.recount();
  write_csv(single, cmd.out / "series.csv");
  if (result.log)
    write_text(tagged_steps_csv(*result.log), cmd.out / "tagged_steps.csv");
  log << "final c0_size " << result.series.c0_size.back() << ", clusters "
      << result.series.n_clusters.back() << '\n';
  return 0;
}

int run_ensemble_cmd(const Command &cmd, std::ostream &log) {
  EnsembleConfig e;
  e.base = cmd.config1d;
  e.replicas = cmd.replicas;
  e.master_seed = cmd.config1d.seed;
  e.parallelism = cmd.parallelism;
  auto result = run_ensemble(e);
  write_csv(result, cmd.out / "ensemble.csv");
  write_json(summary_json(e, result), cmd.out / "summary.json");
  log << result.replicas.size() << " replicas, digest "
      << result.config_digest << '\n';
  return result.counts.failed == 0 ? 0 : 2;
}

int run_limit_law(const Command &cmd, std::ostream &log) {
  const auto &c = cmd.limit_law;
  auto report = verify_limit_law(c);
  write_csv(report.ensemble, cmd.out / "ensemble.csv");
  write_json(summary_json(report.config, report.ensemble),
             cmd.out / "summary.json");
  const json params = {{"alpha", 0.0}, {"p", c.p},
                       {"L", c.L},     {"t", c.t},
                       {"replicas", c.replicas}, {"seed", c.seed}};
  const json details = {{"ks", report.ks},
                        {"mean", report.mean},
                        {"expected_mean", report.expected_mean},
                        {"samples", report.scaled.size()},
                        {"contaminated_fraction",
                         report.contaminated_fraction}};
  return report_verdicts(cmd.name, report.verdicts, params, details, cmd.out,
                         log);
}

int run_exponent(const Command &cmd, std::ostream &log) {
  const auto &c = cmd.exponent;
  ExponentReport report;
  json params = {{"alpha", c.alpha}, {"p", c.p}};
  if (cmd.from_csv) {
    report = exponent_from_ensemble(read_csv(*cmd.from_csv), c);
    params["from_csv"] = cmd.from_csv->string();
  } else {
    report = verify_exponent(c);
    write_csv(report.ensemble, cmd.out / "ensemble.csv");
    params.update({{"L", c.L},
                   {"obs_times", c.obs_times},
                   {"replicas", c.replicas},
                   {"seed", c.seed}});
  }
  std::string growth = "t,median_c0_size\n";
  for (std::size_t k = 0; k < report.times.size(); ++k)
    growth += format_real(report.times[k]) + ',' +
              format_real(report.medians[k]) + '\n';
  write_text(growth, cmd.out / "growth.csv");
  const json details = {{"slope", report.fit.slope},
                        {"intercept", report.fit.intercept},
                        {"r2", report.fit.r2},
                        {"expected_slope", report.expected_slope},
                        {"times", report.times},
                        {"medians", report.medians},
                        {"contaminated_fraction",
                         report.contaminated_fraction}};
  return report_verdicts(cmd.name, report.verdicts, params, details, cmd.out,
                         log);
}

int run_timechange(const Command &cmd, std::ostream &log) {
  const auto &c = cmd.timechange;
  auto report = verify_timechange(c);
  std::string table = "run,seed,intervals,ks,critical,pass\n";
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    const auto &r = report.runs[i];
    table += std::to_string(i) + ',' + std::to_string(r.seed) + ',' +
             std::to_string(r.intervals) + ',' + format_real(r.ks) + ',' +
             format_real(r.critical) + ',' + (r.pass ? "1" : "0") + '\n';
  }
  write_text(table, cmd.out / "timechange.csv");
  const json params = {{"alpha", c.alpha}, {"p", c.p},
                       {"L", c.L},         {"t_max", c.t_max},
                       {"runs", c.runs},   {"seed", c.seed}};
  const json details = {{"passed", report.passed},
                        {"short_runs", report.short_runs}};
  return report_verdicts(cmd.name, report.verdicts, params, details, cmd.out,
                         log);
}

int run_oracle(const Command &cmd, std::ostream &log) {
  const auto &c = cmd.oracle;
  auto report = oracle_compare(c);
  std::string table = "m,p,engine,engine_se,oracle,oracle_se,difference,"
                      "combined_se\n";
  for (const auto &k : report.cases)
    table += std::to_string(k.m) + ',' + format_real(k.p) + ',' +
             format_real(k.engine.value) + ',' +
             format_real(k.engine.std_error) + ',' +
             format_real(k.oracle.value) + ',' +
             format_real(k.oracle.std_error) + ',' +
             format_real(k.difference) + ',' +
             format_real(k.combined_std_error) + '\n';
  write_text(table, cmd.out / "oracle.csv");
  const json params = {{"alpha", 0.0},
                       {"m", c.ms},
                       {"p", c.ps},
                       {"t", c.t},
                       {"L", c.L},
                       {"engine_replicas", c.engine_replicas},
                       {"oracle_replicas", c.oracle_replicas},
                       {"seed", c.seed}};
  return report_verdicts(cmd.name, report.verdicts, params, json::object(),
                         cmd.out, log);
}

int run_blowup(const Command &cmd, std::ostream &log) {
  const auto &c = cmd.blowup;
  auto report = blowup_scan(c);
  std::string table = "L,replica,time\n";
  json medians = json::array();
  for (const auto &pt : report.points) {
    for (std::size_t i = 0; i < pt.times.size(); ++i)
      table += std::to_string(pt.L) + ',' + std::to_string(i) + ',' +
               format_real(pt.times[i]) + '\n';
    medians.push_back({{"L", pt.L}, {"median_time", pt.median_time}});
  }
  write_text(table, cmd.out / "blowup.csv");
  const json params = {{"alpha", c.alpha}, {"p", c.p},
                       {"sizes", c.sizes}, {"replicas", c.replicas},
                       {"seed", c.seed}};
  const json details = {{"ratio", report.ratio}, {"medians", medians}};
  return report_verdicts(cmd.name, report.verdicts, params, details, cmd.out,
                         log);
}

int run_simulate_2d(const Command &cmd, std::ostream &log) {
  const auto &c = cmd.configd;
  Rng rng(c.seed);
  auto result = run_d(c, rng);
  const auto &s = result.series;
  std::string series = "t,c0_size,n_clusters,max_size\n";
  for (std::size_t k = 0; k < s.times.size(); ++k)
    series += format_real(s.times[k]) + ',' + std::to_string(s.c0_size[k]) +
              ',' + std::to_string(s.n_clusters[k]) + ',' +
              std::to_string(s.max_size[k]) + '\n';
  write_text(series, cmd.out / "series_2d.csv");
  std::string hist = "t,size,count\n";
  for (std::size_t k = 0; k < result.size_histograms.size(); ++k)
    for (const auto &[size, count] : result.size_histograms[k])
      hist += format_real(s.times[k]) + ',' + std::to_string(size) + ',' +
              std::to_string(count) + '\n';
  write_text(hist, cmd.out / "histograms_2d.csv");
  for (std::size_t k = 0; k < result.snapshots.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%03zu.csv", k);
    write_snapshot_csv(result.snapshots[k], c.d, c.L, cmd.out / name);
  }
  log << "final clusters " << s.n_clusters.back() << '\n';
  return 0;
}

} // namespace

Command parse(const std::vector<std::string> &input) {
  std::vector<std::string> args = input;
  if (!args.empty()) {
    if (const auto path = find_config(args)) {
      Builder probe;
      const auto *sub = probe.app.get_subcommand_no_throw(args.front());
      if (sub == nullptr)
        throw UsageError("unknown subcommand '" + args.front() + "'");
      auto extra = config_args(*path, *sub);
      args.insert(args.begin() + 1, extra.begin(), extra.end());
    }
  }

  Builder b;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    b.app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    auto *sub = b.app.get_subcommands().empty() ? nullptr
                                                : b.app.get_subcommands()[0];
    throw HelpRequested(sub ? sub->help() : b.app.help());
  } catch (const CLI::CallForAllHelp &) {
    throw HelpRequested(b.app.help("", CLI::AppFormatMode::All));
  } catch (const CLI::ParseError &e) {
    throw UsageError(e.what());
  }
  const auto *sub = b.app.get_subcommands().front();
  b.cmd.name = sub->get_name();
  if (b.cmd.name == "verify-exponent" && !b.cmd.from_csv &&
      sub->count("--seed") == 0)
    throw UsageError("--seed is required unless --from-csv is given");
  finish(b.cmd, b.lists);
  return b.cmd;
}

int dispatch(const Command &cmd, std::ostream &log) {
  std::filesystem::create_directories(cmd.out);
  if (cmd.name == "simulate")
    return run_simulate(cmd, log);
  if (cmd.name == "ensemble")
    return run_ensemble_cmd(cmd, log);
  if (cmd.name == "verify-limit-law")
    return run_limit_law(cmd, log);
  if (cmd.name == "verify-exponent")
    return run_exponent(cmd, log);
  if (cmd.name == "verify-timechange")
    return run_timechange(cmd, log);
  if (cmd.name == "oracle-compare")
    return run_oracle(cmd, log);
  if (cmd.name == "blowup-scan")
    return run_blowup(cmd, log);
  if (cmd.name == "simulate-2d")
    return run_simulate_2d(cmd, log);
  throw UsageError("unknown subcommand '" + cmd.name + "'");
}

int main(int argc, const char *const *argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    const auto cmd = parse(args);
    return dispatch(cmd, std::cout);
  } catch (const HelpRequested &help) {
    std::cout << help.what();
    return 0;
  } catch (const UsageError &e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

} // namespace cca::cli
