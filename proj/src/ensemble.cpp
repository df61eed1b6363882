#include "cca/ensemble.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "cca/errors.hpp"
#include "cca/parallel.hpp"

namespace cca {

namespace {

const std::vector<std::string> kColumns = {
    "replica",    "seed",     "t",     "c0_size", "n_clusters",
    "max_size",   "contaminated", "saturated"};

nlohmann::json optional_json(const std::optional<double> &x) {
  return x ? nlohmann::json(*x) : nlohmann::json(nullptr);
}

nlohmann::json base_json(const Config1D &c) {
  return {{"model", "1d"},
          {"alpha", c.alpha},
          {"p", c.p},
          {"L", c.L},
          {"t_max", c.t_max},
          {"obs_times", c.obs_times},
          {"guard_fraction", c.guard_fraction},
          {"rate_cap", optional_json(c.rate_cap)}};
}

nlohmann::json base_json(const ConfigD &c) {
  return {{"model", "d"},
          {"d", c.d},
          {"alpha", c.alpha},
          {"p", c.p},
          {"L", c.L},
          {"t_max", c.t_max},
          {"obs_times", c.obs_times},
          {"rate_cap", optional_json(c.rate_cap)}};
}

ObservationSeries run_replica(const Config1D &base, std::uint64_t seed) {
  Config1D config = base;
  config.seed = seed;
  config.log_tagged_steps = false;
  Rng rng(seed);
  return run(config, rng).series;
}

ObservationSeries run_replica(const ConfigD &base, std::uint64_t seed) {
  ConfigD config = base;
  config.seed = seed;
  config.snapshots = false;
  Rng rng(seed);
  return run_d(config, rng).series;
}

template <class T> T parse_number(const std::string &field,
                                  const std::string &column) {
  T value{};
  const auto *first = field.data();
  const auto *last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw SchemaMismatch("malformed value '" + field + "' in column " +
                         column);
  }
  return value;
}

} // namespace

void EnsembleConfig::validate() const {
  if (replicas < 1) {
    throw InvalidConfig("replicas must be at least 1");
  }
  if (parallelism < 1) {
    throw InvalidConfig("parallelism must be at least 1");
  }
  std::visit([](const auto &c) { c.validate(); }, base);
}

void EnsembleResult::recount() {
  counts = {};
  for (const auto &r : replicas) {
    counts.contaminated += r.series.contaminated ? 1 : 0;
    counts.saturated += r.series.saturated ? 1 : 0;
    counts.empty += r.series.empty ? 1 : 0;
    counts.numerically_coalesced += r.series.numerically_coalesced ? 1 : 0;
    counts.failed += r.error.empty() ? 0 : 1;
  }
}

nlohmann::json config_json(const EnsembleConfig &config) {
  return {{"base", std::visit([](const auto &c) { return base_json(c); },
                              config.base)},
          {"replicas", config.replicas},
          {"master_seed", config.master_seed}};
}

std::string config_digest(const EnsembleConfig &config) {
  const std::string text = config_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

EnsembleResult run_ensemble(const EnsembleConfig &config) {
  config.validate();
  EnsembleResult result;
  result.config_digest = config_digest(config);
  result.replicas.resize(config.replicas);
  parallel_for(config.replicas, config.parallelism, [&](std::size_t i) {
    auto &replica = result.replicas[i];
    replica.index = i;
    replica.seed = derive_replica_seed(config.master_seed, i);
    try {
      replica.series = std::visit(
          [&](const auto &base) { return run_replica(base, replica.seed); },
          config.base);
    } catch (const Error &e) {
      replica.error = e.what();
    }
  });
  result.recount();
  return result;
}

std::string format_real(double x) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, x);
  return std::string(buffer, ptr);
}

std::string to_csv(const EnsembleResult &result) {
  std::string out;
  for (std::size_t k = 0; k < kColumns.size(); ++k) {
    out += (k == 0 ? "" : ",") + kColumns[k];
  }
  out += '\n';
  for (const auto &r : result.replicas) {
    const auto &s = r.series;
    for (std::size_t i = 0; i < s.times.size(); ++i) {
      out += std::to_string(r.index) + ',' + std::to_string(r.seed) + ',' +
             format_real(s.times[i]) + ',' + std::to_string(s.c0_size[i]) +
             ',' + std::to_string(s.n_clusters[i]) + ',' +
             std::to_string(s.max_size[i]) + ',' +
             (s.contaminated ? "1" : "0") + ',' + (s.saturated ? "1" : "0") +
             '\n';
    }
  }
  return out;
}

void write_csv(const EnsembleResult &result,
               const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot open " + path.string() + " for writing");
  }
  out << to_csv(result);
  if (!out) {
    throw Error("failed writing " + path.string());
  }
}

EnsembleResult from_csv(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw SchemaMismatch("missing header");
  }
  const auto split = [](const std::string &row) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream fs(row);
    while (std::getline(fs, field, ',')) {
      fields.push_back(field);
    }
    if (!row.empty() && row.back() == ',') {
      fields.emplace_back();
    }
    return fields;
  };
  const auto header = split(line);
  std::vector<std::size_t> position;
  for (const auto &name : kColumns) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw SchemaMismatch("missing column " + name);
    }
    position.push_back(static_cast<std::size_t>(it - header.begin()));
  }

  EnsembleResult result;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw SchemaMismatch("row has " + std::to_string(fields.size()) +
                           " fields, header has " +
                           std::to_string(header.size()));
    }
    const auto field = [&](std::size_t column) -> const std::string & {
      return fields[position[column]];
    };
    const auto index = parse_number<std::size_t>(field(0), kColumns[0]);
    if (result.replicas.empty() || result.replicas.back().index != index) {
      ReplicaResult replica;
      replica.index = index;
      replica.seed = parse_number<std::uint64_t>(field(1), kColumns[1]);
      result.replicas.push_back(std::move(replica));
    }
    auto &s = result.replicas.back().series;
    s.times.push_back(parse_number<double>(field(2), kColumns[2]));
    s.c0_size.push_back(parse_number<std::int64_t>(field(3), kColumns[3]));
    s.n_clusters.push_back(parse_number<std::int64_t>(field(4), kColumns[4]));
    s.max_size.push_back(parse_number<std::int64_t>(field(5), kColumns[5]));
    s.contaminated = parse_number<int>(field(6), kColumns[6]) != 0;
    s.saturated = parse_number<int>(field(7), kColumns[7]) != 0;
  }
  for (auto &r : result.replicas) {
    auto &s = r.series;
    s.empty = std::all_of(s.n_clusters.begin(), s.n_clusters.end(),
                          [](std::int64_t n) { return n == 0; });
  }
  result.recount();
  return result;
}

EnsembleResult read_csv(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open " + path.string());
  }
  std::ostringstream text;
  text << in.rdbuf();
  return from_csv(text.str());
}

nlohmann::json summary_json(const EnsembleConfig &config,
                            const EnsembleResult &result) {
  return {{"config", config_json(config)},
          {"digest", result.config_digest},
          {"replicas", result.replicas.size()},
          {"counts",
           {{"contaminated", result.counts.contaminated},
            {"saturated", result.counts.saturated},
            {"empty", result.counts.empty},
            {"numerically_coalesced", result.counts.numerically_coalesced},
            {"failed", result.counts.failed}}}};
}

} // namespace cca
