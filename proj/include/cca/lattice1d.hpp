#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cca/rng.hpp"

namespace cca {

/// Parameters of a one-dimensional run on a torus of circumference `L`.
struct Config1D {
  double alpha = 0.0;
  double p = 0.5;
  std::int64_t L = 1024;
  double t_max = 0.0;
  std::vector<double> obs_times;
  std::uint64_t seed = 0;
  double guard_fraction = 0.25;
  std::optional<double> rate_cap;
  bool log_tagged_steps = false;

  /// Throws InvalidConfig naming the first violated constraint.
  void validate() const;
};

/// Clock rate of a cluster of `size` sites: size^-alpha, capped at
/// `rate_cap` when one is set.
double clock_rate(std::int64_t size, double alpha,
                  std::optional<double> rate_cap);

struct Cluster1D {
  std::int64_t id = 0;
  std::uint64_t gen = 0;
  std::int64_t left = 0; // leftmost occupied site, in [0, L)
  std::int64_t size = 0;
  double rate = 0.0;
};

/// Pending clock ring. Stale when `gen` no longer matches the cluster slot.
struct Event {
  double t = 0.0;
  std::int32_t slot = 0;
  std::uint64_t gen = 0;
};

struct StepReport {
  bool stale = false;
  std::int64_t cluster_id = -1; // cluster whose clock rang; -1 when stale
  int direction = 0;            // -1 left, +1 right
  bool merged = false;
  double time = 0.0;
};

enum class TaggedEventKind { Move, Merge };

/// One event touching the tagged cluster. `Move` is a ring of the tagged
/// cluster's own clock (size grows if the move ends in a merge); `Merge` is
/// a neighbour stepping into it.
struct TaggedStep {
  double t = 0.0;
  std::int64_t size_before = 0;
  std::int64_t size_after = 0;
  TaggedEventKind kind = TaggedEventKind::Move;
};

struct TaggedClusterLog {
  std::vector<TaggedStep> entries;
};

struct ObservationSeries {
  std::vector<double> times;
  std::vector<std::int64_t> c0_size;
  std::vector<std::int64_t> n_clusters;
  std::vector<std::int64_t> max_size;
  bool contaminated = false;
  bool saturated = false;
  bool empty = false;                 // no occupied site at t = 0
  bool numerically_coalesced = false; // clock stopped advancing

  friend bool operator==(const ObservationSeries &,
                         const ObservationSeries &) = default;
};

/// Event-driven state of the one-dimensional model.
///
/// Clusters are intervals kept in a doubly linked ring over a slot pool.
/// Slots are recycled only through merges: the left member of a merge keeps
/// its slot and the right member's slot is retired. Each live slot has
/// exactly one pending event carrying the slot's current generation; events
/// left behind by a merge are discarded lazily when popped.
class World1D {
public:
  /// Samples the Bernoulli(p) occupancy from `rng` and builds the world.
  static World1D create(const Config1D &config, Rng &rng);

  /// Builds the world from a fixed occupancy vector of length `config.L`
  /// (non-zero entries are occupied). Clocks are drawn from `rng`.
  static World1D from_occupancy(const Config1D &config,
                                std::span<const std::uint8_t> occupancy,
                                Rng &rng);

  /// Pops the next event and applies it. Returns nullopt once no event is
  /// pending (one cluster left, saturated or empty world).
  std::optional<StepReport> step(Rng &rng);

  /// Moves cluster `id` by `direction` (+1 or -1) at the current time,
  /// merging on contact, and schedules a fresh clock for the result.
  /// Does not consume the cluster's pending event; `step` pops it first.
  StepReport move_cluster(std::int64_t id, int direction, Rng &rng);

  /// Merges two clusters whose gap is 0, `a` immediately left of `b`.
  /// Throws NotAdjacent otherwise.
  Cluster1D merge_clusters(std::int64_t a, std::int64_t b);

  /// Time of the earliest live event, discarding stale ones on the way.
  std::optional<double> next_event_time();

  std::int64_t tagged_cluster_size() const;
  std::int64_t tagged_id() const;
  const Cluster1D &cluster(std::int64_t id) const;
  /// Clusters in ring order starting from the one with the smallest `left`.
  std::vector<Cluster1D> clusters() const;
  /// Empty sites between cluster `id` and its right neighbour.
  std::int64_t gap_right(std::int64_t id) const;

  /// True when particles with initial ranks `a` and `b` share a cluster.
  /// Ranks number the time-0 particles by site, starting at site 0.
  bool same_cluster(std::int64_t rank_a, std::int64_t rank_b) const;

  double now() const { return now_; }
  std::int64_t length() const { return L_; }
  std::int64_t n_clusters() const { return n_clusters_; }
  std::int64_t max_size() const { return max_size_; }
  std::int64_t total_particles() const { return total_particles_; }
  bool saturated() const { return saturated_; }
  bool empty() const { return n_clusters_ == 0; }
  bool numerically_coalesced() const { return numerically_coalesced_; }

  void enable_tagged_log() { log_.emplace(); }
  const std::optional<TaggedClusterLog> &tagged_log() const { return log_; }
  std::optional<TaggedClusterLog> take_tagged_log() { return std::move(log_); }

  /// Checks gap >= 1 between ring neighbours, conservation of particles and
  /// one live event per live cluster. Returns false on the first violation.
  bool check_invariants() const;

private:
  struct Slot {
    Cluster1D cluster;
    std::int64_t first_rank = 0; // initial rank of the leftmost particle
    std::int32_t prev = -1;
    std::int32_t next = -1;
    bool alive = false;
  };

  explicit World1D(const Config1D &config);

  std::int32_t slot_of(std::int64_t id) const;
  std::int64_t gap_between(const Slot &left, const Slot &right) const;
  std::int32_t merge_slots(std::int32_t a, std::int32_t b);
  StepReport apply_move(std::int32_t slot, int direction,
                        double clock_uniform);
  void schedule(std::int32_t slot, double uniform);
  void push_event(const Event &e);
  void pop_event();
  void sift_up(std::size_t i);
  void sift_down(std::size_t i);
  bool is_live(const Event &e) const;
  void record_tagged(double t, std::int64_t before, std::int64_t after,
                     TaggedEventKind kind);

  std::int64_t L_ = 0;
  double alpha_ = 0.0;
  std::optional<double> rate_cap_;
  std::vector<Slot> slots_;
  std::vector<Event> heap_;
  std::vector<std::int32_t> id_to_slot_; // indexed by cluster id; -1 retired
  std::int64_t next_id_ = 0;
  double now_ = 0.0;
  std::int32_t tagged_slot_ = -1;
  std::int64_t n_clusters_ = 0;
  std::int64_t max_size_ = 0;
  std::int64_t total_particles_ = 0;
  bool saturated_ = false;
  bool numerically_coalesced_ = false;
  int stalled_steps_ = 0;
  bool replace_top_ = false;
  std::optional<TaggedClusterLog> log_;
};

struct RunResult {
  ObservationSeries series;
  std::optional<TaggedClusterLog> log;
};

/// Runs one replica: samples observables at each observation time (state
/// after every event at or before that time) and stops at `t_max`, when the
/// largest cluster exceeds `guard_fraction * L`, or when the clock stalls.
RunResult run(const Config1D &config, Rng &rng);

/// Same as `run` starting from a prepared world.
RunResult run(const Config1D &config, World1D world, Rng &rng);

/// Runs until a single cluster remains and returns the time at which that
/// happened. Saturated and empty worlds return 0; a stalled clock returns
/// the stall time. `config.t_max`, observation times and the guard are
/// ignored.
double run_to_coalescence(const Config1D &config, Rng &rng);

} // namespace cca
