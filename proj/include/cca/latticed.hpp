#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "cca/lattice1d.hpp"
#include "cca/rng.hpp"

namespace cca {

/// Parameters of a run on the d-dimensional torus (Z/LZ)^d, d >= 2.
struct ConfigD {
  int d = 2;
  double alpha = 1.0;
  double p = 0.1;
  std::int64_t L = 64;
  double t_max = 0.0;
  std::vector<double> obs_times;
  std::uint64_t seed = 0;
  std::optional<double> rate_cap;
  std::int64_t max_sites = std::int64_t{1} << 24; // memory budget on L^d
  bool snapshots = false;

  void validate() const;
  std::int64_t volume() const;
};

/// Flattened torus coordinate: sum_k x_k L^k.
using Site = std::int64_t;

/// Unordered lattice edge, stored with a < b.
struct Edge {
  Site a = 0;
  Site b = 0;

  static Edge between(Site u, Site v) { return u < v ? Edge{u, v} : Edge{v, u}; }
  friend auto operator<=>(const Edge &, const Edge &) = default;
};

struct Direction {
  int axis = 0;
  int sign = 1; // +1 or -1
};

struct ClusterD {
  std::int64_t id = 0;
  std::uint64_t gen = 0;
  double rate = 0.0;
  std::vector<Site> sites;
  std::vector<Edge> internal_edges;
};

/// A contact that inhibits a move: `from` belongs to the mover, `to` to the
/// cluster `blocker_id`.
struct CandidateEdge {
  Site from = 0;
  Site to = 0;
  std::int64_t blocker_id = 0;
};

struct MoveReport {
  bool stale = false;
  std::int64_t mover_id = -1;
  Direction direction;
  bool moved = false;
  bool merged = false;
  std::int64_t blocker_id = -1;
  Edge new_edge;
  std::int64_t result_id = -1; // id of the mover after the attempt
  double time = 0.0;
};

/// Event-driven state of the d >= 2 model: an occupancy array (site ->
/// cluster slot) plus a cluster table and a lazily tombstoned event heap.
class WorldD {
public:
  static WorldD create(const ConfigD &config, Rng &rng);

  /// Builds the world from an explicit list of occupied sites.
  static WorldD from_sites(const ConfigD &config,
                           std::span<const Site> occupied, Rng &rng);

  /// Builds the world from explicit clusters. Each group must be
  /// nearest-neighbour connected; its internal edges are all lattice edges
  /// between its sites. Groups may touch each other.
  static WorldD from_clusters(const ConfigD &config,
                              std::span<const std::vector<Site>> groups,
                              Rng &rng);

  /// Inhibiting contacts of a move of `mover_id` by `direction`.
  /// Throws NotBlocked when the translated footprint is free.
  std::vector<CandidateEdge> candidate_block_edges(std::int64_t mover_id,
                                                   Direction direction) const;

  /// Clock ring of `mover_id` with a uniformly drawn direction.
  MoveReport attempt_move(std::int64_t mover_id, Rng &rng);

  /// Clock ring of `mover_id` in a given direction. A blocked move merges
  /// with the owner of one uniformly chosen inhibiting contact; the mover
  /// stays in place. Schedules a fresh clock for the resulting cluster.
  MoveReport apply_move(std::int64_t mover_id, Direction direction, Rng &rng);

  std::optional<MoveReport> step(Rng &rng);
  std::optional<double> next_event_time();

  Site site_index(std::span<const std::int64_t> coords) const;
  std::vector<std::int64_t> coords(Site s) const;
  Site neighbor(Site s, Direction direction) const;

  /// Cluster id owning `s`, or -1 when vacant.
  std::int64_t cluster_at(Site s) const;
  const ClusterD &cluster(std::int64_t id) const;
  std::vector<std::int64_t> cluster_ids() const;

  /// Number of clusters of each size.
  std::map<std::int64_t, std::int64_t> size_histogram() const;

  std::int64_t tagged_cluster_size() const;
  std::int64_t tagged_id() const;

  int dimension() const { return d_; }
  std::int64_t side() const { return L_; }
  double now() const { return now_; }
  std::int64_t n_clusters() const { return n_clusters_; }
  std::int64_t max_size() const { return max_size_; }
  std::int64_t total_particles() const { return total_particles_; }
  bool saturated() const { return saturated_; }
  bool empty() const { return n_clusters_ == 0; }

  /// Occupancy/cluster cross-consistency, edge validity, connectivity of
  /// each cluster through its internal edges and one live event per
  /// cluster.
  bool check_invariants() const;

private:
  struct Slot {
    ClusterD cluster;
    bool alive = false;
  };
  struct Event {
    double t = 0.0;
    std::int32_t slot = 0;
    std::uint64_t gen = 0;
  };

  explicit WorldD(const ConfigD &config);

  std::int32_t slot_of(std::int64_t id) const;
  void schedule(std::int32_t slot, Rng &rng);
  bool is_live(const Event &e) const;
  std::int32_t merge_slots(std::int32_t a, std::int32_t b, Edge contact);

  int d_ = 2;
  std::int64_t L_ = 0;
  double alpha_ = 0.0;
  std::optional<double> rate_cap_;
  std::vector<std::int64_t> strides_;
  std::vector<std::int32_t> occupancy_; // slot per site, -1 vacant
  std::vector<Slot> slots_;
  std::vector<Event> heap_;
  std::vector<std::int32_t> id_to_slot_;
  std::int64_t next_id_ = 0;
  double now_ = 0.0;
  std::int32_t tagged_slot_ = -1;
  std::int64_t n_clusters_ = 0;
  std::int64_t max_size_ = 0;
  std::int64_t total_particles_ = 0;
  bool saturated_ = false;
};

/// Occupied sites and their cluster ids at one observation time.
struct SnapshotD {
  double t = 0.0;
  std::vector<Site> sites;
  std::vector<std::int64_t> cluster_ids;
};

struct RunDResult {
  ObservationSeries series;
  std::vector<std::map<std::int64_t, std::int64_t>> size_histograms;
  std::vector<SnapshotD> snapshots;
};

/// Event loop as in one dimension, recording cluster counts and size
/// distributions at each observation time (and snapshots when enabled).
RunDResult run_d(const ConfigD &config, Rng &rng);

/// Writes one snapshot as CSV rows `x1,...,xd,cluster_id`.
void write_snapshot_csv(const SnapshotD &snapshot, int d, std::int64_t L,
                        const std::filesystem::path &path);

} // namespace cca
