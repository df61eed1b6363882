#include "cca/latticed.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "cca/errors.hpp"

namespace cca {

namespace {

template <class E> bool later(const E &a, const E &b) {
  if (a.t != b.t) {
    return a.t > b.t;
  }
  if (a.slot != b.slot) {
    return a.slot > b.slot;
  }
  return a.gen > b.gen;
}

} // namespace

void ConfigD::validate() const {
  if (d < 2) {
    throw InvalidConfig("d must be at least 2");
  }
  if (!(p > 0.0 && p <= 1.0)) {
    throw InvalidConfig("p must lie in (0,1]");
  }
  if (L < 2) {
    throw InvalidConfig("L must be at least 2");
  }
  if (!(t_max >= 0.0) || !std::isfinite(t_max)) {
    throw InvalidConfig("t_max must be a finite nonnegative number");
  }
  if (!std::isfinite(alpha)) {
    throw InvalidConfig("alpha must be finite");
  }
  if (rate_cap && !(*rate_cap > 0.0)) {
    throw InvalidConfig("rate_cap must be positive");
  }
  if (volume() > max_sites) {
    throw InvalidConfig("L^d exceeds the site budget");
  }
  for (std::size_t i = 0; i < obs_times.size(); ++i) {
    if (!(obs_times[i] >= 0.0) || obs_times[i] > t_max) {
      throw InvalidConfig("obs_times must lie in [0, t_max]");
    }
    if (i > 0 && obs_times[i] < obs_times[i - 1]) {
      throw InvalidConfig("obs_times must be sorted ascending");
    }
  }
}

std::int64_t ConfigD::volume() const {
  std::int64_t v = 1;
  for (int k = 0; k < d; ++k) {
    if (v > max_sites) {
      return v;
    }
    v *= L;
  }
  return v;
}

namespace {

// True when the internal edges join all sites of `c` (sites sorted).
bool edges_connect(const ClusterD &c) {
  std::vector<std::size_t> root(c.sites.size());
  for (std::size_t i = 0; i < root.size(); ++i) {
    root[i] = i;
  }
  const auto find = [&](std::size_t i) {
    while (root[i] != i) {
      root[i] = root[root[i]];
      i = root[i];
    }
    return i;
  };
  const auto index = [&](Site u) {
    return static_cast<std::size_t>(
        std::lower_bound(c.sites.begin(), c.sites.end(), u) - c.sites.begin());
  };
  std::size_t components = c.sites.size();
  for (const Edge &e : c.internal_edges) {
    const auto ra = find(index(e.a));
    const auto rb = find(index(e.b));
    if (ra != rb) {
      root[ra] = rb;
      --components;
    }
  }
  return components == 1;
}

} // namespace

WorldD::WorldD(const ConfigD &config)
    : d_(config.d), L_(config.L), alpha_(config.alpha),
      rate_cap_(config.rate_cap) {
  std::int64_t stride = 1;
  for (int k = 0; k < d_; ++k) {
    strides_.push_back(stride);
    stride *= L_;
  }
  occupancy_.assign(static_cast<std::size_t>(stride), -1);
}

WorldD WorldD::create(const ConfigD &config, Rng &rng) {
  config.validate();
  std::vector<Site> occupied;
  const std::int64_t volume = config.volume();
  for (Site s = 0; s < volume; ++s) {
    if (rng.bernoulli(config.p)) {
      occupied.push_back(s);
    }
  }
  return from_sites(config, occupied, rng);
}

WorldD WorldD::from_sites(const ConfigD &config, std::span<const Site> occupied,
                          Rng &rng) {
  config.validate();
  const Site volume = config.volume();
  std::vector<std::uint8_t> open(static_cast<std::size_t>(volume), 0);
  for (const Site s : occupied) {
    if (s < 0 || s >= volume) {
      throw InvalidConfig("site index outside the torus");
    }
    open[static_cast<std::size_t>(s)] = 1;
  }

  // Flood fill nearest-neighbour components in site order.
  const WorldD geometry(config);
  std::vector<std::vector<Site>> groups;
  std::vector<Site> stack;
  for (Site start = 0; start < volume; ++start) {
    if (open[static_cast<std::size_t>(start)] == 0) {
      continue;
    }
    auto &group = groups.emplace_back();
    open[static_cast<std::size_t>(start)] = 0;
    stack.push_back(start);
    while (!stack.empty()) {
      const Site u = stack.back();
      stack.pop_back();
      group.push_back(u);
      for (int axis = 0; axis < config.d; ++axis) {
        for (const int sign : {1, -1}) {
          const Site v = geometry.neighbor(u, {axis, sign});
          if (open[static_cast<std::size_t>(v)] != 0) {
            open[static_cast<std::size_t>(v)] = 0;
            stack.push_back(v);
          }
        }
      }
    }
  }
  return from_clusters(config, groups, rng);
}

WorldD WorldD::from_clusters(const ConfigD &config,
                             std::span<const std::vector<Site>> groups,
                             Rng &rng) {
  config.validate();
  WorldD world(config);
  const auto volume = static_cast<Site>(world.occupancy_.size());
  for (const auto &group : groups) {
    if (group.empty()) {
      throw InvalidConfig("cluster without sites");
    }
    const auto slot = static_cast<std::int32_t>(world.slots_.size());
    Slot fresh;
    fresh.alive = true;
    fresh.cluster.id = world.next_id_++;
    for (const Site u : group) {
      if (u < 0 || u >= volume) {
        throw InvalidConfig("site index outside the torus");
      }
      if (world.occupancy_[static_cast<std::size_t>(u)] != -1) {
        throw InvalidConfig("site assigned to two clusters");
      }
      world.occupancy_[static_cast<std::size_t>(u)] = slot;
    }
    auto &cluster = fresh.cluster;
    cluster.sites = group;
    std::sort(cluster.sites.begin(), cluster.sites.end());
    for (const Site u : cluster.sites) {
      for (int axis = 0; axis < world.d_; ++axis) {
        const Site v = world.neighbor(u, {axis, 1});
        if (world.occupancy_[static_cast<std::size_t>(v)] == slot && v != u) {
          cluster.internal_edges.push_back(Edge::between(u, v));
        }
      }
    }
    std::sort(cluster.internal_edges.begin(), cluster.internal_edges.end());
    cluster.internal_edges.erase(std::unique(cluster.internal_edges.begin(),
                                             cluster.internal_edges.end()),
                                 cluster.internal_edges.end());
    if (!edges_connect(cluster)) {
      throw InvalidConfig("cluster sites are not connected");
    }
    const auto size = static_cast<std::int64_t>(cluster.sites.size());
    cluster.rate = clock_rate(size, world.alpha_, world.rate_cap_);
    world.total_particles_ += size;
    world.max_size_ = std::max(world.max_size_, size);
    world.slots_.push_back(std::move(fresh));
    world.id_to_slot_.push_back(slot);
  }
  world.n_clusters_ = static_cast<std::int64_t>(world.slots_.size());
  world.saturated_ = world.total_particles_ == volume;

  // Particle closest to the origin in torus distance; smaller index on ties.
  std::int64_t best = -1;
  for (Site s = 0; s < volume; ++s) {
    const std::int32_t slot = world.occupancy_[static_cast<std::size_t>(s)];
    if (slot < 0) {
      continue;
    }
    std::int64_t dist2 = 0;
    for (const std::int64_t x : world.coords(s)) {
      const std::int64_t dx = std::min(x, world.L_ - x);
      dist2 += dx * dx;
    }
    if (best < 0 || dist2 < best) {
      best = dist2;
      world.tagged_slot_ = slot;
    }
  }

  if (world.n_clusters_ >= 2) {
    for (std::int32_t s = 0; s < static_cast<std::int32_t>(world.slots_.size());
         ++s) {
      world.schedule(s, rng);
    }
  }
  return world;
}

Site WorldD::site_index(std::span<const std::int64_t> coords) const {
  if (static_cast<int>(coords.size()) != d_) {
    throw InvalidParams("coordinate count must equal d");
  }
  Site s = 0;
  for (int k = 0; k < d_; ++k) {
    std::int64_t x = coords[static_cast<std::size_t>(k)] % L_;
    if (x < 0) {
      x += L_;
    }
    s += x * strides_[static_cast<std::size_t>(k)];
  }
  return s;
}

std::vector<std::int64_t> WorldD::coords(Site s) const {
  std::vector<std::int64_t> out(static_cast<std::size_t>(d_));
  for (int k = 0; k < d_; ++k) {
    out[static_cast<std::size_t>(k)] = s % L_;
    s /= L_;
  }
  return out;
}

Site WorldD::neighbor(Site s, Direction direction) const {
  const std::int64_t stride = strides_[static_cast<std::size_t>(direction.axis)];
  const std::int64_t x = (s / stride) % L_;
  if (direction.sign > 0) {
    return x + 1 == L_ ? s - (L_ - 1) * stride : s + stride;
  }
  return x == 0 ? s + (L_ - 1) * stride : s - stride;
}

std::int32_t WorldD::slot_of(std::int64_t id) const {
  if (id < 0 || id >= static_cast<std::int64_t>(id_to_slot_.size()) ||
      id_to_slot_[static_cast<std::size_t>(id)] < 0) {
    throw Error("unknown or retired cluster id " + std::to_string(id));
  }
  return id_to_slot_[static_cast<std::size_t>(id)];
}

std::int64_t WorldD::cluster_at(Site s) const {
  const std::int32_t slot = occupancy_.at(static_cast<std::size_t>(s));
  return slot < 0 ? -1 : slots_[static_cast<std::size_t>(slot)].cluster.id;
}

const ClusterD &WorldD::cluster(std::int64_t id) const {
  return slots_[static_cast<std::size_t>(slot_of(id))].cluster;
}

std::vector<std::int64_t> WorldD::cluster_ids() const {
  std::vector<std::int64_t> ids;
  for (const auto &slot : slots_) {
    if (slot.alive) {
      ids.push_back(slot.cluster.id);
    }
  }
  return ids;
}

std::map<std::int64_t, std::int64_t> WorldD::size_histogram() const {
  std::map<std::int64_t, std::int64_t> histogram;
  for (const auto &slot : slots_) {
    if (slot.alive) {
      ++histogram[static_cast<std::int64_t>(slot.cluster.sites.size())];
    }
  }
  return histogram;
}

std::int64_t WorldD::tagged_cluster_size() const {
  if (tagged_slot_ < 0) {
    throw EmptyWorld();
  }
  return static_cast<std::int64_t>(
      slots_[static_cast<std::size_t>(tagged_slot_)].cluster.sites.size());
}

std::int64_t WorldD::tagged_id() const {
  if (tagged_slot_ < 0) {
    throw EmptyWorld();
  }
  return slots_[static_cast<std::size_t>(tagged_slot_)].cluster.id;
}

void WorldD::schedule(std::int32_t slot, Rng &rng) {
  const auto &c = slots_[static_cast<std::size_t>(slot)].cluster;
  heap_.push_back({now_ + rng.exponential(c.rate), slot, c.gen});
  std::push_heap(heap_.begin(), heap_.end(), later<Event>);
}

bool WorldD::is_live(const Event &e) const {
  const auto &slot = slots_[static_cast<std::size_t>(e.slot)];
  return slot.alive && slot.cluster.gen == e.gen;
}

std::vector<CandidateEdge>
WorldD::candidate_block_edges(std::int64_t mover_id,
                              Direction direction) const {
  const std::int32_t s = slot_of(mover_id);
  std::vector<CandidateEdge> out;
  for (const Site u : slots_[static_cast<std::size_t>(s)].cluster.sites) {
    const Site v = neighbor(u, direction);
    const std::int32_t owner = occupancy_[static_cast<std::size_t>(v)];
    if (owner >= 0 && owner != s) {
      out.push_back(
          {u, v, slots_[static_cast<std::size_t>(owner)].cluster.id});
    }
  }
  if (out.empty()) {
    throw NotBlocked("move of cluster " + std::to_string(mover_id) +
                     " is not blocked");
  }
  return out;
}

std::int32_t WorldD::merge_slots(std::int32_t a, std::int32_t b,
                                 Edge contact) {
  if (slots_[static_cast<std::size_t>(a)].cluster.sites.size() <
      slots_[static_cast<std::size_t>(b)].cluster.sites.size()) {
    std::swap(a, b);
  }
  auto &keep = slots_[static_cast<std::size_t>(a)];
  auto &gone = slots_[static_cast<std::size_t>(b)];
  for (const Site u : gone.cluster.sites) {
    occupancy_[static_cast<std::size_t>(u)] = a;
  }
  keep.cluster.sites.insert(keep.cluster.sites.end(),
                            gone.cluster.sites.begin(),
                            gone.cluster.sites.end());
  keep.cluster.internal_edges.insert(keep.cluster.internal_edges.end(),
                                     gone.cluster.internal_edges.begin(),
                                     gone.cluster.internal_edges.end());
  keep.cluster.internal_edges.push_back(contact);

  id_to_slot_[static_cast<std::size_t>(keep.cluster.id)] = -1;
  id_to_slot_[static_cast<std::size_t>(gone.cluster.id)] = -1;
  keep.cluster.id = next_id_++;
  id_to_slot_.push_back(a);
  keep.cluster.gen = std::max(keep.cluster.gen, gone.cluster.gen) + 1;
  const auto size = static_cast<std::int64_t>(keep.cluster.sites.size());
  keep.cluster.rate = clock_rate(size, alpha_, rate_cap_);

  gone.alive = false;
  gone.cluster.sites = {};
  gone.cluster.internal_edges = {};
  if (tagged_slot_ == b) {
    tagged_slot_ = a;
  }
  --n_clusters_;
  max_size_ = std::max(max_size_, size);
  return a;
}

MoveReport WorldD::attempt_move(std::int64_t mover_id, Rng &rng) {
  const auto k = static_cast<int>(rng.below(2 * static_cast<std::uint64_t>(d_)));
  return apply_move(mover_id, {k / 2, k % 2 == 0 ? 1 : -1}, rng);
}

MoveReport WorldD::apply_move(std::int64_t mover_id, Direction direction,
                              Rng &rng) {
  const std::int32_t s = slot_of(mover_id);
  MoveReport report;
  report.mover_id = mover_id;
  report.direction = direction;
  report.time = now_;

  auto &cluster = slots_[static_cast<std::size_t>(s)].cluster;
  bool blocked = false;
  for (const Site u : cluster.sites) {
    const std::int32_t owner =
        occupancy_[static_cast<std::size_t>(neighbor(u, direction))];
    if (owner >= 0 && owner != s) {
      blocked = true;
      break;
    }
  }

  std::int32_t result = s;
  if (!blocked) {
    for (const Site u : cluster.sites) {
      occupancy_[static_cast<std::size_t>(u)] = -1;
    }
    for (Site &u : cluster.sites) {
      u = neighbor(u, direction);
      occupancy_[static_cast<std::size_t>(u)] = s;
    }
    for (Edge &e : cluster.internal_edges) {
      e = Edge::between(neighbor(e.a, direction), neighbor(e.b, direction));
    }
    report.moved = true;
  } else {
    const auto candidates = candidate_block_edges(mover_id, direction);
    const auto &chosen = candidates[rng.below(candidates.size())];
    report.merged = true;
    report.blocker_id = chosen.blocker_id;
    report.new_edge = Edge::between(chosen.from, chosen.to);
    result = merge_slots(s, slot_of(chosen.blocker_id), report.new_edge);
  }
  report.result_id = slots_[static_cast<std::size_t>(result)].cluster.id;
  if (n_clusters_ >= 2) {
    // A fresh generation retires whatever event the cluster still had queued.
    if (!report.merged) {
      ++slots_[static_cast<std::size_t>(result)].cluster.gen;
    }
    schedule(result, rng);
  }
  return report;
}

std::optional<MoveReport> WorldD::step(Rng &rng) {
  if (heap_.empty()) {
    return std::nullopt;
  }
  std::pop_heap(heap_.begin(), heap_.end(), later<Event>);
  const Event e = heap_.back();
  heap_.pop_back();
  if (!is_live(e)) {
    MoveReport stale;
    stale.stale = true;
    stale.time = now_;
    return stale;
  }
  now_ = std::max(now_, e.t);
  return attempt_move(slots_[static_cast<std::size_t>(e.slot)].cluster.id,
                      rng);
}

std::optional<double> WorldD::next_event_time() {
  while (!heap_.empty() && !is_live(heap_.front())) {
    std::pop_heap(heap_.begin(), heap_.end(), later<Event>);
    heap_.pop_back();
  }
  if (heap_.empty()) {
    return std::nullopt;
  }
  return heap_.front().t;
}

bool WorldD::check_invariants() const {
  std::int64_t total = 0;
  std::int64_t alive = 0;
  std::vector<std::int32_t> seen(occupancy_.size(), -1);
  for (std::int32_t s = 0; s < static_cast<std::int32_t>(slots_.size()); ++s) {
    const auto &slot = slots_[static_cast<std::size_t>(s)];
    if (!slot.alive) {
      continue;
    }
    ++alive;
    const auto &c = slot.cluster;
    if (c.sites.empty()) {
      return false;
    }
    total += static_cast<std::int64_t>(c.sites.size());
    for (const Site u : c.sites) {
      if (seen[static_cast<std::size_t>(u)] != -1 ||
          occupancy_[static_cast<std::size_t>(u)] != s) {
        return false;
      }
      seen[static_cast<std::size_t>(u)] = s;
    }
    // Edges join lattice neighbours of this cluster; they connect it.
    std::map<Site, std::size_t> index;
    for (std::size_t i = 0; i < c.sites.size(); ++i) {
      index[c.sites[i]] = i;
    }
    std::vector<std::size_t> root(c.sites.size());
    for (std::size_t i = 0; i < root.size(); ++i) {
      root[i] = i;
    }
    const auto find = [&](std::size_t i) {
      while (root[i] != i) {
        root[i] = root[root[i]];
        i = root[i];
      }
      return i;
    };
    std::size_t components = c.sites.size();
    for (const Edge &e : c.internal_edges) {
      if (seen[static_cast<std::size_t>(e.a)] != s ||
          seen[static_cast<std::size_t>(e.b)] != s) {
        return false;
      }
      bool adjacent = false;
      for (int axis = 0; axis < d_ && !adjacent; ++axis) {
        adjacent = neighbor(e.a, {axis, 1}) == e.b ||
                   neighbor(e.a, {axis, -1}) == e.b;
      }
      if (!adjacent) {
        return false;
      }
      const auto ra = find(index.at(e.a));
      const auto rb = find(index.at(e.b));
      if (ra != rb) {
        root[ra] = rb;
        --components;
      }
    }
    if (components != 1) {
      return false;
    }
    const double expected = clock_rate(static_cast<std::int64_t>(c.sites.size()),
                                       alpha_, rate_cap_);
    if (std::abs(c.rate - expected) > 1e-12 * expected) {
      return false;
    }
    if (n_clusters_ >= 2) {
      const auto live =
          std::count_if(heap_.begin(), heap_.end(), [&](const Event &e) {
            return e.slot == s && is_live(e);
          });
      if (live != 1) {
        return false;
      }
    }
  }
  for (std::size_t u = 0; u < occupancy_.size(); ++u) {
    if (occupancy_[u] >= 0 && seen[u] != occupancy_[u]) {
      return false;
    }
  }
  return alive == n_clusters_ && total == total_particles_;
}

namespace {

SnapshotD snapshot_of(const WorldD &world, double t) {
  SnapshotD snap;
  snap.t = t;
  for (const std::int64_t id : world.cluster_ids()) {
    for (const Site s : world.cluster(id).sites) {
      snap.sites.push_back(s);
    }
  }
  std::sort(snap.sites.begin(), snap.sites.end());
  for (const Site s : snap.sites) {
    snap.cluster_ids.push_back(world.cluster_at(s));
  }
  return snap;
}

} // namespace

RunDResult run_d(const ConfigD &config, Rng &rng) {
  config.validate();
  auto world = WorldD::create(config, rng);
  RunDResult result;
  auto &series = result.series;
  series.empty = world.empty();
  series.saturated = world.saturated();

  const auto advance_to = [&](double horizon) {
    for (;;) {
      const auto next = world.next_event_time();
      if (!next || *next > horizon) {
        return;
      }
      world.step(rng);
    }
  };
  for (const double t : config.obs_times) {
    advance_to(t);
    series.times.push_back(t);
    if (world.empty()) {
      series.c0_size.push_back(0);
      series.n_clusters.push_back(0);
      series.max_size.push_back(0);
    } else {
      series.c0_size.push_back(world.tagged_cluster_size());
      series.n_clusters.push_back(world.n_clusters());
      series.max_size.push_back(world.max_size());
    }
    result.size_histograms.push_back(world.size_histogram());
    if (config.snapshots) {
      result.snapshots.push_back(snapshot_of(world, t));
    }
  }
  advance_to(config.t_max);
  return result;
}

void write_snapshot_csv(const SnapshotD &snapshot, int d, std::int64_t L,
                        const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot open " + path.string() + " for writing");
  }
  for (int k = 1; k <= d; ++k) {
    out << 'x' << k << ',';
  }
  out << "cluster_id\n";
  for (std::size_t i = 0; i < snapshot.sites.size(); ++i) {
    Site s = snapshot.sites[i];
    for (int k = 0; k < d; ++k) {
      out << s % L << ',';
      s /= L;
    }
    out << snapshot.cluster_ids[i] << '\n';
  }
  if (!out) {
    throw Error("failed writing " + path.string());
  }
}

} // namespace cca
