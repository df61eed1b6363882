#include "cca/lattice1d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cca/errors.hpp"

namespace cca {

namespace {

// Inter-event gaps below this count as "the clock did not advance".
constexpr double kMinAdvance = 1e-15;
// Consecutive non-advancing events before a replica is declared coalesced.
constexpr int kStallLimit = 64;

bool later(const Event &a, const Event &b) {
  if (a.t != b.t) {
    return a.t > b.t;
  }
  if (a.slot != b.slot) {
    return a.slot > b.slot;
  }
  return a.gen > b.gen;
}

std::int64_t wrap(std::int64_t x, std::int64_t L) {
  x %= L;
  return x < 0 ? x + L : x;
}

} // namespace

void Config1D::validate() const {
  if (!(p > 0.0 && p <= 1.0)) {
    throw InvalidConfig("p must lie in (0,1]");
  }
  if (L < 2) {
    throw InvalidConfig("L must be at least 2");
  }
  if (!(t_max >= 0.0) || !std::isfinite(t_max)) {
    throw InvalidConfig("t_max must be a finite nonnegative number");
  }
  if (!(guard_fraction > 0.0 && guard_fraction <= 1.0)) {
    throw InvalidConfig("guard_fraction must lie in (0,1]");
  }
  if (!std::isfinite(alpha)) {
    throw InvalidConfig("alpha must be finite");
  }
  if (rate_cap && !(*rate_cap > 0.0)) {
    throw InvalidConfig("rate_cap must be positive");
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

double clock_rate(std::int64_t size, double alpha,
                  std::optional<double> rate_cap) {
  const double rate = std::pow(static_cast<double>(size), -alpha);
  return rate_cap ? std::min(rate, *rate_cap) : rate;
}

World1D::World1D(const Config1D &config)
    : L_(config.L), alpha_(config.alpha), rate_cap_(config.rate_cap) {}

World1D World1D::create(const Config1D &config, Rng &rng) {
  config.validate();
  std::vector<std::uint8_t> occupancy(static_cast<std::size_t>(config.L));
  for (auto &site : occupancy) {
    site = rng.bernoulli(config.p) ? 1 : 0;
  }
  return from_occupancy(config, occupancy, rng);
}

World1D World1D::from_occupancy(const Config1D &config,
                                std::span<const std::uint8_t> occupancy,
                                Rng &rng) {
  config.validate();
  if (static_cast<std::int64_t>(occupancy.size()) != config.L) {
    throw InvalidConfig("occupancy length must equal L");
  }
  World1D world(config);
  const std::int64_t L = config.L;
  const auto occupied = [&](std::int64_t x) {
    return occupancy[static_cast<std::size_t>(wrap(x, L))] != 0;
  };

  std::vector<std::int64_t> rank_of(static_cast<std::size_t>(L), -1);
  for (std::int64_t x = 0; x < L; ++x) {
    if (occupied(x)) {
      rank_of[static_cast<std::size_t>(x)] = world.total_particles_++;
    }
  }
  if (world.total_particles_ == 0) {
    return world;
  }

  std::vector<std::int32_t> owner(static_cast<std::size_t>(L), -1);
  if (world.total_particles_ == L) {
    world.saturated_ = true;
    Slot slot;
    slot.cluster = {world.next_id_++, 0, 0, L, clock_rate(L, world.alpha_,
                                                          world.rate_cap_)};
    slot.prev = slot.next = 0;
    slot.alive = true;
    world.slots_.push_back(slot);
    world.id_to_slot_.push_back(0);
    std::fill(owner.begin(), owner.end(), 0);
  } else {
    std::int64_t start = 0;
    while (occupied(start)) {
      ++start;
    }
    // Scan one full turn from the empty site `start`, collecting runs.
    for (std::int64_t i = 1; i <= L; ++i) {
      const std::int64_t x = wrap(start + i, L);
      if (!occupied(x)) {
        continue;
      }
      if (occupied(x - 1)) {
        owner[static_cast<std::size_t>(x)] = owner[static_cast<std::size_t>(
            wrap(x - 1, L))];
        ++world.slots_.back().cluster.size;
        continue;
      }
      const auto index = static_cast<std::int32_t>(world.slots_.size());
      Slot slot;
      slot.cluster.id = world.next_id_++;
      slot.cluster.left = x;
      slot.cluster.size = 1;
      slot.first_rank = rank_of[static_cast<std::size_t>(x)];
      slot.alive = true;
      world.slots_.push_back(slot);
      world.id_to_slot_.push_back(index);
      owner[static_cast<std::size_t>(x)] = index;
    }
    const auto n = static_cast<std::int32_t>(world.slots_.size());
    for (std::int32_t s = 0; s < n; ++s) {
      auto &slot = world.slots_[static_cast<std::size_t>(s)];
      slot.prev = (s + n - 1) % n;
      slot.next = (s + 1) % n;
      slot.cluster.rate =
          clock_rate(slot.cluster.size, world.alpha_, world.rate_cap_);
    }
  }

  world.n_clusters_ = static_cast<std::int64_t>(world.slots_.size());
  for (const auto &slot : world.slots_) {
    world.max_size_ = std::max(world.max_size_, slot.cluster.size);
  }

  // Particle closest to site 0; +k wins a tie with -k.
  for (std::int64_t k = 0; k <= L / 2; ++k) {
    if (occupied(k)) {
      world.tagged_slot_ = owner[static_cast<std::size_t>(k)];
      break;
    }
    if (occupied(-k)) {
      world.tagged_slot_ = owner[static_cast<std::size_t>(wrap(-k, L))];
      break;
    }
  }

  if (world.n_clusters_ >= 2) {
    for (std::int32_t s = 0; s < static_cast<std::int32_t>(world.slots_.size());
         ++s) {
      world.schedule(s, rng.uniform());
    }
  }
  return world;
}

std::int32_t World1D::slot_of(std::int64_t id) const {
  if (id < 0 || id >= static_cast<std::int64_t>(id_to_slot_.size()) ||
      id_to_slot_[static_cast<std::size_t>(id)] < 0) {
    throw Error("unknown or retired cluster id " + std::to_string(id));
  }
  return id_to_slot_[static_cast<std::size_t>(id)];
}

std::int64_t World1D::gap_between(const Slot &left, const Slot &right) const {
  return wrap(right.cluster.left - (left.cluster.left + left.cluster.size), L_);
}

void World1D::sift_up(std::size_t i) {
  const Event e = heap_[i];
  while (i > 0) {
    const std::size_t parent = (i - 1) / 2;
    if (!later(heap_[parent], e)) {
      break;
    }
    heap_[i] = heap_[parent];
    i = parent;
  }
  heap_[i] = e;
}

void World1D::sift_down(std::size_t i) {
  const Event e = heap_[i];
  const std::size_t n = heap_.size();
  for (;;) {
    std::size_t child = 2 * i + 1;
    if (child >= n) {
      break;
    }
    if (child + 1 < n && later(heap_[child], heap_[child + 1])) {
      ++child;
    }
    if (!later(e, heap_[child])) {
      break;
    }
    heap_[i] = heap_[child];
    i = child;
  }
  heap_[i] = e;
}

void World1D::push_event(const Event &e) {
  if (replace_top_) {
    // The popped event still sits at the root; overwrite it in place.
    replace_top_ = false;
    heap_.front() = e;
    sift_down(0);
    return;
  }
  heap_.push_back(e);
  sift_up(heap_.size() - 1);
}

void World1D::pop_event() {
  heap_.front() = heap_.back();
  heap_.pop_back();
  if (!heap_.empty()) {
    sift_down(0);
  }
}

bool World1D::is_live(const Event &e) const {
  const auto &slot = slots_[static_cast<std::size_t>(e.slot)];
  return slot.alive && slot.cluster.gen == e.gen;
}

void World1D::schedule(std::int32_t s, double uniform) {
  const auto &c = slots_[static_cast<std::size_t>(s)].cluster;
  push_event({now_ - std::log1p(-uniform) / c.rate, s, c.gen});
}

void World1D::record_tagged(double t, std::int64_t before, std::int64_t after,
                            TaggedEventKind kind) {
  if (log_) {
    log_->entries.push_back({t, before, after, kind});
  }
}

std::int32_t World1D::merge_slots(std::int32_t a, std::int32_t b) {
  auto &left = slots_[static_cast<std::size_t>(a)];
  auto &right = slots_[static_cast<std::size_t>(b)];
  id_to_slot_[static_cast<std::size_t>(left.cluster.id)] = -1;
  id_to_slot_[static_cast<std::size_t>(right.cluster.id)] = -1;

  left.cluster.id = next_id_++;
  left.cluster.gen = std::max(left.cluster.gen, right.cluster.gen) + 1;
  left.cluster.size += right.cluster.size;
  left.cluster.rate = clock_rate(left.cluster.size, alpha_, rate_cap_);
  id_to_slot_.push_back(a);

  left.next = right.next;
  slots_[static_cast<std::size_t>(left.next)].prev = a;
  right.alive = false;
  right.prev = right.next = -1;

  if (tagged_slot_ == b) {
    tagged_slot_ = a;
  }
  --n_clusters_;
  max_size_ = std::max(max_size_, left.cluster.size);
  return a;
}

Cluster1D World1D::merge_clusters(std::int64_t a, std::int64_t b) {
  const std::int32_t sa = slot_of(a);
  const std::int32_t sb = slot_of(b);
  const auto &left = slots_[static_cast<std::size_t>(sa)];
  const auto &right = slots_[static_cast<std::size_t>(sb)];
  if (sa == sb || left.next != sb || gap_between(left, right) != 0) {
    throw NotAdjacent("clusters " + std::to_string(a) + " and " +
                      std::to_string(b) + " are not in contact");
  }
  return slots_[static_cast<std::size_t>(merge_slots(sa, sb))].cluster;
}

StepReport World1D::move_cluster(std::int64_t id, int direction, Rng &rng) {
  return apply_move(slot_of(id), direction, rng.uniform());
}

StepReport World1D::apply_move(std::int32_t s, int direction,
                               double clock_uniform) {
  const bool was_tagged = s == tagged_slot_;
  const std::int64_t before = slots_[static_cast<std::size_t>(s)].cluster.size;

  StepReport report;
  report.cluster_id = slots_[static_cast<std::size_t>(s)].cluster.id;
  report.direction = direction;
  report.time = now_;

  auto &slot = slots_[static_cast<std::size_t>(s)];
  slot.cluster.left = wrap(slot.cluster.left + direction, L_);

  std::int32_t result = s;
  std::int32_t partner = -1;
  if (n_clusters_ >= 2) {
    if (direction > 0) {
      const std::int32_t nb = slot.next;
      if (gap_between(slot, slots_[static_cast<std::size_t>(nb)]) == 0) {
        partner = nb;
        result = merge_slots(s, nb);
      }
    } else {
      const std::int32_t nb = slot.prev;
      if (gap_between(slots_[static_cast<std::size_t>(nb)], slot) == 0) {
        partner = nb;
        result = merge_slots(nb, s);
      }
    }
  }
  report.merged = partner >= 0;

  const std::int64_t after =
      slots_[static_cast<std::size_t>(result)].cluster.size;
  if (was_tagged) {
    record_tagged(now_, before, after, TaggedEventKind::Move);
  } else if (report.merged && result == tagged_slot_) {
    const std::int64_t partner_before = after - before;
    record_tagged(now_, partner_before, after, TaggedEventKind::Merge);
  }

  if (n_clusters_ >= 2) {
    // A fresh generation retires whatever event the cluster still had queued.
    auto &mover = slots_[static_cast<std::size_t>(result)].cluster;
    if (!report.merged) {
      ++mover.gen;
    }
    schedule(result, clock_uniform);
  }
  return report;
}

std::optional<StepReport> World1D::step(Rng &rng) {
  if (heap_.empty()) {
    return std::nullopt;
  }
  const Event e = heap_.front();
  if (!is_live(e)) {
    pop_event();
    StepReport stale;
    stale.stale = true;
    stale.time = now_;
    return stale;
  }
  if (e.t - now_ < kMinAdvance) {
    if (++stalled_steps_ >= kStallLimit) {
      numerically_coalesced_ = true;
    }
  } else {
    stalled_steps_ = 0;
  }
  now_ = std::max(now_, e.t);
  // One draw per event: the low bit picks the direction, the high 53 bits
  // feed the fresh clock.
  const std::uint64_t bits = rng.next_u64();
  const int direction = (bits & 1U) != 0U ? 1 : -1;
  const double uniform = static_cast<double>(bits >> 11) * 0x1.0p-53;
  replace_top_ = true;
  auto report = apply_move(e.slot, direction, uniform);
  if (replace_top_) {
    // Nothing was rescheduled (a single cluster is left).
    replace_top_ = false;
    pop_event();
  }
  return report;
}

std::optional<double> World1D::next_event_time() {
  while (!heap_.empty() && !is_live(heap_.front())) {
    pop_event();
  }
  if (heap_.empty()) {
    return std::nullopt;
  }
  return heap_.front().t;
}

std::int64_t World1D::tagged_cluster_size() const {
  if (tagged_slot_ < 0) {
    throw EmptyWorld();
  }
  return slots_[static_cast<std::size_t>(tagged_slot_)].cluster.size;
}

std::int64_t World1D::tagged_id() const {
  if (tagged_slot_ < 0) {
    throw EmptyWorld();
  }
  return slots_[static_cast<std::size_t>(tagged_slot_)].cluster.id;
}

const Cluster1D &World1D::cluster(std::int64_t id) const {
  return slots_[static_cast<std::size_t>(slot_of(id))].cluster;
}

std::vector<Cluster1D> World1D::clusters() const {
  std::vector<Cluster1D> out;
  if (n_clusters_ == 0) {
    return out;
  }
  std::int32_t first = -1;
  for (std::int32_t s = 0; s < static_cast<std::int32_t>(slots_.size()); ++s) {
    const auto &slot = slots_[static_cast<std::size_t>(s)];
    if (slot.alive &&
        (first < 0 ||
         slot.cluster.left <
             slots_[static_cast<std::size_t>(first)].cluster.left)) {
      first = s;
    }
  }
  std::int32_t s = first;
  do {
    out.push_back(slots_[static_cast<std::size_t>(s)].cluster);
    s = slots_[static_cast<std::size_t>(s)].next;
  } while (s != first);
  return out;
}

std::int64_t World1D::gap_right(std::int64_t id) const {
  const auto &slot = slots_[static_cast<std::size_t>(slot_of(id))];
  return gap_between(slot, slots_[static_cast<std::size_t>(slot.next)]);
}

bool World1D::same_cluster(std::int64_t rank_a, std::int64_t rank_b) const {
  if (total_particles_ == 0) {
    throw EmptyWorld();
  }
  const std::int64_t n = total_particles_;
  const auto contains = [&](const Slot &slot, std::int64_t rank) {
    return wrap(rank - slot.first_rank, n) < slot.cluster.size;
  };
  for (const auto &slot : slots_) {
    if (slot.alive && contains(slot, rank_a)) {
      return contains(slot, rank_b);
    }
  }
  return false;
}

bool World1D::check_invariants() const {
  std::int64_t total = 0;
  std::int64_t alive = 0;
  for (std::int32_t s = 0; s < static_cast<std::int32_t>(slots_.size()); ++s) {
    const auto &slot = slots_[static_cast<std::size_t>(s)];
    if (!slot.alive) {
      continue;
    }
    ++alive;
    total += slot.cluster.size;
    if (slot.cluster.size < 1) {
      return false;
    }
    const auto &next = slots_[static_cast<std::size_t>(slot.next)];
    if (!next.alive || next.prev != s) {
      return false;
    }
    if (!saturated_ && gap_between(slot, next) < 1) {
      return false;
    }
    const double expected = clock_rate(slot.cluster.size, alpha_, rate_cap_);
    if (std::abs(slot.cluster.rate - expected) > 1e-12 * expected) {
      return false;
    }
    if (n_clusters_ >= 2) {
      const auto live = std::count_if(heap_.begin(), heap_.end(),
                                      [&](const Event &e) {
                                        return e.slot == s && is_live(e);
                                      });
      if (live != 1) {
        return false;
      }
    }
  }
  return alive == n_clusters_ && total == total_particles_;
}

namespace {

void record(ObservationSeries &series, double t, const World1D &world) {
  series.times.push_back(t);
  if (world.empty()) {
    series.c0_size.push_back(0);
    series.n_clusters.push_back(0);
    series.max_size.push_back(0);
    return;
  }
  series.c0_size.push_back(world.tagged_cluster_size());
  series.n_clusters.push_back(world.n_clusters());
  series.max_size.push_back(world.max_size());
}

} // namespace

RunResult run(const Config1D &config, Rng &rng) {
  config.validate();
  return run(config, World1D::create(config, rng), rng);
}

RunResult run(const Config1D &config, World1D world, Rng &rng) {
  if (config.log_tagged_steps) {
    world.enable_tagged_log();
  }
  RunResult result;
  auto &series = result.series;
  series.empty = world.empty();
  series.saturated = world.saturated();

  const double guard =
      config.guard_fraction * static_cast<double>(world.length());
  const auto over_guard = [&] {
    return !world.saturated() && static_cast<double>(world.max_size()) > guard;
  };
  bool stopped = world.empty() || world.saturated();
  if (!stopped && over_guard()) {
    series.contaminated = true;
    stopped = true;
  }

  const auto advance_to = [&](double horizon) {
    while (!stopped) {
      const auto next = world.next_event_time();
      if (!next || *next > horizon) {
        return;
      }
      world.step(rng);
      if (over_guard()) {
        series.contaminated = true;
        stopped = true;
      }
      if (world.numerically_coalesced()) {
        series.numerically_coalesced = true;
        stopped = true;
      }
    }
  };

  for (const double t : config.obs_times) {
    advance_to(t);
    record(series, t, world);
  }
  advance_to(config.t_max);
  result.log = world.take_tagged_log();
  return result;
}

double run_to_coalescence(const Config1D &config, Rng &rng) {
  auto world = World1D::create(config, rng);
  while (world.n_clusters() > 1) {
    if (!world.step(rng)) {
      break;
    }
    if (world.numerically_coalesced()) {
      break;
    }
  }
  return world.now();
}

} // namespace cca
