#include "cca/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "cca/errors.hpp"
#include "cca/parallel.hpp"

namespace cca {

Ecdf::Ecdf(std::vector<double> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) {
    throw EmptySample();
  }
  std::sort(samples_.begin(), samples_.end());
}

double ks_distance(const Ecdf &ecdf,
                   const std::function<double(double)> &cdf) {
  const auto xs = ecdf.samples();
  const auto n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    const double above = static_cast<double>(i + 1) / n - f;
    const double below = f - static_cast<double>(i) / n;
    d = std::max({d, std::abs(above), std::abs(below)});
  }
  return d;
}

double exp1_ks(std::span<const double> samples) {
  const Ecdf ecdf({samples.begin(), samples.end()});
  return ks_distance(ecdf, [](double x) {
    return x > 0.0 ? -std::expm1(-x) : 0.0;
  });
}

double kolmogorov_cdf(double x) {
  if (x <= 0.0) {
    return 0.0;
  }
  if (x < 0.3) {
    // Alternate form, fast for small x:
    // sqrt(2 pi)/x sum_k exp(-(2k-1)^2 pi^2 / (8 x^2)).
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double j = 2.0 * k - 1.0;
      s += std::exp(-j * j * pi2 / (8.0 * x * x));
    }
    return std::sqrt(2.0 * std::numbers::pi) / x * s;
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) {
      break;
    }
  }
  return std::clamp(1.0 - 2.0 * s, 0.0, 1.0);
}

namespace {

// Square matrix with a decimal exponent carried alongside, as in
// Marsaglia, Tsang & Wang, "Evaluating Kolmogorov's distribution" (2003).
struct ScaledMatrix {
  std::vector<double> v;
  int exponent = 0;
};

ScaledMatrix multiply(const ScaledMatrix &a, const ScaledMatrix &b, int m) {
  ScaledMatrix c{std::vector<double>(static_cast<std::size_t>(m * m), 0.0),
                 a.exponent + b.exponent};
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < m; ++k) {
      const double aik = a.v[static_cast<std::size_t>(i * m + k)];
      if (aik == 0.0) {
        continue;
      }
      for (int j = 0; j < m; ++j) {
        c.v[static_cast<std::size_t>(i * m + j)] +=
            aik * b.v[static_cast<std::size_t>(k * m + j)];
      }
    }
  }
  return c;
}

void rescale(ScaledMatrix &a, int m) {
  const double centre = a.v[static_cast<std::size_t>((m / 2) * m + m / 2)];
  if (centre > 1e140) {
    for (auto &x : a.v) {
      x *= 1e-140;
    }
    a.exponent += 140;
  }
}

ScaledMatrix power(const ScaledMatrix &a, int m, std::size_t n) {
  if (n == 1) {
    return a;
  }
  ScaledMatrix half = power(a, m, n / 2);
  ScaledMatrix out = multiply(half, half, m);
  if (n % 2 == 1) {
    out = multiply(a, out, m);
  }
  rescale(out, m);
  return out;
}

double ks_cdf_exact(std::size_t n_samples, double d) {
  const auto n = static_cast<double>(n_samples);
  const int k = static_cast<int>(n * d) + 1;
  const int m = 2 * k - 1;
  const double h = k - n * d;
  ScaledMatrix hm{std::vector<double>(static_cast<std::size_t>(m * m)), 0};
  const auto at = [&](int i, int j) -> double & {
    return hm.v[static_cast<std::size_t>(i * m + j)];
  };
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      at(i, j) = i - j + 1 < 0 ? 0.0 : 1.0;
    }
  }
  for (int i = 0; i < m; ++i) {
    at(i, 0) -= std::pow(h, i + 1);
    at(m - 1, i) -= std::pow(h, m - i);
  }
  at(m - 1, 0) += 2.0 * h - 1.0 > 0.0 ? std::pow(2.0 * h - 1.0, m) : 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      for (int g = 1; g <= i - j + 1; ++g) {
        at(i, j) /= g;
      }
    }
  }
  const ScaledMatrix q = power(hm, m, n_samples);
  double s = q.v[static_cast<std::size_t>((k - 1) * m + k - 1)];
  int exponent = q.exponent;
  for (std::size_t i = 1; i <= n_samples; ++i) {
    s = s * static_cast<double>(i) / n;
    if (s < 1e-140) {
      s *= 1e140;
      exponent -= 140;
    }
  }
  return s * std::pow(10.0, exponent);
}

} // namespace

double ks_cdf(std::size_t n, double d) {
  if (n == 0) {
    throw EmptySample();
  }
  if (d <= 0.0) {
    return 0.0;
  }
  if (d >= 1.0) {
    return 1.0;
  }
  if (n >= 100) {
    return kolmogorov_cdf(std::sqrt(static_cast<double>(n)) * d);
  }
  return std::clamp(ks_cdf_exact(n, d), 0.0, 1.0);
}

double ks_critical_value(std::size_t n, double significance) {
  if (!(significance > 0.0 && significance < 1.0)) {
    throw InvalidParams("significance must lie in (0,1)");
  }
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (1.0 - ks_cdf(n, mid) > significance ? lo : hi) = mid;
  }
  return hi;
}

PowerLawFit fit_power_law(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) {
    throw DegenerateInput("power-law fit needs at least three points");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto &[t, y] : points) {
    if (!(t > 0.0 && y > 0.0)) {
      throw DegenerateInput("power-law fit needs positive coordinates");
    }
    xs.push_back(std::log(t));
    ys.push_back(std::log(y));
  }
  const auto n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) {
    throw DegenerateInput("all t values are equal");
  }
  PowerLawFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  return fit;
}

std::vector<double> time_change_intervals(const TaggedClusterLog &log,
                                          double alpha,
                                          std::optional<double> rate_cap) {
  std::vector<double> out;
  if (log.entries.empty()) {
    return out;
  }
  double last = 0.0;
  double accumulated = 0.0;
  std::int64_t size = log.entries.front().size_before;
  for (std::size_t i = 0; i < log.entries.size(); ++i) {
    const auto &e = log.entries[i];
    if (e.t < 0.0 || (i > 0 && !(e.t > log.entries[i - 1].t))) {
      throw NonMonotoneLog("tagged log times must be strictly increasing");
    }
    accumulated += clock_rate(size, alpha, rate_cap) * (e.t - last);
    last = e.t;
    size = e.size_after;
    if (e.kind == TaggedEventKind::Move) {
      out.push_back(accumulated);
      accumulated = 0.0;
    }
  }
  return out;
}

namespace {

Estimate proportion(std::size_t hits, std::size_t n) {
  Estimate e;
  e.replicas = n;
  e.value = static_cast<double>(hits) / static_cast<double>(n);
  e.std_error = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(n));
  return e;
}

} // namespace

Estimate difference_walk_oracle(int m, double p, double t,
                                std::size_t replicas, Rng &rng) {
  if (m < 1 || !(p > 0.0 && p < 1.0) || !(t >= 0.0) || replicas < 1) {
    throw InvalidParams(
        "difference walk needs m >= 1, 0 < p < 1, t >= 0, replicas >= 1");
  }
  std::size_t hits = 0;
  for (std::size_t r = 0; r < replicas; ++r) {
    std::int64_t gap = 0;
    for (int i = 0; i < m; ++i) {
      gap += static_cast<std::int64_t>(rng.geometric_failures(p));
    }
    double clock = 0.0;
    while (gap > 0) {
      clock += rng.exponential(2.0);
      if (clock > t) {
        break;
      }
      gap += rng.sign();
    }
    hits += gap <= 0 ? 1 : 0;
  }
  return proportion(hits, replicas);
}

Estimate engine_connection_estimate(int m, double p, double t,
                                    std::int64_t L, std::size_t replicas,
                                    std::uint64_t master_seed,
                                    std::size_t parallelism) {
  if (m < 1 || !(p > 0.0 && p < 1.0) || !(t >= 0.0) || replicas < 1) {
    throw InvalidParams(
        "engine estimate needs m >= 1, 0 < p < 1, t >= 0, replicas >= 1");
  }
  Config1D config;
  config.alpha = 0.0;
  config.p = p;
  config.L = L;
  config.t_max = t;
  config.guard_fraction = 1.0;
  config.validate();

  std::vector<std::uint8_t> connected(replicas, 0);
  parallel_for(replicas, parallelism, [&](std::size_t r) {
    Rng rng(derive_replica_seed(master_seed, r));
    auto world = World1D::create(config, rng);
    if (world.total_particles() <= m) {
      return;
    }
    for (;;) {
      const auto next = world.next_event_time();
      if (!next || *next > t) {
        break;
      }
      world.step(rng);
    }
    connected[r] = world.same_cluster(0, m) ? 1 : 0;
  });
  const auto hits = static_cast<std::size_t>(
      std::count(connected.begin(), connected.end(), 1));
  return proportion(hits, replicas);
}

std::vector<CoalescencePoint>
coalescence_scaling(double alpha, std::span<const std::int64_t> sizes,
                    std::size_t replicas, double p, std::uint64_t master_seed,
                    std::size_t parallelism) {
  if (replicas < 1) {
    throw InvalidParams("coalescence scan needs replicas >= 1");
  }
  std::vector<CoalescencePoint> out;
  for (const std::int64_t L : sizes) {
    if (L < 4) {
      throw InvalidParams("coalescence scan needs L >= 4");
    }
    Config1D config;
    config.alpha = alpha;
    config.p = p;
    config.L = L;
    config.guard_fraction = 1.0;
    config.validate();

    CoalescencePoint point;
    point.L = L;
    point.times.assign(replicas, 0.0);
    const std::uint64_t size_seed =
        derive_replica_seed(master_seed, static_cast<std::uint64_t>(L));
    parallel_for(replicas, parallelism, [&](std::size_t r) {
      Rng rng(derive_replica_seed(size_seed, r));
      point.times[r] = run_to_coalescence(config, rng);
    });
    point.median_time = median(point.times);
    out.push_back(std::move(point));
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) {
    throw EmptySample();
  }
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<long>(mid),
                   values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) {
    return upper;
  }
  const double lower =
      *std::max_element(values.begin(), values.begin() + static_cast<long>(mid));
  return 0.5 * (lower + upper);
}

} // namespace cca
