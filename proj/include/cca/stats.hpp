#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cca/lattice1d.hpp"
#include "cca/rng.hpp"

namespace cca {

/// Empirical CDF: the samples, sorted ascending.
class Ecdf {
public:
  /// Throws EmptySample when `samples` is empty.
  explicit Ecdf(std::vector<double> samples);

  std::span<const double> samples() const { return samples_; }
  std::size_t n() const { return samples_.size(); }

private:
  std::vector<double> samples_;
};

/// Kolmogorov-Smirnov distance sup |F_n - F| for a continuous CDF `cdf`.
double ks_distance(const Ecdf &ecdf, const std::function<double(double)> &cdf);

/// KS distance of the samples against Exp(1).
double exp1_ks(std::span<const double> samples);

/// Limiting distribution of sqrt(n) D_n: 1 - 2 sum (-1)^{k-1} exp(-2 k^2 x^2).
double kolmogorov_cdf(double x);

/// P(D_n < d) for a sample of size n. Exact (Marsaglia-Tsang-Wang) below
/// n = 100, asymptotic Kolmogorov law from there on.
double ks_cdf(std::size_t n, double d);

/// Smallest d with P(D_n >= d) <= significance.
double ks_critical_value(std::size_t n, double significance);

struct PowerLawFit {
  double slope = 0.0;
  double intercept = 0.0; // natural log of the prefactor
  double r2 = 0.0;
};

/// Least-squares line through (log t, log y). Needs at least three points
/// with positive coordinates; throws DegenerateInput when all t coincide.
PowerLawFit fit_power_law(std::span<const std::pair<double, double>> points);

/// Tagged-cluster step intervals measured in intrinsic time
/// u(t) = int_0^t rate(|C(s)|) ds. Each output is the increment of u between
/// consecutive own steps (the first one from t = 0); size changes caused by
/// neighbours merging in split the integral piecewise. Throws
/// NonMonotoneLog when entry times are not strictly increasing.
std::vector<double> time_change_intervals(const TaggedClusterLog &log,
                                          double alpha,
                                          std::optional<double> rate_cap = {});

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t replicas = 0;
};

/// Probability that particles 0 and m share a cluster by time t (alpha = 0),
/// from the gap walk alone: the number of empty sites between them starts
/// at sum_{i<=m} (G_i - 1), G_i ~ Geometric(p) on {1, 2, ...}, and performs
/// a +-1 walk at rate 2 until it reaches 0 or time runs out.
Estimate difference_walk_oracle(int m, double p, double t,
                                std::size_t replicas, Rng &rng);

/// The same probability measured with the full engine: particle 0 is the
/// first occupied site at or right of the origin, particle m the m-th one
/// after it.
Estimate engine_connection_estimate(int m, double p, double t,
                                    std::int64_t L, std::size_t replicas,
                                    std::uint64_t master_seed,
                                    std::size_t parallelism = 1);

struct CoalescencePoint {
  std::int64_t L = 0;
  double median_time = 0.0;
  std::vector<double> times; // per replica, in replica order
};

/// Median time until a single cluster remains, for each torus size.
std::vector<CoalescencePoint>
coalescence_scaling(double alpha, std::span<const std::int64_t> sizes,
                    std::size_t replicas, double p, std::uint64_t master_seed,
                    std::size_t parallelism = 1);

/// Median of the values (mean of the middle pair for even counts).
double median(std::vector<double> values);

} // namespace cca
