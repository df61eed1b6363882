#include "cca/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cca/errors.hpp"

namespace cca {

namespace {

constexpr double kInvSqrt2Pi = 0.5 * std::numbers::inv_sqrtpi *
                               std::numbers::sqrt2;

} // namespace

LimitLawParams LimitLawParams::from_p(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidParams("limit law needs 0 < p < 1");
  }
  LimitLawParams params;
  params.p = p;
  params.eta = 1.0 / p;
  params.a = (params.eta - 1.0) / 2.0;
  params.gamma = params.a * params.a;
  return params;
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double limit_cdf(double x, const LimitLawParams &params) {
  if (!(x > 0.0)) {
    return 0.0;
  }
  const double ax = params.a * x;
  if (ax > 40.0) {
    return 1.0;
  }
  // 2 Phi(ax) - 1 = erf(ax / sqrt 2); keeps precision near x = 0.
  const double value = std::erf(ax / std::numbers::sqrt2) -
                       2.0 * ax * kInvSqrt2Pi * std::exp(-0.5 * ax * ax);
  return std::clamp(value, 0.0, 1.0);
}

double limit_pdf(double x, const LimitLawParams &params) {
  if (!(x > 0.0)) {
    return 0.0;
  }
  const double g = params.gamma;
  return 2.0 * g * std::sqrt(g) * kInvSqrt2Pi * x * x *
         std::exp(-0.5 * g * x * x);
}

double limit_mean(const LimitLawParams &params) {
  return 8.0 * kInvSqrt2Pi / (params.eta - 1.0);
}

double limit_quantile(double u, const LimitLawParams &params) {
  if (!(u > 0.0)) {
    return 0.0;
  }
  if (u >= 1.0) {
    throw InvalidParams("quantile level must be below 1");
  }
  double lo = 0.0;
  double hi = 1.0 / params.a;
  while (limit_cdf(hi, params) < u) {
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (limit_cdf(mid, params) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> gamma_sequence(double alpha, int n) {
  if (n < 1) {
    throw InvalidParams("gamma_sequence needs n >= 1");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  double g = 0.5;
  for (int k = 0; k < n; ++k) {
    out.push_back(g);
    g = (1.0 - alpha * g) / 2.0;
  }
  return out;
}

double growth_exponent(double alpha) {
  if (!(alpha > -2.0)) {
    throw InvalidParams("growth exponent is undefined for alpha <= -2");
  }
  return 1.0 / (alpha + 2.0);
}

} // namespace cca
