#pragma once

#include <vector>

namespace cca {

/// Parameters of the alpha = 0 scaling law of the tagged cluster size.
/// eta = 1/p, a = (eta - 1)/2, gamma = a^2.
struct LimitLawParams {
  double p = 0.5;
  double eta = 2.0;
  double a = 0.5;
  double gamma = 0.25;

  /// Throws InvalidParams unless 0 < p < 1.
  static LimitLawParams from_p(double p);
};

/// Standard normal CDF, via the complementary error function.
double normal_cdf(double x);

/// Limit CDF of |C_0(t)|/sqrt(t):
///   F(x) = 2 Phi(a x) - (2 a x / sqrt(2 pi)) exp(-(a x)^2 / 2) - 1, x > 0.
double limit_cdf(double x, const LimitLawParams &params);

/// Derivative of `limit_cdf`: (2 gamma^{3/2} / sqrt(2 pi)) x^2 exp(-gamma x^2 / 2).
///
/// The density is a Gaussian weighted by x^2. Written as
/// gamma x^2 / sqrt(2 pi) * exp(-gamma x^2 / 2) it is off by the factor
/// 2 sqrt(gamma) and does not integrate to 1 unless gamma = 1/4; the
/// normalised form here is the one consistent with `limit_cdf`.
double limit_pdf(double x, const LimitLawParams &params);

/// Mean of the limit law, 8 / (sqrt(2 pi) (eta - 1)).
double limit_mean(const LimitLawParams &params);

/// Inverse of `limit_cdf` by bisection; u in [0, 1).
double limit_quantile(double u, const LimitLawParams &params);

/// gamma_1 = 1/2, gamma_{k+1} = (1 - alpha gamma_k) / 2; returns n terms.
std::vector<double> gamma_sequence(double alpha, int n);

/// Growth exponent 1/(alpha + 2) of the tagged cluster. Throws
/// InvalidParams for alpha <= -2, where clusters blow up in finite time.
double growth_exponent(double alpha);

} // namespace cca
