#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cca/errors.hpp"
#include "cca/theory.hpp"

#ifdef CCA_HAVE_BOOST_QUADRATURE
#include <boost/math/quadrature/gauss_kronrod.hpp>
#endif

using namespace cca;

TEST_CASE("limit law parameters") {
  const auto law = LimitLawParams::from_p(0.5);
  CHECK(law.eta == 2.0);
  CHECK(law.a == 0.5);
  CHECK(law.gamma == 0.25);
  CHECK_THROWS_AS(LimitLawParams::from_p(0.0), InvalidParams);
  CHECK_THROWS_AS(LimitLawParams::from_p(1.0), InvalidParams);
  CHECK_THROWS_AS(LimitLawParams::from_p(-0.1), InvalidParams);
}

TEST_CASE("normal cdf reference values") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-14));
  CHECK(normal_cdf(-3.0) ==
        doctest::Approx(0.0013498980316300946).epsilon(1e-13));
}

TEST_CASE("limit cdf examples") {
  const auto law = LimitLawParams::from_p(0.5);
  CHECK(limit_cdf(0.0, law) == 0.0);
  CHECK(limit_cdf(-1.0, law) == 0.0);
  CHECK(limit_cdf(2.0, law) == doctest::Approx(0.19875).epsilon(1e-4));
  const double direct = 2.0 * normal_cdf(1.0) -
                        2.0 / std::sqrt(2.0 * std::numbers::pi) *
                            std::exp(-0.5) -
                        1.0;
  CHECK(limit_cdf(2.0, law) == doctest::Approx(direct).epsilon(1e-13));
  CHECK(limit_cdf(20.0 / law.a, law) > 1.0 - 1e-12);
}

TEST_CASE("limit cdf is monotone from 0 to 1 on a fine grid") {
  for (double p : {0.2, 0.5, 0.8}) {
    const auto law = LimitLawParams::from_p(p);
    const double hi = 20.0 / law.a;
    double prev = limit_cdf(0.0, law);
    CHECK(prev == 0.0);
    for (int i = 1; i <= 10000; ++i) {
      const double f = limit_cdf(hi * i / 10000.0, law);
      REQUIRE(f >= prev);
      prev = f;
    }
    CHECK(prev > 1.0 - 1e-10);
  }
}

TEST_CASE("limit pdf is the derivative of the cdf") {
  const double h = 1e-5;
  for (double p : {0.2, 0.5, 0.8}) {
    const auto law = LimitLawParams::from_p(p);
    const double hi = 10.0 / law.a;
    for (int i = 1; i <= 200; ++i) {
      const double x = hi * i / 200.0;
      const double numeric =
          (limit_cdf(x + h, law) - limit_cdf(x - h, law)) / (2.0 * h);
      REQUIRE(std::abs(numeric - limit_pdf(x, law)) < 1e-6);
    }
  }
}

TEST_CASE("limit pdf examples") {
  const auto law = LimitLawParams::from_p(0.5);
  CHECK(limit_pdf(0.0, law) == 0.0);
  // The mode sqrt(2/gamma) is a local maximum.
  const double mode = std::sqrt(2.0 / law.gamma);
  CHECK(mode == doctest::Approx(2.8284271).epsilon(1e-7));
  CHECK(limit_pdf(mode, law) > limit_pdf(mode - 1e-3, law));
  CHECK(limit_pdf(mode, law) > limit_pdf(mode + 1e-3, law));
}

TEST_CASE("limit mean closed form") {
  CHECK(limit_mean(LimitLawParams::from_p(0.5)) ==
        doctest::Approx(3.19154).epsilon(1e-5));
  CHECK(limit_mean(LimitLawParams::from_p(2.0 / 3.0)) ==
        doctest::Approx(6.38308).epsilon(1e-5));
  // eta - 1 doubles from p = 1/2 (eta 2) to p = 1/3 (eta 3).
  CHECK(limit_mean(LimitLawParams::from_p(1.0 / 3.0)) ==
        doctest::Approx(limit_mean(LimitLawParams::from_p(0.5)) / 2.0)
            .epsilon(1e-14));
}

#ifdef CCA_HAVE_BOOST_QUADRATURE
TEST_CASE("quadrature: density integrates to 1 and reproduces the mean") {
  using boost::math::quadrature::gauss_kronrod;
  for (double p : {0.2, 0.5, 0.8}) {
    const auto law = LimitLawParams::from_p(p);
    const double hi = 40.0 / law.a;
    const double mass = gauss_kronrod<double, 61>::integrate(
        [&](double x) { return limit_pdf(x, law); }, 0.0, hi, 15, 1e-14);
    CHECK(std::abs(mass - 1.0) < 1e-8);
    const double mean = gauss_kronrod<double, 61>::integrate(
        [&](double x) { return x * limit_pdf(x, law); }, 0.0, hi, 15, 1e-14);
    CHECK(std::abs(mean - limit_mean(law)) < 1e-8);
  }
}
#endif

TEST_CASE("limit quantile inverts the cdf") {
  const auto law = LimitLawParams::from_p(0.3);
  for (double u : {0.01, 0.25, 0.5, 0.75, 0.99})
    CHECK(limit_cdf(limit_quantile(u, law), law) ==
          doctest::Approx(u).epsilon(1e-12));
  CHECK(limit_quantile(0.0, law) == 0.0);
}

TEST_CASE("gamma sequence examples") {
  const auto zero = gamma_sequence(0.0, 20);
  for (double g : zero)
    CHECK(g == 0.5);

  const auto minus_one = gamma_sequence(-1.0, 10);
  for (int k = 1; k <= 10; ++k)
    CHECK(minus_one[k - 1] ==
          doctest::Approx(1.0 - std::ldexp(1.0, -k)).epsilon(1e-15));
  CHECK(std::abs(minus_one[9] - 1.0) < 1e-3);
  CHECK(minus_one[9] == doctest::Approx(0.9990234).epsilon(1e-7));

  const auto minus_four = gamma_sequence(-4.0, 6);
  CHECK(minus_four[0] == 0.5);
  CHECK(minus_four[1] == 1.5);
  CHECK(minus_four[2] == 3.5);
  CHECK(minus_four[3] == 7.5);
  for (int k = 4; k <= 6; ++k)
    CHECK(minus_four[k - 1] > k);

  CHECK_THROWS_AS(gamma_sequence(0.0, 0), InvalidParams);
}

TEST_CASE("gamma sequence converges to 1/(alpha+2) for alpha > -2") {
  for (double alpha : {-1.5, -1.0, -0.5, 0.0, 1.0}) {
    const auto g = gamma_sequence(alpha, 200);
    const double limit = 1.0 / (alpha + 2.0);
    CHECK(std::abs(g.back() - limit) < 1e-6);
    // Error shrinks monotonically once past the first few terms, until it
    // reaches rounding level.
    for (std::size_t k = 5; k + 1 < g.size(); ++k) {
      if (std::abs(g[k] - limit) < 1e-13)
        break;
      CHECK(std::abs(g[k + 1] - limit) <= std::abs(g[k] - limit));
    }
  }
}

TEST_CASE("growth exponent") {
  CHECK(growth_exponent(0.0) == 0.5);
  CHECK(growth_exponent(1.0) == doctest::Approx(1.0 / 3.0));
  CHECK(growth_exponent(-1.0) == 1.0);
  // Fixed point of the gamma recursion.
  for (double alpha : {-1.0, 0.0, 1.0}) {
    const double g = growth_exponent(alpha);
    CHECK(g == doctest::Approx((1.0 - alpha * g) / 2.0));
  }
  CHECK_THROWS_AS(growth_exponent(-2.0), InvalidParams);
  CHECK_THROWS_AS(growth_exponent(-3.0), InvalidParams);
}
