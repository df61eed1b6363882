// Acceptance run: one PASS/FAIL line per criterion, exit 0 only if all pass.
// Usage: cca_acceptance [--only N]...

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cca/ensemble.hpp"
#include "cca/experiments.hpp"
#include "cca/lattice1d.hpp"
#include "cca/rng.hpp"
#include "cca/stats.hpp"
#include "cca/theory.hpp"

using namespace cca;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string describe(const std::vector<Verdict> &verdicts) {
  std::ostringstream out;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const auto &v = verdicts[i];
    out << (i ? "; " : "") << v.name << ' ' << v.statistic << ' '
        << v.relation << ' ' << v.threshold;
  }
  return out.str();
}

// Criteria 1 and 2 share one ensemble.
const LimitLawReport &limit_law_report() {
  static const LimitLawReport report = [] {
    LimitLawSetup setup;
    setup.p = 0.5;
    setup.L = 8192;
    setup.t = 4096.0;
    setup.replicas = 500;
    setup.seed = 20240101;
    setup.ks_threshold = 0.08;
    setup.mean_tolerance = 0.05;
    setup.max_contamination = 0.01;
    return verify_limit_law(setup);
  }();
  return report;
}

void print_limit_law_diagnostic(const LimitLawReport &report) {
  // Same law with the scale a = (eta - 1)/sqrt(2) instead of (eta - 1)/2.
  auto law = LimitLawParams::from_p(0.5);
  law.a = (law.eta - 1.0) / std::sqrt(2.0);
  law.gamma = law.a * law.a;
  const double ks = ks_distance(Ecdf(report.scaled), [&](double x) {
    return limit_cdf(x, law);
  });
  std::cout << "INFO criterion 1-2 diagnostic: KS against the law rescaled by "
               "1/sqrt(2) = "
            << ks << ", its mean = "
            << 4.0 / (std::sqrt(2.0 * std::numbers::pi) * law.a)
            << ", sample mean = " << report.mean << '\n';
}

Outcome criterion1() {
  const auto &r = limit_law_report();
  const std::vector<Verdict> v = {r.verdicts[0], r.verdicts[2]};
  print_limit_law_diagnostic(r);
  return {all_pass(v), describe(v)};
}

Outcome criterion2() {
  const auto &r = limit_law_report();
  const std::vector<Verdict> v = {r.verdicts[1]};
  std::ostringstream out;
  out << describe(v) << " (mean " << r.mean << ", expected "
      << r.expected_mean << ')';
  return {all_pass(v), out.str()};
}

Outcome criterion3() {
  struct Case {
    double alpha;
    double p;
    std::int64_t L;
  };
  const std::vector<Case> cases = {
      {-1.0, 0.15, 32768}, {0.0, 0.5, 16384}, {1.0, 0.5, 8192}};
  bool pass = true;
  std::ostringstream out;
  for (const auto &c : cases) {
    ExponentSetup setup;
    setup.alpha = c.alpha;
    setup.p = c.p;
    setup.L = c.L;
    setup.obs_times = {256.0, 1024.0, 4096.0, 16384.0};
    setup.replicas = 200;
    setup.seed = 3000 + static_cast<std::uint64_t>(c.alpha + 10.0);
    setup.slope_tolerance = 0.07;
    setup.max_contamination = 0.01;
    const auto report = verify_exponent(setup);
    pass = pass && all_pass(report.verdicts);
    out << "[alpha " << c.alpha << ": slope " << report.fit.slope
        << " vs " << report.expected_slope << "; " << describe(report.verdicts)
        << "] ";
  }
  return {pass, out.str()};
}

Outcome criterion4() {
  BlowupSetup blowup;
  blowup.alpha = -3.0;
  blowup.sizes = {512, 4096};
  blowup.replicas = 50;
  blowup.p = 0.5;
  blowup.seed = 4001;
  blowup.max_ratio = 1.5;
  const auto a = blowup_scan(blowup);

  BlowupSetup contrast;
  contrast.alpha = 0.0;
  contrast.sizes = {512, 2048};
  contrast.replicas = 50;
  contrast.p = 0.5;
  contrast.seed = 4002;
  contrast.min_ratio = 8.0;
  const auto b = blowup_scan(contrast);

  std::ostringstream out;
  out << "alpha -3: " << describe(a.verdicts) << "; alpha 0: "
      << describe(b.verdicts);
  return {all_pass(a.verdicts) && all_pass(b.verdicts), out.str()};
}

Outcome criterion5() {
  TimeChangeSetup setup;
  setup.alpha = -1.0;
  setup.p = 0.5;
  setup.L = 4096;
  setup.t_max = 1000.0;
  setup.runs = 100;
  setup.min_intervals = 500;
  setup.significance = 0.01;
  setup.min_pass = 95;
  setup.seed = 5005;
  const auto report = verify_timechange(setup);
  return {all_pass(report.verdicts), describe(report.verdicts)};
}

Outcome criterion6() {
  OracleSetup setup;
  setup.ms = {1, 5, 10};
  setup.ps = {0.3, 0.5};
  setup.t = 100.0;
  setup.engine_replicas = 10000;
  setup.oracle_replicas = 100000;
  setup.sigma_factor = 3.0;
  setup.seed = 6006;
  const auto report = oracle_compare(setup);
  std::ostringstream out;
  for (const auto &c : report.cases)
    out << "[m=" << c.m << " p=" << c.p << ": engine " << c.engine.value
        << " oracle " << c.oracle.value << " |diff| " << c.difference
        << " <= " << 3.0 * c.combined_std_error << "] ";
  return {all_pass(report.verdicts), out.str()};
}

Outcome criterion7() {
  const auto minus_one = gamma_sequence(-1.0, 10);
  const auto zero = gamma_sequence(0.0, 10);
  const auto minus_four = gamma_sequence(-4.0, 4);
  const double err = std::abs(minus_one[9] - 1.0);
  bool constant = true;
  for (double g : zero)
    constant = constant && g == 0.5;
  const bool pass = err <= 1e-3 && constant && minus_four[3] > 7.0;
  std::ostringstream out;
  out << "|gamma_10(-1) - 1| " << err << " <= 0.001; alpha 0 constant 1/2: "
      << (constant ? "yes" : "no") << "; gamma_4(-4) " << minus_four[3]
      << " > 7";
  return {pass, out.str()};
}

// Composite Simpson rule on [0, b] with n (even) panels.
double simpson(const std::function<double(double)> &f, double b, int n) {
  const double h = b / n;
  double sum = f(0.0) + f(b);
  for (int i = 1; i < n; ++i)
    sum += f(i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

Outcome criterion8() {
  double worst_mass = 0.0;
  double worst_derivative = 0.0;
  for (double p : {0.2, 0.5, 0.8}) {
    const auto law = LimitLawParams::from_p(p);
    const double scale = 1.0 / law.a;
    const double mass = simpson(
        [&](double x) { return limit_pdf(x, law); }, 40.0 * scale, 200000);
    worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
    const double h = 1e-5 * scale;
    for (int i = 1; i <= 200; ++i) {
      const double x = 10.0 * scale * i / 200.0;
      const double numeric =
          (limit_cdf(x + h, law) - limit_cdf(x - h, law)) / (2.0 * h);
      worst_derivative =
          std::max(worst_derivative, std::abs(numeric - limit_pdf(x, law)));
    }
  }
  std::ostringstream out;
  out << "max |mass - 1| " << worst_mass << " <= 1e-08; max |F' - f| "
      << worst_derivative << " <= 1e-06";
  return {worst_mass <= 1e-8 && worst_derivative <= 1e-6, out.str()};
}

Outcome criterion9() {
  Rng gen(9009);
  std::size_t violations = 0;
  std::size_t cases = 0;
  std::size_t events = 0;
  for (std::uint64_t k = 0; k < 1000; ++k) {
    Config1D c;
    c.alpha = -1.5 + 3.5 * gen.uniform();
    c.p = 0.02 + 0.98 * gen.uniform();
    c.L = 2 + static_cast<std::int64_t>(gen.uniform() * 255.0);
    c.t_max = 50.0 * gen.uniform();
    c.obs_times = {0.25 * c.t_max, 0.5 * c.t_max, c.t_max};
    if (gen.uniform() < 0.3)
      c.rate_cap = 0.5 + 4.0 * gen.uniform();
    c.seed = derive_replica_seed(9, k);
    ++cases;

    Rng rng(c.seed);
    auto world = World1D::create(c, rng);
    bool ok = world.check_invariants();
    const auto particles = world.total_particles();
    for (int s = 0; ok && s < 1500; ++s) {
      const auto before = world.clusters();
      const auto report = world.step(rng);
      if (!report)
        break;
      ++events;
      ok = world.check_invariants() && world.total_particles() == particles;
      if (report->stale) {
        const auto after = world.clusters();
        ok = ok && after.size() == before.size();
        for (std::size_t i = 0; ok && i < after.size(); ++i)
          ok = after[i].left == before[i].left && after[i].size == before[i].size;
      }
    }

    Rng a(c.seed);
    Rng b(c.seed);
    ok = ok && run(c, a).series == run(c, b).series;

    if (k % 40 == 0) {
      EnsembleConfig e;
      e.base = c;
      e.replicas = 6;
      e.master_seed = k;
      const auto serial = run_ensemble(e);
      e.parallelism = 4;
      ok = ok && serial.replicas == run_ensemble(e).replicas;
    }
    violations += ok ? 0 : 1;
  }
  std::ostringstream out;
  out << cases << " random configs, " << events << " events checked, "
      << violations << " violations";
  return {violations == 0, out.str()};
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> only;
  app.add_option("--only", only, "Run only these criteria (1-9)")
      ->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Outcome()>> criteria = {
      criterion1, criterion2, criterion3, criterion4, criterion5,
      criterion6, criterion7, criterion8, criterion9};
  bool all = true;
  for (int n = 1; n <= 9; ++n) {
    if (!only.empty() && std::find(only.begin(), only.end(), n) == only.end())
      continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[static_cast<std::size_t>(n - 1)]();
    } catch (const std::exception &e) {
      outcome = {false, std::string("error: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - start)
                               .count();
    std::cout << (outcome.pass ? "PASS" : "FAIL") << " criterion " << n
              << ": " << outcome.detail << " (" << seconds << " s)"
              << std::endl;
    all = all && outcome.pass;
  }
  return all ? 0 : 1;
}
