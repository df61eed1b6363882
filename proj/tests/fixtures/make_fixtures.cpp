// Regenerates the frozen regression fixtures in this directory.
// Usage: make_fixtures <output-dir>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include "cca/ensemble.hpp"
#include "cca/lattice1d.hpp"
#include "cca/latticed.hpp"
#include "cca/rng.hpp"

namespace fs = std::filesystem;

namespace {

void occupancy_1d(const fs::path &dir) {
  cca::Config1D config;
  config.p = 0.5;
  config.L = 64;
  config.seed = 42;
  cca::Rng rng(config.seed);
  const auto world = cca::World1D::create(config, rng);

  std::string occupancy(static_cast<std::size_t>(config.L), '0');
  std::ofstream out(dir / "occupancy_L64_p05_seed42.txt");
  for (const auto &c : world.clusters())
    for (std::int64_t k = 0; k < c.size; ++k)
      occupancy[static_cast<std::size_t>((c.left + k) % config.L)] = '1';
  out << "occupancy " << occupancy << '\n';
  out << "tagged_left " << world.cluster(world.tagged_id()).left << '\n';
  for (const auto &c : world.clusters())
    out << "cluster " << c.left << ' ' << c.size << '\n';
}

void components_2d(const fs::path &dir) {
  cca::ConfigD config;
  config.d = 2;
  config.L = 8;
  config.p = 0.3;
  config.seed = 7;
  cca::Rng rng(config.seed);
  const auto world = cca::WorldD::create(config, rng);

  // Each component is labelled by its smallest flattened site.
  std::ofstream out(dir / "components_8x8_p03_seed7.csv");
  out << "x1,x2,component\n";
  for (cca::Site s = 0; s < config.volume(); ++s) {
    const auto id = world.cluster_at(s);
    if (id < 0)
      continue;
    const auto &sites = world.cluster(id).sites;
    const auto label = *std::min_element(sites.begin(), sites.end());
    const auto x = world.coords(s);
    out << x[0] << ',' << x[1] << ',' << label << '\n';
  }
}

void count_trace_2d(const fs::path &dir) {
  cca::ConfigD config;
  config.d = 2;
  config.L = 64;
  config.p = 0.1;
  config.alpha = 1.0;
  config.t_max = 1000.0;
  config.seed = 11;
  for (int k = 0; k <= 10; ++k)
    config.obs_times.push_back(100.0 * k);
  cca::Rng rng(config.seed);
  const auto result = cca::run_d(config, rng);

  std::ofstream out(dir / "count_trace_2d_64_p01_a1_seed11.csv");
  out << "t,n_clusters,max_size\n";
  for (std::size_t k = 0; k < result.series.times.size(); ++k)
    out << cca::format_real(result.series.times[k]) << ','
        << result.series.n_clusters[k] << ',' << result.series.max_size[k]
        << '\n';
}

void ensemble_alpha0(const fs::path &dir) {
  cca::Config1D base;
  base.alpha = 0.0;
  base.p = 0.5;
  base.L = 1024;
  base.t_max = 256.0;
  base.obs_times = {16.0, 64.0, 256.0};
  cca::EnsembleConfig config;
  config.base = base;
  config.replicas = 50;
  config.master_seed = 1;
  cca::write_csv(cca::run_ensemble(config),
                 dir / "ensemble_a0_M50_L1024_t256_seed1.csv");
}

// Exact power law c0_size = t^(1/3) at t = 8^k.
void power_law_alpha1(const fs::path &dir) {
  cca::EnsembleResult result;
  for (std::size_t r = 0; r < 3; ++r) {
    cca::ReplicaResult replica;
    replica.index = r;
    replica.seed = r;
    for (std::int64_t size : {2, 4, 8, 16}) {
      replica.series.times.push_back(static_cast<double>(size * size * size));
      replica.series.c0_size.push_back(size);
      replica.series.n_clusters.push_back(10);
      replica.series.max_size.push_back(size);
    }
    result.replicas.push_back(replica);
  }
  cca::write_csv(result, dir / "power_law_alpha1.csv");
}

// y = 3 t^(1/2) (1 + 0.01 z), z standard normal by Box-Muller.
void noisy_power_law(const fs::path &dir) {
  cca::Rng rng(2024);
  std::ofstream out(dir / "noisy_power_law_slope05.csv");
  out << "t,y\n";
  for (int k = 0; k < 12; ++k) {
    const double t = std::pow(2.0, k + 2);
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    const double z =
        std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    out << cca::format_real(t) << ','
        << cca::format_real(3.0 * std::sqrt(t) * (1.0 + 0.01 * z)) << '\n';
  }
}

} // namespace

int main(int argc, char **argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <output-dir>\n";
    return 2;
  }
  const fs::path dir = argv[1];
  fs::create_directories(dir);
  occupancy_1d(dir);
  components_2d(dir);
  count_trace_2d(dir);
  ensemble_alpha0(dir);
  power_law_alpha1(dir);
  noisy_power_law(dir);
  return 0;
}
