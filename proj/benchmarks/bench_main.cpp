#include <benchmark/benchmark.h>

#include <random>

#include "scoreconf/dsm.hpp"
#include "scoreconf/fields.hpp"
#include "scoreconf/metrics.hpp"
#include "scoreconf/scorenet.hpp"

using namespace scoreconf;

namespace {

// Ring of n carbons with one branch per atom, extended with virtual edges.
MolecularGraph ring_graph(int n) {
  std::vector<int> atoms(2 * n, 6);
  std::vector<BondSpec> bonds;
  for (int i = 0; i < n; ++i) {
    bonds.push_back({i, (i + 1) % n, EdgeType::kAromatic});
    bonds.push_back({i, n + i, EdgeType::kSingle});
    atoms[n + i] = i % 2 ? 1 : 8;
  }
  return extend_graph(build_graph(atoms, bonds));
}

Conformation random_conf(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.5);
  Eigen::Matrix3Xd x(3, n);
  for (int k = 0; k < x.size(); ++k)
    x.data()[k] = normal(rng);
  return Conformation(x);
}

ScoreNetHyper hyper(int hidden, int layers) {
  ScoreNetHyper h;
  h.hidden_dim = hidden;
  h.num_layers = layers;
  return h;
}

void BM_EdgeScore(benchmark::State &state) {
  const MolecularGraph g = ring_graph(static_cast<int>(state.range(0)));
  const ScoreNetParams p = init_params(hyper(static_cast<int>(state.range(1)), 4), 1);
  const DistanceVector d = compute_distances(g, random_conf(g.num_atoms(), 2));
  for (auto _ : state)
    benchmark::DoNotOptimize(edge_score(g, d, 0.5, p));
  state.counters["edges"] = g.num_edges();
}
BENCHMARK(BM_EdgeScore)->Args({6, 64})->Args({6, 256})->Args({12, 256});

void BM_CoordinateScore(benchmark::State &state) {
  const MolecularGraph g = ring_graph(static_cast<int>(state.range(0)));
  const ScoreNetParams p = init_params(hyper(256, 4), 1);
  const Conformation c = random_conf(g.num_atoms(), 3);
  for (auto _ : state)
    benchmark::DoNotOptimize(coordinate_score(g, c, 0.5, p));
}
BENCHMARK(BM_CoordinateScore)->Arg(6)->Arg(12);

void BM_TrainEpoch(benchmark::State &state) {
  const MolecularGraph g = ring_graph(6);
  std::vector<TrainingExample> data;
  for (int k = 0; k < 8; ++k)
    data.push_back({g, random_conf(g.num_atoms(), 10 + k)});
  const NoiseSchedule schedule = make_schedule(10.0, 0.01, 50);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 8;
  cfg.threads = static_cast<int>(state.range(1));
  const ScoreNetHyper h = hyper(static_cast<int>(state.range(0)), 4);
  for (auto _ : state)
    benchmark::DoNotOptimize(train(data, schedule, h, cfg));
}
BENCHMARK(BM_TrainEpoch)->Args({64, 1})->Args({256, 1})->Args({256, 2})->Unit(benchmark::kMillisecond);

void BM_Kabsch(benchmark::State &state) {
  const int n = static_cast<int>(state.range(0));
  const Conformation a = random_conf(n, 4), b = random_conf(n, 5);
  const std::vector<bool> mask(n, true);
  for (auto _ : state)
    benchmark::DoNotOptimize(kabsch_rmsd(a, b, mask));
}
BENCHMARK(BM_Kabsch)->Arg(9)->Arg(30)->Arg(100);

} // namespace
BENCHMARK_MAIN();
