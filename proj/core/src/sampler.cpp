#include "scoreconf/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "scoreconf/error.hpp"
#include "scoreconf/random.hpp"

namespace scoreconf {

void LangevinConfig::validate() const {
  if (!(epsilon >= 0.0) || steps_per_level < 1 || !(prior_std > 0.0) ||
      !(clamp_distance >= 0.0))
    throw Error(ErrorCode::kInvalidArgument,
                "invalid Langevin configuration (epsilon=" + std::to_string(epsilon) +
                    ", T=" + std::to_string(steps_per_level) +
                    ", prior_std=" + std::to_string(prior_std) + ")");
}

Conformation langevin_step(const Conformation &conf, const CoordinateScore &score,
                           double alpha, const Eigen::Matrix3Xd &z) {
  return Conformation(conf.coords + alpha * score.vectors + std::sqrt(2.0 * alpha) * z);
}

std::vector<double> step_sizes(const NoiseSchedule &schedule, double epsilon) {
  const double last = schedule.last();
  std::vector<double> alphas;
  alphas.reserve(schedule.size());
  for (double sigma : schedule.sigmas()) {
    const double ratio = sigma / last;
    alphas.push_back(epsilon * (ratio * ratio));
  }
  return alphas;
}

Conformation anneal(Conformation conf, const ScoreField &field,
                    const NoiseSchedule &schedule, double epsilon,
                    int steps_per_level, const NoiseSource &noise,
                    const StepObserver &observer) {
  const std::vector<double> alphas = step_sizes(schedule, epsilon);
  Eigen::Matrix3Xd z(3, conf.num_atoms());
  for (int level = 0; level < schedule.size(); ++level) {
    const double sigma = schedule.sigma(level);
    for (int t = 0; t < steps_per_level; ++t) {
      const CoordinateScore score = field(conf, sigma);
      noise(z);
      conf = langevin_step(conf, score, alphas[level], z);
      if (observer)
        observer(level, t, conf);
    }
  }
  return conf;
}

ScoreField network_score_field(const MolecularGraph &g, const ScoreNetParams &params,
                               double clamp_distance) {
  return [&g, &params, clamp_distance](const Conformation &conf, double sigma) {
    const DistanceVector d = compute_distances(g, conf);
    return assemble_coordinate_score(g, conf, d, edge_score(g, d, sigma, params),
                                     clamp_distance);
  };
}

Conformation sample(int num_atoms, const ScoreField &field,
                    const NoiseSchedule &schedule, const LangevinConfig &cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::normal_distribution<double> normal;
  Conformation initial(Eigen::Matrix3Xd(3, num_atoms));
  for (int i = 0; i < num_atoms; ++i)
    for (int c = 0; c < 3; ++c)
      initial.coords(c, i) = cfg.prior_std * normal(rng);
  const NoiseSource noise = [&](Eigen::Matrix3Xd &z) {
    for (Eigen::Index i = 0; i < z.cols(); ++i)
      for (int c = 0; c < 3; ++c)
        z(c, i) = normal(rng);
  };
  return anneal(std::move(initial), field, schedule, cfg.epsilon,
                cfg.steps_per_level, noise);
}

Conformation sample(const MolecularGraph &g, const ScoreNetParams &params,
                    const NoiseSchedule &schedule, const LangevinConfig &cfg) {
  if (!g.is_extended())
    throw Error(ErrorCode::kInvalidArgument,
                "sampling requires a graph extended with virtual bonds");
  return sample(g.num_atoms(), network_score_field(g, params, cfg.clamp_distance),
                schedule, cfg);
}

std::uint64_t chain_seed(std::uint64_t base_seed, int chain) {
  return derive_rng(base_seed, {static_cast<std::uint64_t>(chain)})();
}

std::vector<Conformation> sample_many(const MolecularGraph &g,
                                      const ScoreNetParams &params,
                                      const NoiseSchedule &schedule,
                                      const LangevinConfig &cfg, int count,
                                      int threads) {
  std::vector<Conformation> out(std::max(count, 0));
  threads = std::clamp(threads, 1, std::max(count, 1));
  auto work = [&](int worker) {
    for (int k = worker; k < count; k += threads) {
      LangevinConfig chain = cfg;
      chain.seed = chain_seed(cfg.seed, k);
      out[k] = sample(g, params, schedule, chain);
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back(work, w);
  }
  return out;
}

} // namespace scoreconf
