#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "scoreconf/dsm.hpp"
#include "scoreconf/fields.hpp"
#include "scoreconf/molgraph.hpp"
#include "scoreconf/scorenet.hpp"

namespace scoreconf {

struct LangevinConfig {
  double epsilon = 2.4e-6;  // step size at the smallest noise level
  int steps_per_level = 100;
  double prior_std = 1.0;   // A
  std::uint64_t seed = 0;
  double clamp_distance = 1e-3; // A, lower bound on d_ij in the 1/d_ij factor

  void validate() const;
};

// R + alpha * score + sqrt(2 alpha) * z.
Conformation langevin_step(const Conformation &conf, const CoordinateScore &score,
                           double alpha, const Eigen::Matrix3Xd &z);

// alpha_i = epsilon * sigma_i^2 / sigma_L^2.
std::vector<double> step_sizes(const NoiseSchedule &schedule, double epsilon);

using ScoreField = std::function<CoordinateScore(const Conformation &, double sigma)>;
// Fills its argument with standard normal draws.
using NoiseSource = std::function<void(Eigen::Matrix3Xd &)>;
using StepObserver =
    std::function<void(int level, int step, const Conformation &conf)>;

// Runs T steps at each level from sigma_1 down to sigma_L, carrying the
// conformation forward between levels. The observer, if set, sees R_t after
// every step.
Conformation anneal(Conformation initial, const ScoreField &field,
                    const NoiseSchedule &schedule, double epsilon,
                    int steps_per_level, const NoiseSource &noise,
                    const StepObserver &observer = {});

// Network coordinate score with d_ij clamped from below in the division.
// The field refers to g and params, which must outlive it.
ScoreField network_score_field(const MolecularGraph &g, const ScoreNetParams &params,
                               double clamp_distance);

// Prior draw N(0, prior_std^2) followed by annealing; deterministic in cfg.seed.
Conformation sample(int num_atoms, const ScoreField &field,
                    const NoiseSchedule &schedule, const LangevinConfig &cfg);
Conformation sample(const MolecularGraph &g, const ScoreNetParams &params,
                    const NoiseSchedule &schedule, const LangevinConfig &cfg);

// Independent chains; chain k runs with seed derived from (cfg.seed, k).
std::vector<Conformation> sample_many(const MolecularGraph &g,
                                      const ScoreNetParams &params,
                                      const NoiseSchedule &schedule,
                                      const LangevinConfig &cfg, int count,
                                      int threads = 1);

std::uint64_t chain_seed(std::uint64_t base_seed, int chain);

} // namespace scoreconf
