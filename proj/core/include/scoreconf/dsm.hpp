#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "scoreconf/autodiff.hpp"
#include "scoreconf/molgraph.hpp"
#include "scoreconf/random.hpp"
#include "scoreconf/scorenet.hpp"

namespace scoreconf {

// Geometric noise levels sigma_1 > ... > sigma_L > 0 with ratio gamma.
class NoiseSchedule {
public:
  std::span<const double> sigmas() const noexcept { return sigmas_; }
  double sigma(int level) const { return sigmas_.at(level); } // 0-based
  double gamma() const noexcept { return gamma_; }
  int size() const noexcept { return static_cast<int>(sigmas_.size()); }
  double first() const { return sigmas_.front(); }
  double last() const { return sigmas_.back(); }

private:
  friend NoiseSchedule make_schedule(double sigma_1, double sigma_L, int L);
  std::vector<double> sigmas_;
  double gamma_ = 1.0;
};

// sigma_i = sigma_1 * gamma^(i-1), gamma = (sigma_L / sigma_1)^(1/(L-1)).
// The two endpoints are stored exactly as given.
NoiseSchedule make_schedule(double sigma_1, double sigma_L, int L);

// d + sigma * z with z ~ N(0, I); perturbed values are not clamped.
DistanceVector perturb(const DistanceVector &d, double sigma, Rng &rng);

// One Monte Carlo draw of the objective: a noise level and a noise vector.
struct DsmDraw {
  int level = 0;
  Eigen::VectorXd z;
};

DsmDraw draw_dsm_noise(const NoiseSchedule &schedule, int num_edges, Rng &rng);

// Literal weighted level loss
//   sigma^2 * 1/2 * mean_e (s_e / sigma + (dt_e - d_e) / sigma^2)^2
// where s is the unconditional score s_theta(dt).
double weighted_level_loss(const Eigen::VectorXd &unconditional_score,
                           const DistanceVector &perturbed,
                           const DistanceVector &clean, double sigma);

// Simplified form 1/2 * mean_e (s_e + (dt_e - d_e) / sigma)^2, equal to the
// weighted form up to rounding.
double level_loss(const Eigen::VectorXd &unconditional_score,
                  const DistanceVector &perturbed, const DistanceVector &clean,
                  double sigma);

// Maps perturbed distances (and the level they were drawn at) to an
// unconditional per-edge score. The network ignores sigma; analytic oracles
// may use it.
using DistanceScoreFn =
    std::function<Eigen::VectorXd(const DistanceVector &perturbed, double sigma)>;

// Single-sample estimate of the objective for one molecule: draws a level
// uniformly and one perturbation, returns the simplified level loss.
double dsm_loss(const ScoreNetParams &params, const MolecularGraph &g,
                const DistanceVector &d, const NoiseSchedule &schedule, Rng &rng);
double dsm_loss(const DistanceScoreFn &score, const DistanceVector &d,
                const NoiseSchedule &schedule, Rng &rng);

// The same estimate for a fixed draw, built on a tape so its gradient with
// respect to the network leaves can be taken.
ad::Var dsm_loss_on_tape(ad::Tape &tape, const TapeParams &params,
                         const MolecularGraph &g, const DistanceVector &d,
                         const NoiseSchedule &schedule, const DsmDraw &draw);

struct TrainConfig {
  int epochs = 200;
  int batch_size = 128;
  double initial_lr = 1e-3;
  double lr_decay_rate = 0.95;
  std::uint64_t seed = 0;
  // Worker threads for per-example gradients; results do not depend on it.
  int threads = 1;

  void validate() const;
};

struct TrainingExample {
  MolecularGraph graph;
  Conformation conformation;
};

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  ScoreNetParams params;
  std::vector<EpochLog> trace;
};

class AdamOptimizer {
public:
  explicit AdamOptimizer(std::size_t size, double beta1 = 0.9,
                         double beta2 = 0.999, double eps = 1e-8);

  void step(std::span<double> params, std::span<const double> grad, double lr);
  long steps() const noexcept { return t_; }

private:
  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

// Minibatch Adam on the mean per-example loss; the learning rate is
// multiplied by lr_decay_rate after every epoch.
TrainResult train(std::span<const TrainingExample> dataset,
                  const NoiseSchedule &schedule, const ScoreNetHyper &hyper,
                  const TrainConfig &cfg,
                  const std::function<void(const EpochLog &)> &on_epoch = {});

// Same, continuing from given parameters.
TrainResult train_from(ScoreNetParams initial,
                       std::span<const TrainingExample> dataset,
                       const NoiseSchedule &schedule, const TrainConfig &cfg,
                       const std::function<void(const EpochLog &)> &on_epoch = {});

} // namespace scoreconf
