#include "scoreconf/dsm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

#include "scoreconf/error.hpp"

namespace scoreconf {

NoiseSchedule make_schedule(double sigma_1, double sigma_L, int L) {
  if (!(sigma_L > 0.0) || !(sigma_1 > sigma_L) || L < 2 || !std::isfinite(sigma_1))
    throw Error(ErrorCode::kInvalidRange,
                "need sigma_1 > sigma_L > 0 and L >= 2 (got sigma_1=" +
                    std::to_string(sigma_1) + ", sigma_L=" +
                    std::to_string(sigma_L) + ", L=" + std::to_string(L) + ")");
  NoiseSchedule s;
  s.gamma_ = std::pow(sigma_L / sigma_1, 1.0 / static_cast<double>(L - 1));
  s.sigmas_.resize(L);
  for (int i = 0; i < L; ++i)
    s.sigmas_[i] = sigma_1 * std::pow(s.gamma_, static_cast<double>(i));
  s.sigmas_.front() = sigma_1;
  s.sigmas_.back() = sigma_L;
  return s;
}

DistanceVector perturb(const DistanceVector &d, double sigma, Rng &rng) {
  std::normal_distribution<double> normal;
  DistanceVector out = d;
  for (Eigen::Index k = 0; k < out.values.size(); ++k)
    out.values[k] += sigma * normal(rng);
  return out;
}

DsmDraw draw_dsm_noise(const NoiseSchedule &schedule, int num_edges, Rng &rng) {
  DsmDraw draw;
  draw.level = std::uniform_int_distribution<int>(0, schedule.size() - 1)(rng);
  std::normal_distribution<double> normal;
  draw.z.resize(num_edges);
  for (int k = 0; k < num_edges; ++k)
    draw.z[k] = normal(rng);
  return draw;
}

double weighted_level_loss(const Eigen::VectorXd &unconditional_score,
                           const DistanceVector &perturbed,
                           const DistanceVector &clean, double sigma) {
  const Eigen::VectorXd residual =
      unconditional_score / sigma + (perturbed.values - clean.values) / (sigma * sigma);
  if (residual.size() == 0)
    return 0.0;
  return sigma * sigma * 0.5 * residual.squaredNorm() / residual.size();
}

double level_loss(const Eigen::VectorXd &unconditional_score,
                  const DistanceVector &perturbed, const DistanceVector &clean,
                  double sigma) {
  const Eigen::VectorXd residual =
      unconditional_score + (perturbed.values - clean.values) / sigma;
  if (residual.size() == 0)
    return 0.0;
  return 0.5 * residual.squaredNorm() / residual.size();
}

namespace {

DistanceVector apply_draw(const DistanceVector &d, double sigma, const DsmDraw &draw) {
  DistanceVector out;
  out.values = d.values + sigma * draw.z;
  return out;
}

} // namespace

double dsm_loss(const DistanceScoreFn &score, const DistanceVector &d,
                const NoiseSchedule &schedule, Rng &rng) {
  const DsmDraw draw = draw_dsm_noise(schedule, d.size(), rng);
  const double sigma = schedule.sigma(draw.level);
  const DistanceVector perturbed = apply_draw(d, sigma, draw);
  return level_loss(score(perturbed, sigma), perturbed, d, sigma);
}

double dsm_loss(const ScoreNetParams &params, const MolecularGraph &g,
                const DistanceVector &d, const NoiseSchedule &schedule, Rng &rng) {
  return dsm_loss(
      [&](const DistanceVector &perturbed, double) {
        return unconditional_edge_score(g, perturbed, params);
      },
      d, schedule, rng);
}

ad::Var dsm_loss_on_tape(ad::Tape &tape, const TapeParams &params,
                         const MolecularGraph &g, const DistanceVector &d,
                         const NoiseSchedule &schedule, const DsmDraw &draw) {
  const double sigma = schedule.sigma(draw.level);
  const DistanceVector perturbed = apply_draw(d, sigma, draw);
  const int m = g.num_edges();
  std::vector<ad::Var> inputs(m);
  for (int k = 0; k < m; ++k)
    inputs[k] = tape.lift(perturbed.values[k]);
  const std::vector<ad::Var> score =
      unconditional_edge_score_on_tape(tape, params, g, inputs);
  std::vector<ad::Var> squares(m);
  for (int k = 0; k < m; ++k) {
    const double target = (perturbed.values[k] - d.values[k]) / sigma;
    squares[k] = tape.square(tape.add(score[k], tape.lift(target)));
  }
  if (m == 0)
    return tape.lift(0.0);
  return tape.scale(tape.sum(squares), 0.5 / m);
}

void TrainConfig::validate() const {
  if (epochs < 1 || batch_size < 1 || threads < 1 || !(initial_lr >= 0.0) ||
      !(lr_decay_rate > 0.0 && lr_decay_rate <= 1.0))
    throw Error(ErrorCode::kInvalidArgument,
                "invalid training configuration (epochs=" + std::to_string(epochs) +
                    ", batch_size=" + std::to_string(batch_size) +
                    ", lr=" + std::to_string(initial_lr) +
                    ", decay=" + std::to_string(lr_decay_rate) + ")");
}

AdamOptimizer::AdamOptimizer(std::size_t size, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps), m_(size, 0.0), v_(size, 0.0) {}

void AdamOptimizer::step(std::span<double> params, std::span<const double> grad,
                         double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * grad[k];
    v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * grad[k] * grad[k];
    const double m_hat = m_[k] / c1;
    const double v_hat = v_[k] / c2;
    params[k] -= lr * m_hat / (std::sqrt(v_hat) + eps_);
  }
}

namespace {

struct PreparedExample {
  const MolecularGraph *graph;
  DistanceVector distances;
};

// Loss and gradient of one example, written into grad (size P).
double example_gradient(ad::Tape &tape, const ScoreNetParams &params,
                        const PreparedExample &ex, const NoiseSchedule &schedule,
                        Rng rng, std::span<double> grad) {
  tape.clear();
  const TapeParams leaves(tape, params);
  const DsmDraw draw = draw_dsm_noise(schedule, ex.graph->num_edges(), rng);
  const ad::Var loss =
      dsm_loss_on_tape(tape, leaves, *ex.graph, ex.distances, schedule, draw);
  const ad::Gradient g = tape.backward(loss);
  const std::uint32_t first = leaves.leaves().front().index();
  const auto adjoints = g.adjoints();
  std::copy_n(adjoints.begin() + first, grad.size(), grad.begin());
  return loss.value();
}

} // namespace

TrainResult train(std::span<const TrainingExample> dataset,
                  const NoiseSchedule &schedule, const ScoreNetHyper &hyper,
                  const TrainConfig &cfg,
                  const std::function<void(const EpochLog &)> &on_epoch) {
  return train_from(init_params(hyper, cfg.seed), dataset, schedule, cfg, on_epoch);
}

TrainResult train_from(ScoreNetParams initial,
                       std::span<const TrainingExample> dataset,
                       const NoiseSchedule &schedule, const TrainConfig &cfg,
                       const std::function<void(const EpochLog &)> &on_epoch) {
  if (dataset.empty())
    throw Error(ErrorCode::kEmptyDataset, "training set is empty");
  cfg.validate();

  std::vector<PreparedExample> examples;
  examples.reserve(dataset.size());
  for (const TrainingExample &ex : dataset)
    examples.push_back({&ex.graph, compute_distances(ex.graph, ex.conformation)});

  TrainResult result;
  result.params = std::move(initial);
  const ScoreNetHyper hyper = result.params.hyper;
  std::vector<double> flat = result.params.flatten();
  const std::size_t num_params = flat.size();
  AdamOptimizer adam(num_params);

  const int n = static_cast<int>(examples.size());
  const int threads = std::min(cfg.threads, cfg.batch_size);
  std::vector<ad::Tape> tapes(threads);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> element_grads(static_cast<std::size_t>(threads) * num_params);
  std::vector<double> element_loss(threads);
  std::vector<double> batch_grad(num_params);

  double lr = cfg.initial_lr;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng = derive_rng(cfg.seed, {static_cast<std::uint64_t>(epoch), 0});
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_loss = 0.0;
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int count = std::min(cfg.batch_size, n - start);
      std::fill(batch_grad.begin(), batch_grad.end(), 0.0);

      // Elements are processed in waves of `threads` and summed in element
      // order, so the result does not depend on the thread count.
      for (int wave = 0; wave < count; wave += threads) {
        const int width = std::min(threads, count - wave);
        auto work = [&](int worker) {
          const int pos = start + wave + worker;
          Rng rng = derive_rng(cfg.seed, {static_cast<std::uint64_t>(epoch), 1,
                                          static_cast<std::uint64_t>(pos)});
          element_loss[worker] = example_gradient(
              tapes[worker], result.params, examples[order[pos]], schedule, rng,
              std::span<double>(element_grads)
                  .subspan(static_cast<std::size_t>(worker) * num_params, num_params));
        };
        if (width == 1) {
          work(0);
        } else {
          std::vector<std::jthread> pool;
          for (int w = 0; w < width; ++w)
            pool.emplace_back(work, w);
        }
        for (int w = 0; w < width; ++w) {
          const double *g = element_grads.data() + static_cast<std::size_t>(w) * num_params;
          for (std::size_t k = 0; k < num_params; ++k)
            batch_grad[k] += g[k];
          epoch_loss += element_loss[w];
        }
      }
      for (double &g : batch_grad)
        g /= count;

      adam.step(flat, batch_grad, lr);
      result.params = ScoreNetParams::unflatten(hyper, flat);
    }

    const EpochLog log{epoch, epoch_loss / n, lr};
    result.trace.push_back(log);
    if (on_epoch)
      on_epoch(log);
    lr *= cfg.lr_decay_rate;
  }
  return result;
}

} // namespace scoreconf
