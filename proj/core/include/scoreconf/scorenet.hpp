#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "scoreconf/autodiff.hpp"
#include "scoreconf/molgraph.hpp"

namespace scoreconf {

struct ScoreNetHyper {
  int num_layers = 4;
  int hidden_dim = 256;
  int max_atomic_number = 10;
  int num_edge_types = kNumEdgeTypes;

  void validate() const;
  friend bool operator==(const ScoreNetHyper &, const ScoreNetHyper &) = default;
};

struct Dense {
  Eigen::MatrixXd weight; // out x in
  Eigen::VectorXd bias;   // out
};

// Two dense layers with a ReLU in between; the output layer is linear.
struct Mlp {
  Dense hidden;
  Dense output;
};

// Learnable weights of the distance score network. Flattening order is
// node_embed, edge_embed, layers[0..N), head; within a Dense the weight is
// row-major followed by the bias.
struct ScoreNetParams {
  ScoreNetHyper hyper;
  Mlp node_embed; // one-hot(Z) -> H -> H
  Mlp edge_embed; // one-hot(type) ++ d -> H -> H
  std::vector<Mlp> layers; // H -> H -> H, one per message-passing round
  Mlp head;                // 3H -> H -> 1

  std::vector<double> flatten() const;
  static ScoreNetParams unflatten(const ScoreNetHyper &hyper,
                                  std::span<const double> flat);
  bool all_finite() const;
};

std::size_t parameter_count(const ScoreNetHyper &hyper);

// He-style uniform init U(-sqrt(6/fan_in), sqrt(6/fan_in)); biases zero.
ScoreNetParams init_params(const ScoreNetHyper &hyper, std::uint64_t seed);

// Columns are per-node / per-edge embeddings.
struct Embeddings {
  Eigen::MatrixXd nodes; // H x |V|
  Eigen::MatrixXd edges; // H x |E|
};

Embeddings embed(const MolecularGraph &g, const DistanceVector &d,
                 const ScoreNetParams &params);

Eigen::MatrixXd message_pass(const MolecularGraph &g,
                             const Eigen::MatrixXd &node_embeddings,
                             const Eigen::MatrixXd &edge_embeddings,
                             const ScoreNetParams &params);

// s_theta(d) per edge, before division by sigma.
Eigen::VectorXd unconditional_edge_score(const MolecularGraph &g,
                                         const DistanceVector &d,
                                         const ScoreNetParams &params);

// s_theta(d) / sigma per edge.
Eigen::VectorXd edge_score(const MolecularGraph &g, const DistanceVector &d,
                           double sigma, const ScoreNetParams &params);

// Network parameters lifted onto a tape as leaves, in flatten() order.
class TapeParams {
public:
  TapeParams(ad::Tape &tape, const ScoreNetParams &params);

  const ScoreNetHyper &hyper() const noexcept { return hyper_; }
  // All leaves in flatten() order; leaves()[k].index() == first_index() + k.
  std::span<const ad::Var> leaves() const noexcept { return leaves_; }

  struct DenseView {
    std::span<const ad::Var> weight; // row-major, out x in
    std::span<const ad::Var> bias;
    int in = 0;
    int out = 0;
  };
  struct MlpView {
    DenseView hidden;
    DenseView output;
  };

  const MlpView &node_embed() const noexcept { return node_embed_; }
  const MlpView &edge_embed() const noexcept { return edge_embed_; }
  const MlpView &layer(int l) const { return layers_[l]; }
  const MlpView &head() const noexcept { return head_; }

private:
  ScoreNetHyper hyper_;
  std::vector<ad::Var> leaves_;
  MlpView node_embed_;
  MlpView edge_embed_;
  std::vector<MlpView> layers_;
  MlpView head_;
};

// The same network rebuilt scalar-by-scalar on a tape. Distances are tape
// variables, so gradients flow back to whatever produced them. Returns unconditional scores s_theta(d), one Var per edge.
std::vector<ad::Var> unconditional_edge_score_on_tape(
    ad::Tape &tape, const TapeParams &params, const MolecularGraph &g,
    std::span<const ad::Var> distances);

} // namespace scoreconf
