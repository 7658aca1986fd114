#include "scoreconf/scorenet.hpp"

#include <cmath>
#include <random>
#include <string>

#include "scoreconf/error.hpp"

namespace scoreconf {
namespace {

Dense make_dense(int out, int in) {
  return {Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)};
}

Mlp make_mlp(int in, int hidden, int out) {
  return {make_dense(hidden, in), make_dense(out, hidden)};
}

ScoreNetParams zero_params(const ScoreNetHyper &hyper) {
  hyper.validate();
  const int h = hyper.hidden_dim;
  ScoreNetParams p;
  p.hyper = hyper;
  p.node_embed = make_mlp(hyper.max_atomic_number, h, h);
  p.edge_embed = make_mlp(hyper.num_edge_types + 1, h, h);
  p.layers.assign(hyper.num_layers, make_mlp(h, h, h));
  p.head = make_mlp(3 * h, h, 1);
  return p;
}

// P is ScoreNetParams or const ScoreNetParams.
template <class P, class Fn> void for_each_dense(P &p, Fn &&fn) {
  auto visit = [&](auto &m) {
    fn(m.hidden);
    fn(m.output);
  };
  visit(p.node_embed);
  visit(p.edge_embed);
  for (auto &m : p.layers)
    visit(m);
  visit(p.head);
}

// Columnwise: relu(W1 x + b1) -> W2 . + b2.
Eigen::MatrixXd mlp_forward(const Mlp &m, const Eigen::MatrixXd &x) {
  Eigen::MatrixXd hidden = m.hidden.weight * x;
  hidden.colwise() += m.hidden.bias;
  hidden = hidden.cwiseMax(0.0);
  Eigen::MatrixXd out = m.output.weight * hidden;
  out.colwise() += m.output.bias;
  return out;
}

} // namespace

void ScoreNetHyper::validate() const {
  if (num_layers < 1 || hidden_dim < 1 || max_atomic_number < 1 ||
      num_edge_types != kNumEdgeTypes)
    throw Error(ErrorCode::kInvalidArgument,
                "invalid network hyperparameters (layers=" +
                    std::to_string(num_layers) +
                    ", hidden=" + std::to_string(hidden_dim) +
                    ", max_z=" + std::to_string(max_atomic_number) +
                    ", edge_types=" + std::to_string(num_edge_types) + ")");
}

std::size_t parameter_count(const ScoreNetHyper &hyper) {
  hyper.validate();
  const std::size_t h = hyper.hidden_dim;
  auto mlp = [](std::size_t in, std::size_t hid, std::size_t out) {
    return hid * in + hid + out * hid + out;
  };
  return mlp(hyper.max_atomic_number, h, h) +
         mlp(hyper.num_edge_types + 1, h, h) +
         hyper.num_layers * mlp(h, h, h) + mlp(3 * h, h, 1);
}

std::vector<double> ScoreNetParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count(hyper));
  for_each_dense(*this, [&](const Dense &d) {
    for (Eigen::Index r = 0; r < d.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < d.weight.cols(); ++c)
        flat.push_back(d.weight(r, c));
    for (Eigen::Index r = 0; r < d.bias.size(); ++r)
      flat.push_back(d.bias[r]);
  });
  return flat;
}

ScoreNetParams ScoreNetParams::unflatten(const ScoreNetHyper &hyper,
                                         std::span<const double> flat) {
  const std::size_t expected = parameter_count(hyper);
  if (flat.size() != expected)
    throw Error(ErrorCode::kSizeMismatch,
                "parameter vector has " + std::to_string(flat.size()) +
                    " entries, expected " + std::to_string(expected));
  ScoreNetParams p = zero_params(hyper);
  std::size_t k = 0;
  for_each_dense(p, [&](Dense &d) {
    for (Eigen::Index r = 0; r < d.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < d.weight.cols(); ++c)
        d.weight(r, c) = flat[k++];
    for (Eigen::Index r = 0; r < d.bias.size(); ++r)
      d.bias[r] = flat[k++];
  });
  return p;
}

bool ScoreNetParams::all_finite() const {
  bool finite = true;
  for_each_dense(*this, [&](const Dense &d) {
    finite = finite && d.weight.allFinite() && d.bias.allFinite();
  });
  return finite;
}

ScoreNetParams init_params(const ScoreNetHyper &hyper, std::uint64_t seed) {
  ScoreNetParams p = zero_params(hyper);
  std::mt19937_64 rng(seed);
  for_each_dense(p, [&](Dense &d) {
    const double limit = std::sqrt(6.0 / static_cast<double>(d.weight.cols()));
    std::uniform_real_distribution<double> uniform(-limit, limit);
    for (Eigen::Index r = 0; r < d.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < d.weight.cols(); ++c)
        d.weight(r, c) = uniform(rng);
  });
  return p;
}

Embeddings embed(const MolecularGraph &g, const DistanceVector &d,
                 const ScoreNetParams &params) {
  if (d.size() != g.num_edges())
    throw Error(ErrorCode::kSizeMismatch,
                "distance vector has " + std::to_string(d.size()) +
                    " entries, graph has " + std::to_string(g.num_edges()) +
                    " edges");
  const ScoreNetHyper &hyper = params.hyper;

  Eigen::MatrixXd atom_onehot =
      Eigen::MatrixXd::Zero(hyper.max_atomic_number, g.num_atoms());
  const auto atoms = g.atoms();
  for (int i = 0; i < g.num_atoms(); ++i) {
    if (atoms[i] > hyper.max_atomic_number)
      throw Error(ErrorCode::kUnknownAtomType,
                  "atomic number " + std::to_string(atoms[i]) +
                      " exceeds max_atomic_number " +
                      std::to_string(hyper.max_atomic_number));
    atom_onehot(atoms[i] - 1, i) = 1.0;
  }

  Eigen::MatrixXd edge_features =
      Eigen::MatrixXd::Zero(hyper.num_edge_types + 1, g.num_edges());
  const auto edges = g.edges();
  for (int k = 0; k < g.num_edges(); ++k) {
    edge_features(static_cast<int>(edges[k].type), k) = 1.0;
    edge_features(hyper.num_edge_types, k) = d.values[k];
  }

  return {mlp_forward(params.node_embed, atom_onehot),
          mlp_forward(params.edge_embed, edge_features)};
}

Eigen::MatrixXd message_pass(const MolecularGraph &g,
                             const Eigen::MatrixXd &node_embeddings,
                             const Eigen::MatrixXd &edge_embeddings,
                             const ScoreNetParams &params) {
  const auto edges = g.edges();
  Eigen::MatrixXd h = node_embeddings;
  Eigen::MatrixXd aggregate;
  for (const Mlp &layer : params.layers) {
    aggregate = h;
    for (int k = 0; k < g.num_edges(); ++k) {
      const int i = edges[k].i;
      const int j = edges[k].j;
      aggregate.col(i) += (h.col(j) + edge_embeddings.col(k)).cwiseMax(0.0);
      aggregate.col(j) += (h.col(i) + edge_embeddings.col(k)).cwiseMax(0.0);
    }
    h = mlp_forward(layer, aggregate);
  }
  return h;
}

Eigen::VectorXd unconditional_edge_score(const MolecularGraph &g,
                                         const DistanceVector &d,
                                         const ScoreNetParams &params) {
  const Embeddings emb = embed(g, d, params);
  const Eigen::MatrixXd h = message_pass(g, emb.nodes, emb.edges, params);
  const int hd = params.hyper.hidden_dim;
  const auto edges = g.edges();
  Eigen::MatrixXd readout(3 * hd, g.num_edges());
  for (int k = 0; k < g.num_edges(); ++k) {
    readout.col(k).segment(0, hd) = h.col(edges[k].i);
    readout.col(k).segment(hd, hd) = h.col(edges[k].j);
    readout.col(k).segment(2 * hd, hd) = emb.edges.col(k);
  }
  return mlp_forward(params.head, readout).row(0).transpose();
}

Eigen::VectorXd edge_score(const MolecularGraph &g, const DistanceVector &d,
                           double sigma, const ScoreNetParams &params) {
  if (!(sigma > 0.0))
    throw Error(ErrorCode::kNonPositiveSigma,
                "noise level must be positive, got " + std::to_string(sigma));
  return unconditional_edge_score(g, d, params) / sigma;
}

} // namespace scoreconf
