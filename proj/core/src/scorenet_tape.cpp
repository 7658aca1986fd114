#include <string>

#include "scoreconf/error.hpp"
#include "scoreconf/scorenet.hpp"

namespace scoreconf {
namespace {

using ad::Var;

// Carves consecutive views out of the flat leaf array.
class LeafCursor {
public:
  explicit LeafCursor(std::span<const Var> leaves) : leaves_(leaves) {}

  TapeParams::DenseView dense(int out, int in) {
    TapeParams::DenseView v;
    v.in = in;
    v.out = out;
    v.weight = leaves_.subspan(pos_, static_cast<std::size_t>(out) * in);
    pos_ += static_cast<std::size_t>(out) * in;
    v.bias = leaves_.subspan(pos_, out);
    pos_ += out;
    return v;
  }

  TapeParams::MlpView mlp(int in, int hidden, int out) {
    TapeParams::MlpView m;
    m.hidden = dense(hidden, in);
    m.output = dense(out, hidden);
    return m;
  }

private:
  std::span<const Var> leaves_;
  std::size_t pos_ = 0;
};

std::vector<Var> dense_forward(ad::Tape &tape, const TapeParams::DenseView &d,
                               std::span<const Var> x, bool apply_relu) {
  std::vector<Var> out(d.out);
  for (int r = 0; r < d.out; ++r) {
    Var y = tape.dot(d.weight.subspan(static_cast<std::size_t>(r) * d.in, d.in),
                     x, d.bias[r]);
    out[r] = apply_relu ? tape.relu(y) : y;
  }
  return out;
}

std::vector<Var> mlp_output(ad::Tape &tape, const TapeParams::MlpView &m,
                            std::span<const Var> input) {
  const std::vector<Var> hidden = dense_forward(tape, m.hidden, input, true);
  return dense_forward(tape, m.output, hidden, false);
}

} // namespace

TapeParams::TapeParams(ad::Tape &tape, const ScoreNetParams &params)
    : hyper_(params.hyper) {
  const std::vector<double> flat = params.flatten();
  leaves_.reserve(flat.size());
  for (double w : flat)
    leaves_.push_back(tape.lift(w));

  const int h = hyper_.hidden_dim;
  LeafCursor cursor(leaves_);
  node_embed_ = cursor.mlp(hyper_.max_atomic_number, h, h);
  edge_embed_ = cursor.mlp(hyper_.num_edge_types + 1, h, h);
  for (int l = 0; l < hyper_.num_layers; ++l)
    layers_.push_back(cursor.mlp(h, h, h));
  head_ = cursor.mlp(3 * h, h, 1);
}

std::vector<Var> unconditional_edge_score_on_tape(ad::Tape &tape,
                                                  const TapeParams &params,
                                                  const MolecularGraph &g,
                                                  std::span<const Var> distances) {
  if (static_cast<int>(distances.size()) != g.num_edges())
    throw Error(ErrorCode::kSizeMismatch,
                "distance vector has " + std::to_string(distances.size()) +
                    " entries, graph has " + std::to_string(g.num_edges()) +
                    " edges");
  const ScoreNetHyper &hyper = params.hyper();
  const int h = hyper.hidden_dim;
  const int n = g.num_atoms();
  const int m = g.num_edges();
  const auto atoms = g.atoms();
  const auto edges = g.edges();

  // Node embedding: the one-hot input selects one weight column.
  std::vector<std::vector<Var>> node(n);
  {
    const auto &hidden = params.node_embed().hidden;
    for (int i = 0; i < n; ++i) {
      if (atoms[i] > hyper.max_atomic_number)
        throw Error(ErrorCode::kUnknownAtomType,
                    "atomic number " + std::to_string(atoms[i]) +
                        " exceeds max_atomic_number " +
                        std::to_string(hyper.max_atomic_number));
      const int col = atoms[i] - 1;
      std::vector<Var> act(h);
      for (int r = 0; r < h; ++r)
        act[r] = tape.relu(tape.add(hidden.weight[r * hidden.in + col], hidden.bias[r]));
      node[i] = dense_forward(tape, params.node_embed().output, act, false);
    }
  }

  // Edge embedding: one-hot(type) selects a column, the distance enters
  // through the last column.
  std::vector<std::vector<Var>> edge(m);
  {
    const auto &hidden = params.edge_embed().hidden;
    for (int k = 0; k < m; ++k) {
      const int col = static_cast<int>(edges[k].type);
      std::vector<Var> act(h);
      for (int r = 0; r < h; ++r) {
        const Var parts[3] = {hidden.weight[r * hidden.in + col],
                              tape.mul(hidden.weight[r * hidden.in + hyper.num_edge_types],
                                       distances[k]),
                              hidden.bias[r]};
        act[r] = tape.relu(tape.sum(parts));
      }
      edge[k] = dense_forward(tape, params.edge_embed().output, act, false);
    }
  }

  // Message passing over incident edges.
  for (int l = 0; l < hyper.num_layers; ++l) {
    std::vector<std::vector<Var>> next(n);
    for (int i = 0; i < n; ++i) {
      std::vector<Var> aggregate(h);
      for (int r = 0; r < h; ++r) {
        std::vector<Var> terms{node[i][r]};
        for (int k : g.incident_edges(i)) {
          const int j = edges[k].i == i ? edges[k].j : edges[k].i;
          terms.push_back(tape.relu(tape.add(node[j][r], edge[k][r])));
        }
        aggregate[r] = tape.sum(terms);
      }
      next[i] = mlp_output(tape, params.layer(l), aggregate);
    }
    node = std::move(next);
  }

  // Readout h_i ++ h_j ++ h_e with i < j.
  std::vector<Var> scores(m);
  std::vector<Var> readout(3 * h);
  for (int k = 0; k < m; ++k) {
    for (int r = 0; r < h; ++r) {
      readout[r] = node[edges[k].i][r];
      readout[h + r] = node[edges[k].j][r];
      readout[2 * h + r] = edge[k][r];
    }
    scores[k] = mlp_output(tape, params.head(), readout)[0];
  }
  return scores;
}

} // namespace scoreconf
