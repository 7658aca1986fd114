#include "scoreconf/molgraph.hpp"

#include <algorithm>
#include <queue>
#include <string>

#include "scoreconf/error.hpp"

namespace scoreconf {
namespace {

constexpr std::string_view kEdgeTypeNames[kNumEdgeTypes] = {
    "single", "double", "triple", "aromatic", "virtual_2hop", "virtual_3hop"};

bool edge_less(const Edge &a, const Edge &b) {
  return a.i != b.i ? a.i < b.i : a.j < b.j;
}

} // namespace

std::string_view edge_type_name(EdgeType type) noexcept {
  return kEdgeTypeNames[static_cast<int>(type)];
}

std::optional<EdgeType> parse_edge_type(std::string_view name) noexcept {
  for (int k = 0; k < kNumEdgeTypes; ++k)
    if (kEdgeTypeNames[k] == name)
      return static_cast<EdgeType>(k);
  return std::nullopt;
}

std::vector<bool> MolecularGraph::heavy_mask() const {
  std::vector<bool> mask(atoms_.size());
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    mask[i] = atoms_[i] != 1;
  return mask;
}

void MolecularGraph::index_incidence() {
  const int n = num_atoms();
  std::vector<int> degree(n, 0);
  for (const Edge &e : edges_) {
    ++degree[e.i];
    ++degree[e.j];
  }
  incident_offsets_.assign(n + 1, 0);
  for (int i = 0; i < n; ++i)
    incident_offsets_[i + 1] = incident_offsets_[i] + degree[i];
  incident_.assign(incident_offsets_[n], 0);
  std::vector<int> fill(incident_offsets_.begin(), incident_offsets_.end() - 1);
  for (int k = 0; k < num_edges(); ++k) {
    incident_[fill[edges_[k].i]++] = k;
    incident_[fill[edges_[k].j]++] = k;
  }
}

MolecularGraph build_graph(std::vector<int> atoms,
                           std::span<const BondSpec> bonds) {
  const int n = static_cast<int>(atoms.size());
  for (int i = 0; i < n; ++i)
    if (atoms[i] < 1)
      throw Error(ErrorCode::kInvalidArgument,
                  "atom " + std::to_string(i) + " has non-positive charge " +
                      std::to_string(atoms[i]));

  MolecularGraph g;
  g.atoms_ = std::move(atoms);
  g.edges_.reserve(bonds.size());
  for (const BondSpec &b : bonds) {
    if (b.a < 0 || b.a >= n || b.b < 0 || b.b >= n)
      throw Error(ErrorCode::kIndexOutOfRange,
                  "bond (" + std::to_string(b.a) + ", " + std::to_string(b.b) +
                      ") references a missing atom");
    if (b.a == b.b)
      throw Error(ErrorCode::kSelfLoop,
                  "bond on atom " + std::to_string(b.a) + " to itself");
    if (is_virtual(b.type))
      throw Error(ErrorCode::kInvalidArgument,
                  "virtual edges are added by extend_graph, not supplied");
    g.edges_.push_back({std::min(b.a, b.b), std::max(b.a, b.b), b.type});
  }
  std::sort(g.edges_.begin(), g.edges_.end(), edge_less);
  for (std::size_t k = 1; k < g.edges_.size(); ++k)
    if (g.edges_[k].i == g.edges_[k - 1].i && g.edges_[k].j == g.edges_[k - 1].j)
      throw Error(ErrorCode::kDuplicateBond,
                  "duplicate bond (" + std::to_string(g.edges_[k].i) + ", " +
                      std::to_string(g.edges_[k].j) + ")");
  g.num_real_bonds_ = static_cast<int>(g.edges_.size());
  g.index_incidence();
  return g;
}

MolecularGraph extend_graph(const MolecularGraph &g) {
  if (g.extended_ || std::any_of(g.edges_.begin(), g.edges_.end(),
                                 [](const Edge &e) { return is_virtual(e.type); }))
    throw Error(ErrorCode::kAlreadyExtended, "graph already carries virtual edges");

  const int n = g.num_atoms();
  std::vector<std::vector<int>> adjacency(n);
  for (const Edge &e : g.edges_) {
    adjacency[e.i].push_back(e.j);
    adjacency[e.j].push_back(e.i);
  }

  MolecularGraph out = g;
  std::vector<int> hops(n);
  for (int src = 0; src < n; ++src) {
    std::fill(hops.begin(), hops.end(), -1);
    hops[src] = 0;
    std::queue<int> frontier;
    frontier.push(src);
    while (!frontier.empty()) {
      const int u = frontier.front();
      frontier.pop();
      if (hops[u] == 3)
        continue;
      for (int v : adjacency[u])
        if (hops[v] < 0) {
          hops[v] = hops[u] + 1;
          frontier.push(v);
        }
    }
    for (int dst = src + 1; dst < n; ++dst) {
      if (hops[dst] == 2)
        out.edges_.push_back({src, dst, EdgeType::kVirtual2Hop});
      else if (hops[dst] == 3)
        out.edges_.push_back({src, dst, EdgeType::kVirtual3Hop});
    }
  }
  std::sort(out.edges_.begin(), out.edges_.end(), edge_less);
  out.extended_ = true;
  out.index_incidence();
  return out;
}

DistanceVector compute_distances(const MolecularGraph &g,
                                 const Conformation &conf) {
  if (conf.num_atoms() != g.num_atoms())
    throw Error(ErrorCode::kSizeMismatch,
                "conformation has " + std::to_string(conf.num_atoms()) +
                    " atoms, graph has " + std::to_string(g.num_atoms()));
  DistanceVector d;
  d.values.resize(g.num_edges());
  const auto edges = g.edges();
  for (int k = 0; k < g.num_edges(); ++k)
    d.values[k] = (conf.coords.col(edges[k].i) - conf.coords.col(edges[k].j)).norm();
  return d;
}

} // namespace scoreconf
