#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace scoreconf {

enum class EdgeType : std::uint8_t {
  kSingle = 0,
  kDouble,
  kTriple,
  kAromatic,
  kVirtual2Hop,
  kVirtual3Hop,
};

inline constexpr int kNumEdgeTypes = 6;

constexpr bool is_virtual(EdgeType type) noexcept {
  return type == EdgeType::kVirtual2Hop || type == EdgeType::kVirtual3Hop;
}

std::string_view edge_type_name(EdgeType type) noexcept;
std::optional<EdgeType> parse_edge_type(std::string_view name) noexcept;

// Undirected edge stored with i < j.
struct Edge {
  int i = 0;
  int j = 0;
  EdgeType type = EdgeType::kSingle;

  friend bool operator==(const Edge &, const Edge &) = default;
};

// Bond as supplied by the caller; endpoints may come in either order.
struct BondSpec {
  int a = 0;
  int b = 0;
  EdgeType type = EdgeType::kSingle;
};

class MolecularGraph {
public:
  MolecularGraph() = default;

  std::span<const int> atoms() const noexcept { return atoms_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  int num_atoms() const noexcept { return static_cast<int>(atoms_.size()); }
  int num_edges() const noexcept { return static_cast<int>(edges_.size()); }
  int num_real_bonds() const noexcept { return num_real_bonds_; }

  // True once extend_graph has been applied (a graph with no 2-/3-hop pairs
  // can be extended yet hold zero virtual edges).
  bool is_extended() const noexcept { return extended_; }

  // Edge indices incident to atom i, ascending.
  std::span<const int> incident_edges(int i) const noexcept {
    return {incident_.data() + incident_offsets_[i],
            incident_.data() + incident_offsets_[i + 1]};
  }

  // Z != 1.
  std::vector<bool> heavy_mask() const;

  friend bool operator==(const MolecularGraph &a, const MolecularGraph &b) {
    return a.atoms_ == b.atoms_ && a.edges_ == b.edges_ &&
           a.extended_ == b.extended_;
  }

private:
  friend MolecularGraph build_graph(std::vector<int> atoms,
                                    std::span<const BondSpec> bonds);
  friend MolecularGraph extend_graph(const MolecularGraph &g);

  void index_incidence();

  std::vector<int> atoms_;
  std::vector<Edge> edges_;
  int num_real_bonds_ = 0;
  bool extended_ = false;
  std::vector<int> incident_offsets_{0};
  std::vector<int> incident_;
};

// Real bonds only; virtual edge types are rejected with kInvalidArgument.
MolecularGraph build_graph(std::vector<int> atoms,
                           std::span<const BondSpec> bonds);

// Adds one virtual_2hop edge per pair at bond distance exactly 2 and one
// virtual_3hop edge per pair at bond distance exactly 3.
MolecularGraph extend_graph(const MolecularGraph &g);

// Coordinates in Angstrom, one column per atom.
struct Conformation {
  Eigen::Matrix3Xd coords;

  Conformation() = default;
  explicit Conformation(Eigen::Matrix3Xd c) : coords(std::move(c)) {}

  int num_atoms() const noexcept { return static_cast<int>(coords.cols()); }
  bool all_finite() const { return coords.allFinite(); }
};

// One value per edge, in the graph's canonical edge order.
struct DistanceVector {
  Eigen::VectorXd values;

  int size() const noexcept { return static_cast<int>(values.size()); }
};

DistanceVector compute_distances(const MolecularGraph &g,
                                 const Conformation &conf);

} // namespace scoreconf
