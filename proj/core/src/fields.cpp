#include "scoreconf/fields.hpp"

#include <algorithm>
#include <string>

#include "scoreconf/error.hpp"

namespace scoreconf {

CoordinateScore assemble_coordinate_score(const MolecularGraph &g,
                                          const Conformation &conf,
                                          const DistanceVector &d,
                                          const Eigen::VectorXd &edge_scores,
                                          double min_distance) {
  if (conf.num_atoms() != g.num_atoms() || d.size() != g.num_edges() ||
      edge_scores.size() != g.num_edges())
    throw Error(ErrorCode::kSizeMismatch,
                "coordinates, distances and edge scores must match the graph");
  CoordinateScore out;
  out.vectors = Eigen::Matrix3Xd::Zero(3, g.num_atoms());
  const auto edges = g.edges();
  for (int k = 0; k < g.num_edges(); ++k) {
    const int i = edges[k].i;
    const int j = edges[k].j;
    const double dij = std::max(d.values[k], min_distance);
    const Eigen::Vector3d pull =
        (edge_scores[k] / dij) * (conf.coords.col(i) - conf.coords.col(j));
    out.vectors.col(i) += pull;
    out.vectors.col(j) -= pull;
  }
  return out;
}

CoordinateScore coordinate_score(const MolecularGraph &g, const Conformation &conf,
                                 double sigma, const ScoreNetParams &params) {
  const DistanceVector d = compute_distances(g, conf);
  for (int k = 0; k < d.size(); ++k)
    if (d.values[k] < kMinScoringDistance)
      throw Error(ErrorCode::kDegenerateDistance,
                  "edge " + std::to_string(k) + " has length " +
                      std::to_string(d.values[k]) + " A");
  return assemble_coordinate_score(g, conf, d, edge_score(g, d, sigma, params));
}

} // namespace scoreconf
