#pragma once

#include <Eigen/Core>

#include "scoreconf/molgraph.hpp"
#include "scoreconf/scorenet.hpp"

namespace scoreconf {

// Per-atom gradient of the log-density with respect to coordinates (1/A),
// one column per atom.
struct CoordinateScore {
  Eigen::Matrix3Xd vectors;

  int num_atoms() const noexcept { return static_cast<int>(vectors.cols()); }
};

// Distances below this raise kDegenerateDistance in coordinate_score.
inline constexpr double kMinScoringDistance = 1e-8;

// Chain rule from edge scores to atoms: edge (i, j) adds
// s_ij / d_ij * (r_i - r_j) to atom i and the negation to atom j. The
// division uses max(d_ij, min_distance); pass 0 for no clamping.
CoordinateScore assemble_coordinate_score(const MolecularGraph &g,
                                          const Conformation &conf,
                                          const DistanceVector &d,
                                          const Eigen::VectorXd &edge_scores,
                                          double min_distance = 0.0);

CoordinateScore coordinate_score(const MolecularGraph &g, const Conformation &conf,
                                 double sigma, const ScoreNetParams &params);

} // namespace scoreconf
