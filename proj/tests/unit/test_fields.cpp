#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "chain_rule.hpp"
#include "oracles.hpp"
#include "scoreconf/error.hpp"
#include "scoreconf/fields.hpp"

using namespace scoreconf;

namespace {

ScoreNetParams random_params(std::uint64_t seed, int h = 8, int n = 2) {
  ScoreNetHyper hy;
  hy.hidden_dim = h;
  hy.num_layers = n;
  std::vector<double> flat = init_params(hy, seed).flatten();
  std::mt19937_64 rng(seed + 17);
  std::normal_distribution<double> noise(0.0, 0.1);
  for (double &w : flat)
    w += noise(rng);
  return ScoreNetParams::unflatten(hy, flat);
}

MolecularGraph pair_graph() {
  const std::vector<BondSpec> bonds{{0, 1, EdgeType::kSingle}};
  return extend_graph(build_graph({6, 6}, bonds));
}

} // namespace

TEST(AssembleCoordinateScore, TwoAtomsForcedScore) {
  const MolecularGraph g = pair_graph();
  Eigen::Matrix3Xd x = Eigen::Matrix3Xd::Zero(3, 2);
  x(0, 1) = 1.0;
  const Conformation c(x);
  const double score = 0.75;
  const CoordinateScore s =
      assemble_coordinate_score(g, c, compute_distances(g, c), Eigen::VectorXd::Constant(1, score));
  EXPECT_EQ(s.vectors.col(0), Eigen::Vector3d(-score, 0, 0));
  EXPECT_EQ(s.vectors.col(1), Eigen::Vector3d(score, 0, 0));
}

TEST(AssembleCoordinateScore, ZeroEdgeScoresGiveZero) {
  std::mt19937_64 rng(2);
  const MolecularGraph g = extend_graph(oracle::random_graph(rng, 7));
  const Conformation c = oracle::random_conformation(rng, 7);
  const CoordinateScore s = assemble_coordinate_score(g, c, compute_distances(g, c),
                                                      Eigen::VectorXd::Zero(g.num_edges()));
  EXPECT_EQ(s.vectors.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(s.num_atoms(), 7);
}

TEST(AssembleCoordinateScore, SingleEdgeContributionsCancelExactly) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 2);
  const MolecularGraph g = pair_graph();
  for (int trial = 0; trial < 100; ++trial) {
    const Conformation c = oracle::random_conformation(rng, 2);
    const CoordinateScore s = assemble_coordinate_score(
        g, c, compute_distances(g, c), Eigen::VectorXd::Constant(1, u(rng)));
    EXPECT_EQ(s.vectors.col(0) + s.vectors.col(1), Eigen::Vector3d::Zero());
  }
}

TEST(AssembleCoordinateScore, ClampedDivision) {
  const MolecularGraph g = pair_graph();
  Eigen::Matrix3Xd x = Eigen::Matrix3Xd::Zero(3, 2);
  x(0, 1) = 1e-6;
  const Conformation c(x);
  const CoordinateScore s = assemble_coordinate_score(
      g, c, compute_distances(g, c), Eigen::VectorXd::Ones(1), 1e-3);
  EXPECT_NEAR(s.vectors(0, 1), 1e-6 / 1e-3, 1e-15);
}

TEST(CoordinateScore, NetForceVanishes) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 7;
    const MolecularGraph g = extend_graph(oracle::random_graph(rng, n));
    const Conformation c = oracle::random_conformation(rng, n);
    const CoordinateScore s = coordinate_score(g, c, 0.5, random_params(trial));
    const double scale = std::max(1.0, s.vectors.cwiseAbs().maxCoeff());
    EXPECT_LE(s.vectors.rowwise().sum().cwiseAbs().maxCoeff(), 1e-13 * scale);
  }
}

TEST(CoordinateScore, DegenerateDistance) {
  const MolecularGraph g = pair_graph();
  Eigen::Matrix3Xd x = Eigen::Matrix3Xd::Zero(3, 2);
  x(2, 1) = 1e-9;
  try {
    coordinate_score(g, Conformation(x), 1.0, random_params(0));
    FAIL() << "expected DegenerateDistance";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateDistance);
  }
}

TEST(CoordinateScore, MatchesAutodiffThroughTheCompositeMap) {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5;
    const MolecularGraph g = extend_graph(oracle::random_graph(rng, n));
    const Conformation c = oracle::random_conformation(rng, n);
    const ScoreNetParams p = random_params(trial, 6, 2);
    const double sigma = 0.3;
    const CoordinateScore s = coordinate_score(g, c, sigma, p);
    const oracle::TapeScore t = oracle::tape_coordinate_score(g, c, sigma, p);
    EXPECT_LE(oracle::relative_error(s.vectors, t.gradient), 1e-10) << "trial " << trial;
    const Eigen::Matrix3Xd fd = oracle::finite_difference_score(g, c, t.edge_scores, 1e-5);
    EXPECT_LE(oracle::relative_error(s.vectors, fd), 1e-6) << "trial " << trial;
  }
}

TEST(CoordinateScore, AnyScalarFunctionOfDistances) {
  // phi(d) = sum_k a_k d_k^2 + b_k sqrt(d_k): its tape gradient in R must
  // equal the hand-assembled chain rule fed with dphi/dd_k.
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 7;
    const MolecularGraph g = extend_graph(oracle::random_graph(rng, n));
    const Conformation c = oracle::random_conformation(rng, n);
    ad::Tape t;
    std::vector<ad::Var> r;
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < 3; ++a)
        r.push_back(t.lift(c.coords(a, i)));
    const auto d = oracle::tape_distances(t, g, r);
    std::vector<ad::Var> terms;
    for (const ad::Var &dk : d) {
      terms.push_back(u(rng) * square(dk));
      terms.push_back(u(rng) * sqrt(dk));
    }
    const ad::Gradient grad = t.backward(t.sum(terms));
    Eigen::VectorXd dphi(g.num_edges());
    for (int k = 0; k < g.num_edges(); ++k)
      dphi[k] = grad[d[k]];
    Eigen::Matrix3Xd want(3, n);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < 3; ++a)
        want(a, i) = grad[r[3 * i + a]];
    const CoordinateScore s = assemble_coordinate_score(g, c, compute_distances(g, c), dphi);
    EXPECT_LE(oracle::relative_error(s.vectors, want), 1e-6);
  }
}

TEST(CoordinateScore, RotationEquivariance) {
  std::mt19937_64 rng(2718);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 7;
    const MolecularGraph g = extend_graph(oracle::random_graph(rng, n));
    const Conformation c = oracle::random_conformation(rng, n);
    const ScoreNetParams p = random_params(trial, 6, 2);
    const Eigen::Matrix3d rot = oracle::random_rotation(rng);
    const Eigen::Vector3d shift(4 * normal(rng), 4 * normal(rng), 4 * normal(rng));
    const CoordinateScore a = coordinate_score(g, oracle::moved(c, rot, shift), 0.2, p);
    const CoordinateScore b = coordinate_score(g, c, 0.2, p);
    EXPECT_LE(oracle::max_abs(a.vectors - rot * b.vectors), 1e-7) << "trial " << trial;
  }
}
