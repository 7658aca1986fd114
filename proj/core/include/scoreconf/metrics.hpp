#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "scoreconf/molgraph.hpp"

namespace scoreconf {

struct Alignment {
  double rmsd = 0.0;
  // Rigid motion mapping the first argument onto the second:
  // rotation * r + translation.
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

// Kabsch superposition over the masked atoms (reflections excluded).
// Requires at least three masked atoms.
Alignment kabsch_rmsd(const Conformation &conf, const Conformation &reference,
                      const std::vector<bool> &mask);

// table(r, g) = RMSD(references[r], generated[g]).
Eigen::MatrixXd rmsd_table(std::span<const Conformation> references,
                           std::span<const Conformation> generated,
                           const std::vector<bool> &mask);

struct CovMat {
  double cov = 0.0; // percent
  double mat = 0.0; // A
};

// From a reference x generated RMSD table.
CovMat cov_mat(const Eigen::MatrixXd &table, double delta);
double mis(const Eigen::MatrixXd &table, double delta);

CovMat cov_mat(std::span<const Conformation> generated,
               std::span<const Conformation> references,
               const std::vector<bool> &mask, double delta);
double mis(std::span<const Conformation> generated,
           std::span<const Conformation> references,
           const std::vector<bool> &mask, double delta);

// Biased (V-statistic) squared MMD with a Gaussian kernel; rows are samples.
double mmd(const Eigen::MatrixXd &x, const Eigen::MatrixXd &y, double bandwidth);

// Median pairwise Euclidean distance of the pooled rows; 1.0 if all rows
// coincide.
double median_heuristic_bandwidth(const Eigen::MatrixXd &x, const Eigen::MatrixXd &y);

// Absent entries: no heavy-atom edges (all three) or fewer than two (pair).
struct DistanceMmd {
  std::optional<double> single;
  std::optional<double> pair;
  std::optional<double> all;
};

DistanceMmd distance_mmd_report(const MolecularGraph &g,
                                std::span<const Conformation> generated,
                                std::span<const Conformation> references);

struct MoleculeEnsemble {
  const MolecularGraph *graph = nullptr;
  std::vector<Conformation> generated;
  std::vector<Conformation> references;
};

struct Summary {
  std::optional<double> mean;
  std::optional<double> median;
};

Summary summarize(std::vector<double> values);

struct ThresholdMetrics {
  double delta = 0.0;
  Summary cov;
  Summary mis;
};

struct EnsembleMetricsReport {
  int num_molecules = 0;
  double primary_delta = 0.5;
  std::vector<ThresholdMetrics> thresholds; // thresholds[0] is primary_delta
  Summary mat;
  Summary mmd_single;
  Summary mmd_pair;
  Summary mmd_all;

  const ThresholdMetrics &primary() const { return thresholds.front(); }
};

// Per-molecule metrics aggregated by mean and median over molecules. The
// primary threshold is evaluated first, then each sweep value.
EnsembleMetricsReport evaluate_ensembles(std::span<const MoleculeEnsemble> molecules,
                                         double primary_delta,
                                         std::span<const double> sweep);

} // namespace scoreconf
