#include "scoreconf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "scoreconf/error.hpp"

namespace scoreconf {
namespace {

void require_nonempty(std::span<const Conformation> set, const char *what) {
  if (set.empty())
    throw Error(ErrorCode::kEmptySet, std::string(what) + " set is empty");
}

double mean_kernel(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b,
                   double inv_two_bw2) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      total += std::exp(-(a.row(i) - b.row(j)).squaredNorm() * inv_two_bw2);
  return total / static_cast<double>(a.rows() * b.rows());
}

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1)
    return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lower + upper);
}

} // namespace

Alignment kabsch_rmsd(const Conformation &conf, const Conformation &reference,
                      const std::vector<bool> &mask) {
  if (conf.num_atoms() != reference.num_atoms() ||
      static_cast<int>(mask.size()) != conf.num_atoms())
    throw Error(ErrorCode::kSizeMismatch, "conformations and mask differ in atom count");
  std::vector<int> atoms;
  for (int i = 0; i < conf.num_atoms(); ++i)
    if (mask[i])
      atoms.push_back(i);
  const int n = static_cast<int>(atoms.size());
  if (n < 3)
    throw Error(ErrorCode::kTooFewAtoms,
                "alignment needs at least 3 atoms, mask selects " + std::to_string(n));

  Eigen::Matrix3Xd p(3, n), q(3, n);
  for (int k = 0; k < n; ++k) {
    p.col(k) = conf.coords.col(atoms[k]);
    q.col(k) = reference.coords.col(atoms[k]);
  }
  const Eigen::Vector3d pc = p.rowwise().mean();
  const Eigen::Vector3d qc = q.rowwise().mean();
  p.colwise() -= pc;
  q.colwise() -= qc;

  const Eigen::Matrix3d cov = p * q.transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
  flip(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;

  Alignment out;
  out.rotation = v * flip * u.transpose();
  out.translation = qc - out.rotation * pc;
  out.rmsd = std::sqrt((out.rotation * p - q).squaredNorm() / n);
  return out;
}

Eigen::MatrixXd rmsd_table(std::span<const Conformation> references,
                           std::span<const Conformation> generated,
                           const std::vector<bool> &mask) {
  Eigen::MatrixXd table(references.size(), generated.size());
  for (std::size_t r = 0; r < references.size(); ++r)
    for (std::size_t g = 0; g < generated.size(); ++g)
      table(r, g) = kabsch_rmsd(references[r], generated[g], mask).rmsd;
  return table;
}

CovMat cov_mat(const Eigen::MatrixXd &table, double delta) {
  if (table.rows() == 0 || table.cols() == 0)
    throw Error(ErrorCode::kEmptySet, "RMSD table is empty");
  int covered = 0;
  double total = 0.0;
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    const double best = table.row(r).minCoeff();
    covered += best < delta ? 1 : 0;
    total += best;
  }
  return {100.0 * covered / static_cast<double>(table.rows()),
          total / static_cast<double>(table.rows())};
}

double mis(const Eigen::MatrixXd &table, double delta) {
  if (table.rows() == 0 || table.cols() == 0)
    throw Error(ErrorCode::kEmptySet, "RMSD table is empty");
  int unmatched = 0;
  for (Eigen::Index g = 0; g < table.cols(); ++g)
    unmatched += (table.col(g).array() > delta).all() ? 1 : 0;
  return 100.0 * unmatched / static_cast<double>(table.cols());
}

CovMat cov_mat(std::span<const Conformation> generated,
               std::span<const Conformation> references,
               const std::vector<bool> &mask, double delta) {
  require_nonempty(generated, "generated");
  require_nonempty(references, "reference");
  return cov_mat(rmsd_table(references, generated, mask), delta);
}

double mis(std::span<const Conformation> generated,
           std::span<const Conformation> references,
           const std::vector<bool> &mask, double delta) {
  require_nonempty(generated, "generated");
  require_nonempty(references, "reference");
  return mis(rmsd_table(references, generated, mask), delta);
}

double mmd(const Eigen::MatrixXd &x, const Eigen::MatrixXd &y, double bandwidth) {
  if (x.rows() == 0 || y.rows() == 0)
    throw Error(ErrorCode::kEmptySet, "MMD needs non-empty sample sets");
  if (x.cols() != y.cols())
    throw Error(ErrorCode::kDimensionMismatch,
                "sample dimensions differ: " + std::to_string(x.cols()) + " vs " +
                    std::to_string(y.cols()));
  if (!(bandwidth > 0.0))
    throw Error(ErrorCode::kNonPositiveBandwidth,
                "bandwidth must be positive, got " + std::to_string(bandwidth));
  const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
  return mean_kernel(x, x, inv) + mean_kernel(y, y, inv) - 2.0 * mean_kernel(x, y, inv);
}

double median_heuristic_bandwidth(const Eigen::MatrixXd &x, const Eigen::MatrixXd &y) {
  Eigen::MatrixXd pooled(x.rows() + y.rows(), x.cols());
  pooled << x, y;
  std::vector<double> dists;
  dists.reserve(pooled.rows() * (pooled.rows() - 1) / 2);
  for (Eigen::Index i = 0; i < pooled.rows(); ++i)
    for (Eigen::Index j = i + 1; j < pooled.rows(); ++j)
      dists.push_back((pooled.row(i) - pooled.row(j)).norm());
  if (dists.empty())
    return 1.0;
  const double median = median_of(std::move(dists));
  return median > 0.0 ? median : 1.0;
}

DistanceMmd distance_mmd_report(const MolecularGraph &g,
                                std::span<const Conformation> generated,
                                std::span<const Conformation> references) {
  require_nonempty(generated, "generated");
  require_nonempty(references, "reference");
  const std::vector<bool> heavy = g.heavy_mask();
  std::vector<int> heavy_edges;
  const auto edges = g.edges();
  for (int k = 0; k < g.num_edges(); ++k)
    if (heavy[edges[k].i] && heavy[edges[k].j])
      heavy_edges.push_back(k);

  DistanceMmd out;
  const int m = static_cast<int>(heavy_edges.size());
  if (m == 0)
    return out;

  auto samples = [&](std::span<const Conformation> set) {
    Eigen::MatrixXd s(set.size(), m);
    for (std::size_t c = 0; c < set.size(); ++c) {
      const DistanceVector d = compute_distances(g, set[c]);
      for (int e = 0; e < m; ++e)
        s(c, e) = d.values[heavy_edges[e]];
    }
    return s;
  };
  const Eigen::MatrixXd x = samples(generated);
  const Eigen::MatrixXd y = samples(references);

  auto compare = [](const Eigen::MatrixXd &a, const Eigen::MatrixXd &b) {
    return mmd(a, b, median_heuristic_bandwidth(a, b));
  };

  double single = 0.0;
  for (int e = 0; e < m; ++e)
    single += compare(x.col(e), y.col(e));
  out.single = single / m;

  if (m >= 2) {
    double pair = 0.0;
    int pairs = 0;
    for (int e = 0; e < m; ++e)
      for (int f = e + 1; f < m; ++f) {
        Eigen::MatrixXd xa(x.rows(), 2), ya(y.rows(), 2);
        xa << x.col(e), x.col(f);
        ya << y.col(e), y.col(f);
        pair += compare(xa, ya);
        ++pairs;
      }
    out.pair = pair / pairs;
  }

  out.all = compare(x, y);
  return out;
}

Summary summarize(std::vector<double> values) {
  if (values.empty())
    return {};
  double total = 0.0;
  for (double v : values)
    total += v;
  Summary s;
  s.mean = total / static_cast<double>(values.size());
  s.median = median_of(std::move(values));
  return s;
}

EnsembleMetricsReport evaluate_ensembles(std::span<const MoleculeEnsemble> molecules,
                                         double primary_delta,
                                         std::span<const double> sweep) {
  if (molecules.empty())
    throw Error(ErrorCode::kEmptySet, "no molecules to evaluate");
  EnsembleMetricsReport report;
  report.num_molecules = static_cast<int>(molecules.size());
  report.primary_delta = primary_delta;

  std::vector<double> deltas{primary_delta};
  deltas.insert(deltas.end(), sweep.begin(), sweep.end());

  std::vector<std::vector<double>> cov(deltas.size()), mis_values(deltas.size());
  std::vector<double> mat, single, pair, all;
  for (const MoleculeEnsemble &mol : molecules) {
    require_nonempty(mol.generated, "generated");
    require_nonempty(mol.references, "reference");
    const Eigen::MatrixXd table =
        rmsd_table(mol.references, mol.generated, mol.graph->heavy_mask());
    for (std::size_t t = 0; t < deltas.size(); ++t) {
      cov[t].push_back(cov_mat(table, deltas[t]).cov);
      mis_values[t].push_back(mis(table, deltas[t]));
    }
    mat.push_back(cov_mat(table, primary_delta).mat);

    const DistanceMmd d = distance_mmd_report(*mol.graph, mol.generated, mol.references);
    if (d.single)
      single.push_back(*d.single);
    if (d.pair)
      pair.push_back(*d.pair);
    if (d.all)
      all.push_back(*d.all);
  }

  for (std::size_t t = 0; t < deltas.size(); ++t)
    report.thresholds.push_back(
        {deltas[t], summarize(std::move(cov[t])), summarize(std::move(mis_values[t]))});
  report.mat = summarize(std::move(mat));
  report.mmd_single = summarize(std::move(single));
  report.mmd_pair = summarize(std::move(pair));
  report.mmd_all = summarize(std::move(all));
  return report;
}

} // namespace scoreconf
