#include "scoreconf/toydata.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Geometry>

#include "scoreconf/error.hpp"
#include "scoreconf/random.hpp"

namespace scoreconf {
namespace {

constexpr std::array<std::string_view, 3> kFamilyNames = {
    "rigid_triangle", "rigid_chain", "two_mode_chain"};

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

// Places d so that |cd| = bond, angle(b, c, d) = angle and
// dihedral(a, b, c, d) = dihedral (radians).
Eigen::Vector3d place_atom(const Eigen::Vector3d &a, const Eigen::Vector3d &b,
                           const Eigen::Vector3d &c, double bond, double angle,
                           double dihedral) {
  const Eigen::Vector3d bc = (c - b).normalized();
  const Eigen::Vector3d n = (b - a).cross(bc).normalized();
  const Eigen::Vector3d m = n.cross(bc);
  const Eigen::Vector3d local(-bond * std::cos(angle),
                              bond * std::sin(angle) * std::cos(dihedral),
                              bond * std::sin(angle) * std::sin(dihedral));
  return c + local.x() * bc + local.y() * m + local.z() * n;
}

Eigen::Matrix3Xd chain_geometry(int n, double bond, double angle,
                                const std::vector<double> &dihedrals) {
  Eigen::Matrix3Xd x = Eigen::Matrix3Xd::Zero(3, n);
  if (n > 1)
    x.col(1) = Eigen::Vector3d(bond, 0, 0);
  if (n > 2)
    x.col(2) = x.col(1) + bond * Eigen::Vector3d(-std::cos(angle), std::sin(angle), 0);
  for (int k = 3; k < n; ++k)
    x.col(k) = place_atom(x.col(k - 3), x.col(k - 2), x.col(k - 1), bond, angle,
                          dihedrals[k - 3]);
  return x;
}

MolecularGraph chain_graph(int n, int z) {
  std::vector<BondSpec> bonds;
  for (int i = 0; i + 1 < n; ++i)
    bonds.push_back({i, i + 1, EdgeType::kSingle});
  return extend_graph(build_graph(std::vector<int>(n, z), bonds));
}

Eigen::Matrix3d random_rotation(Rng &rng) {
  std::normal_distribution<double> normal;
  Eigen::Quaterniond q(normal(rng), normal(rng), normal(rng), normal(rng));
  q.normalize();
  return q.toRotationMatrix();
}

} // namespace

std::string_view toy_family_name(ToyFamily family) noexcept {
  return kFamilyNames[static_cast<int>(family)];
}

std::optional<ToyFamily> parse_toy_family(std::string_view name) noexcept {
  for (std::size_t k = 0; k < kFamilyNames.size(); ++k)
    if (kFamilyNames[k] == name)
      return static_cast<ToyFamily>(k);
  return std::nullopt;
}

void ToySpec::validate() const {
  auto fail = [](const std::string &msg) { throw Error(ErrorCode::kInvalidSpec, msg); };
  if (!(bond_length > 0.0))
    fail("bond_length must be positive");
  if (!(jitter_std >= 0.0))
    fail("jitter_std must be non-negative");
  if (count < 1)
    fail("count must be at least 1");
  if (atomic_number < 1)
    fail("atomic_number must be positive");
  if (family != ToyFamily::kRigidTriangle && !(angle_deg > 0.0 && angle_deg < 180.0))
    fail("angle_deg must lie in (0, 180)");
  if (family == ToyFamily::kRigidChain && num_atoms < 2)
    fail("rigid_chain needs at least 2 atoms");
}

std::vector<TrainingExample> generate(const ToySpec &spec) {
  spec.validate();
  int n = 0;
  switch (spec.family) {
  case ToyFamily::kRigidTriangle: n = 3; break;
  case ToyFamily::kRigidChain: n = spec.num_atoms; break;
  case ToyFamily::kTwoModeChain: n = 4; break;
  }
  const MolecularGraph graph = [&] {
    if (spec.family != ToyFamily::kRigidTriangle)
      return chain_graph(n, spec.atomic_number);
    const BondSpec ring[] = {{0, 1, EdgeType::kSingle},
                             {1, 2, EdgeType::kSingle},
                             {0, 2, EdgeType::kSingle}};
    return extend_graph(build_graph({spec.atomic_number, spec.atomic_number,
                                     spec.atomic_number},
                                    ring));
  }();

  const double angle = radians(spec.angle_deg);
  std::vector<TrainingExample> out;
  out.reserve(spec.count);
  for (int s = 0; s < spec.count; ++s) {
    Rng rng = derive_rng(spec.seed, {static_cast<std::uint64_t>(s)});
    Eigen::Matrix3Xd x;
    switch (spec.family) {
    case ToyFamily::kRigidTriangle: {
      const double b = spec.bond_length;
      x.resize(3, 3);
      x.col(0) = Eigen::Vector3d::Zero();
      x.col(1) = Eigen::Vector3d(b, 0, 0);
      x.col(2) = Eigen::Vector3d(0.5 * b, 0.5 * std::sqrt(3.0) * b, 0);
      break;
    }
    case ToyFamily::kRigidChain:
      x = chain_geometry(n, spec.bond_length, angle,
                         std::vector<double>(std::max(n - 3, 0), std::numbers::pi));
      break;
    case ToyFamily::kTwoModeChain: {
      const double sign = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
      x = chain_geometry(4, spec.bond_length, angle, {sign * radians(spec.dihedral_deg)});
      break;
    }
    }

    if (spec.jitter_std > 0.0) {
      std::normal_distribution<double> jitter(0.0, spec.jitter_std);
      for (Eigen::Index i = 0; i < x.cols(); ++i)
        for (int c = 0; c < 3; ++c)
          x(c, i) += jitter(rng);
    }

    const Eigen::Matrix3d rotation = random_rotation(rng);
    std::normal_distribution<double> normal;
    const Eigen::Vector3d shift(normal(rng), normal(rng), normal(rng));
    Eigen::Matrix3Xd placed = rotation * x;
    placed.colwise() += shift;
    out.push_back({graph, Conformation(std::move(placed))});
  }
  return out;
}

double dihedral_deg(const Conformation &conf, int a, int b, int c, int d) {
  const Eigen::Vector3d b1 = conf.coords.col(b) - conf.coords.col(a);
  const Eigen::Vector3d b2 = conf.coords.col(c) - conf.coords.col(b);
  const Eigen::Vector3d b3 = conf.coords.col(d) - conf.coords.col(c);
  const Eigen::Vector3d n1 = b1.cross(b2);
  const Eigen::Vector3d n2 = b2.cross(b3);
  const double y = b2.norm() * b1.dot(n2);
  const double x = n1.dot(n2);
  return std::atan2(y, x) * 180.0 / std::numbers::pi;
}

} // namespace scoreconf
