#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "scoreconf/dsm.hpp"
#include "scoreconf/molgraph.hpp"

namespace scoreconf {

enum class ToyFamily {
  kRigidTriangle, // 3 atoms, equilateral with side bond_length
  kRigidChain,    // num_atoms in a planar zigzag: fixed bonds, angles, trans dihedrals
  kTwoModeChain,  // 4-atom chain, dihedral +dihedral_deg or -dihedral_deg with p = 1/2
};

std::string_view toy_family_name(ToyFamily family) noexcept;
std::optional<ToyFamily> parse_toy_family(std::string_view name) noexcept;

struct ToySpec {
  ToyFamily family = ToyFamily::kRigidTriangle;
  int num_atoms = 3;          // rigid_chain only
  double bond_length = 1.0;   // A
  double angle_deg = 109.5;   // chains
  double dihedral_deg = 60.0; // two_mode_chain
  double jitter_std = 0.0;    // A, isotropic coordinate noise
  int count = 1;
  std::uint64_t seed = 0;
  int atomic_number = 6;

  void validate() const;
};

// Extended graphs with conformations in a random global frame (uniform
// rotation, N(0, 1) translation). Sample k draws from its own stream.
std::vector<TrainingExample> generate(const ToySpec &spec);

// Signed dihedral a-b-c-d in degrees, (-180, 180].
double dihedral_deg(const Conformation &conf, int a, int b, int c, int d);

} // namespace scoreconf
