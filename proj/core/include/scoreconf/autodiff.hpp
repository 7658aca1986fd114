#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace scoreconf::ad {

class Tape;

enum class Op : std::uint8_t {
  kLeaf,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kScale,
  kRelu,
  kSqrt,
  kSquare,
  kSum,
  kDot,
};

// Handle to a node on a tape. Cheap to copy; valid while the tape is alive
// and has not been cleared.
class Var {
public:
  Var() = default;

  double value() const;
  std::uint32_t index() const noexcept { return index_; }
  Tape *tape() const noexcept { return tape_; }

private:
  friend class Tape;
  Var(Tape *tape, std::uint32_t index) : tape_(tape), index_(index) {}

  Tape *tape_ = nullptr;
  std::uint32_t index_ = 0;
};

// Adjoints of every node with respect to one scalar output.
class Gradient {
public:
  explicit Gradient(std::vector<double> adjoints) : adjoints_(std::move(adjoints)) {}

  double operator[](Var v) const { return adjoints_[v.index()]; }
  std::span<const double> adjoints() const noexcept { return adjoints_; }

private:
  std::vector<double> adjoints_;
};

// Append-only scalar expression tape. Each node records its forward value,
// the indices of its parents, and d(node)/d(parent). Parents always precede
// children, so a single reverse sweep over insertion order is a valid
// topological traversal.
class Tape {
public:
  Tape();

  Var lift(double value);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);
  Var neg(Var a);
  Var scale(Var a, double c);
  Var relu(Var a);
  Var sqrt(Var a);
  Var square(Var a);
  Var sum(std::span<const Var> terms);

  // bias + sum_k w[k] * x[k]; one node with 2n+1 parents.
  Var dot(std::span<const Var> w, std::span<const Var> x, Var bias);
  // Same with constant inputs; only w and bias become parents.
  Var dot(std::span<const Var> w, std::span<const double> x, Var bias);

  Gradient backward(Var output) const;

  double value(Var v) const { return values_[v.index()]; }
  Op op(Var v) const { return ops_[v.index()]; }
  std::size_t size() const noexcept { return values_.size(); }

  // Drops every node; outstanding Vars become invalid.
  void clear();
  void reserve(std::size_t nodes, std::size_t links);

private:
  void check(Var v) const;
  Var push(Op op, double value);
  void link(Var parent, double partial);

  std::vector<double> values_;
  std::vector<Op> ops_;
  // Parents of node n live in [link_begin_[n], link_begin_[n + 1]).
  std::vector<std::uint32_t> link_begin_;
  std::vector<std::uint32_t> parents_;
  std::vector<double> partials_;
};

// Arithmetic on Vars from the same tape; mixing tapes raises kTapeMismatch.
Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator-(Var a);
Var operator*(double c, Var a);
Var operator*(Var a, double c);

Var relu(Var a);
Var sqrt(Var a);
Var square(Var a);

} // namespace scoreconf::ad
