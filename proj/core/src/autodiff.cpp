#include "scoreconf/autodiff.hpp"

#include <cmath>
#include <string>

#include "scoreconf/error.hpp"

namespace scoreconf::ad {
namespace {

Tape &owner(Var a) {
  if (a.tape() == nullptr)
    throw Error(ErrorCode::kTapeMismatch, "Var is not attached to a tape");
  return *a.tape();
}

} // namespace

double Var::value() const { return owner(*this).value(*this); }

Tape::Tape() { link_begin_.push_back(0); }

void Tape::check(Var v) const {
  if (v.tape_ != this)
    throw Error(ErrorCode::kTapeMismatch, "operand belongs to a different tape");
  if (v.index_ >= values_.size())
    throw Error(ErrorCode::kTapeMismatch,
                "stale Var index " + std::to_string(v.index_));
}

Var Tape::push(Op op, double value) {
  values_.push_back(value);
  ops_.push_back(op);
  link_begin_.push_back(static_cast<std::uint32_t>(parents_.size()));
  return Var(this, static_cast<std::uint32_t>(values_.size() - 1));
}

// Must be called right after push() for the node being built.
void Tape::link(Var parent, double partial) {
  parents_.push_back(parent.index_);
  partials_.push_back(partial);
  link_begin_.back() = static_cast<std::uint32_t>(parents_.size());
}

Var Tape::lift(double value) { return push(Op::kLeaf, value); }

Var Tape::add(Var a, Var b) {
  check(a);
  check(b);
  Var out = push(Op::kAdd, values_[a.index_] + values_[b.index_]);
  link(a, 1.0);
  link(b, 1.0);
  return out;
}

Var Tape::sub(Var a, Var b) {
  check(a);
  check(b);
  Var out = push(Op::kSub, values_[a.index_] - values_[b.index_]);
  link(a, 1.0);
  link(b, -1.0);
  return out;
}

Var Tape::mul(Var a, Var b) {
  check(a);
  check(b);
  const double va = values_[a.index_];
  const double vb = values_[b.index_];
  Var out = push(Op::kMul, va * vb);
  link(a, vb);
  link(b, va);
  return out;
}

Var Tape::div(Var a, Var b) {
  check(a);
  check(b);
  const double va = values_[a.index_];
  const double vb = values_[b.index_];
  if (vb == 0.0)
    throw Error(ErrorCode::kDomainError, "division by zero");
  Var out = push(Op::kDiv, va / vb);
  link(a, 1.0 / vb);
  link(b, -va / (vb * vb));
  return out;
}

Var Tape::neg(Var a) {
  check(a);
  Var out = push(Op::kNeg, -values_[a.index_]);
  link(a, -1.0);
  return out;
}

Var Tape::scale(Var a, double c) {
  check(a);
  Var out = push(Op::kScale, c * values_[a.index_]);
  link(a, c);
  return out;
}

Var Tape::relu(Var a) {
  check(a);
  const double va = values_[a.index_];
  // Subgradient at 0 is 0.
  Var out = push(Op::kRelu, va > 0.0 ? va : 0.0);
  link(a, va > 0.0 ? 1.0 : 0.0);
  return out;
}

Var Tape::sqrt(Var a) {
  check(a);
  const double va = values_[a.index_];
  if (va < 0.0)
    throw Error(ErrorCode::kDomainError,
                "sqrt of negative value " + std::to_string(va));
  const double root = std::sqrt(va);
  Var out = push(Op::kSqrt, root);
  link(a, 0.5 / root);
  return out;
}

Var Tape::square(Var a) {
  check(a);
  const double va = values_[a.index_];
  Var out = push(Op::kSquare, va * va);
  link(a, 2.0 * va);
  return out;
}

Var Tape::sum(std::span<const Var> terms) {
  double total = 0.0;
  for (Var t : terms) {
    check(t);
    total += values_[t.index_];
  }
  Var out = push(Op::kSum, total);
  for (Var t : terms)
    link(t, 1.0);
  return out;
}

Var Tape::dot(std::span<const Var> w, std::span<const Var> x, Var bias) {
  if (w.size() != x.size())
    throw Error(ErrorCode::kSizeMismatch, "dot operands differ in length");
  check(bias);
  double total = values_[bias.index_];
  for (std::size_t k = 0; k < w.size(); ++k) {
    check(w[k]);
    check(x[k]);
    total += values_[w[k].index_] * values_[x[k].index_];
  }
  Var out = push(Op::kDot, total);
  link(bias, 1.0);
  for (std::size_t k = 0; k < w.size(); ++k) {
    link(w[k], values_[x[k].index_]);
    link(x[k], values_[w[k].index_]);
  }
  return out;
}

Var Tape::dot(std::span<const Var> w, std::span<const double> x, Var bias) {
  if (w.size() != x.size())
    throw Error(ErrorCode::kSizeMismatch, "dot operands differ in length");
  check(bias);
  double total = values_[bias.index_];
  for (std::size_t k = 0; k < w.size(); ++k) {
    check(w[k]);
    total += values_[w[k].index_] * x[k];
  }
  Var out = push(Op::kDot, total);
  link(bias, 1.0);
  for (std::size_t k = 0; k < w.size(); ++k)
    link(w[k], x[k]);
  return out;
}

Gradient Tape::backward(Var output) const {
  check(output);
  std::vector<double> adjoint(values_.size(), 0.0);
  adjoint[output.index_] = 1.0;
  for (std::size_t n = output.index_ + 1; n-- > 0;) {
    const double upstream = adjoint[n];
    if (upstream == 0.0)
      continue;
    for (std::uint32_t k = link_begin_[n]; k < link_begin_[n + 1]; ++k)
      adjoint[parents_[k]] += partials_[k] * upstream;
  }
  return Gradient(std::move(adjoint));
}

void Tape::clear() {
  values_.clear();
  ops_.clear();
  parents_.clear();
  partials_.clear();
  link_begin_.assign(1, 0);
}

void Tape::reserve(std::size_t nodes, std::size_t links) {
  values_.reserve(nodes);
  ops_.reserve(nodes);
  link_begin_.reserve(nodes + 1);
  parents_.reserve(links);
  partials_.reserve(links);
}

Var operator+(Var a, Var b) { return owner(a).add(a, b); }
Var operator-(Var a, Var b) { return owner(a).sub(a, b); }
Var operator*(Var a, Var b) { return owner(a).mul(a, b); }
Var operator/(Var a, Var b) { return owner(a).div(a, b); }
Var operator-(Var a) { return owner(a).neg(a); }
Var operator*(double c, Var a) { return owner(a).scale(a, c); }
Var operator*(Var a, double c) { return owner(a).scale(a, c); }

Var relu(Var a) { return owner(a).relu(a); }
Var sqrt(Var a) { return owner(a).sqrt(a); }
Var square(Var a) { return owner(a).square(a); }

} // namespace scoreconf::ad
