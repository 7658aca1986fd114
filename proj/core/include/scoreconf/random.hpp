#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace scoreconf {

using Rng = std::mt19937_64;

// Independent stream keyed by (seed, path...). Used wherever work is split
// across molecules, chains or batch elements so results do not depend on
// how the work is scheduled.
inline Rng derive_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * path.size());
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (std::uint64_t p : path)
    push(p);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

} // namespace scoreconf
