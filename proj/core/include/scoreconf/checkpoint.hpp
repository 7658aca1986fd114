#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "scoreconf/dsm.hpp"
#include "scoreconf/scorenet.hpp"

namespace scoreconf {

// Parameter checkpoint, all fields little-endian:
//
//   offset  size  field
//   0       8     magic "SCNETCKP"
//   8       4     u32 format version (1)
//   12      4     u32 num_layers
//   16      4     u32 hidden_dim
//   20      4     u32 max_atomic_number
//   24      4     u32 num_edge_types
//   28      4     u32 noise levels L (0 = no schedule recorded)
//   32      8     f64 sigma_1
//   40      8     f64 sigma_L
//   48      8     u64 parameter count P
//   56      8*P   f64 parameters in ScoreNetParams::flatten() order
inline constexpr char kCheckpointMagic[8] = {'S', 'C', 'N', 'E', 'T', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::size_t kCheckpointHeaderBytes = 56;

struct ScheduleSpec {
  double sigma_1 = 10.0;
  double sigma_L = 0.01;
  int levels = 50;

  NoiseSchedule build() const { return make_schedule(sigma_1, sigma_L, levels); }
  friend bool operator==(const ScheduleSpec &, const ScheduleSpec &) = default;
};

struct Checkpoint {
  ScoreNetParams params;
  std::optional<ScheduleSpec> schedule;
};

void write_checkpoint(std::ostream &out, const Checkpoint &ckpt);
Checkpoint read_checkpoint(std::istream &in);

// Writes to a sibling temporary file, then renames over path.
void save_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt);
Checkpoint load_checkpoint(const std::filesystem::path &path);

} // namespace scoreconf
