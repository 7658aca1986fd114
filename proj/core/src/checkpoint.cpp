#include "scoreconf/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "scoreconf/error.hpp"

namespace scoreconf {
namespace {

template <class U> void put_le(std::ostream &out, U value) {
  std::array<char, sizeof(U)> bytes;
  for (std::size_t k = 0; k < sizeof(U); ++k)
    bytes[k] = static_cast<char>((value >> (8 * k)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

template <class U> U get_le(std::istream &in) {
  std::array<unsigned char, sizeof(U)> bytes;
  if (!in.read(reinterpret_cast<char *>(bytes.data()), bytes.size()))
    throw Error(ErrorCode::kIncompatibleCheckpoint, "checkpoint is truncated");
  U value = 0;
  for (std::size_t k = 0; k < sizeof(U); ++k)
    value |= static_cast<U>(bytes[k]) << (8 * k);
  return value;
}

void put_f64(std::ostream &out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream &in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

} // namespace

void write_checkpoint(std::ostream &out, const Checkpoint &ckpt) {
  const ScoreNetHyper &h = ckpt.params.hyper;
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, h.num_layers);
  put_le<std::uint32_t>(out, h.hidden_dim);
  put_le<std::uint32_t>(out, h.max_atomic_number);
  put_le<std::uint32_t>(out, h.num_edge_types);
  put_le<std::uint32_t>(out, ckpt.schedule ? ckpt.schedule->levels : 0);
  put_f64(out, ckpt.schedule ? ckpt.schedule->sigma_1 : 0.0);
  put_f64(out, ckpt.schedule ? ckpt.schedule->sigma_L : 0.0);
  const std::vector<double> flat = ckpt.params.flatten();
  put_le<std::uint64_t>(out, flat.size());
  for (double w : flat)
    put_f64(out, w);
  if (!out)
    throw Error(ErrorCode::kIoError, "failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream &in) {
  char magic[sizeof(kCheckpointMagic)];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw Error(ErrorCode::kIncompatibleCheckpoint, "bad checkpoint magic");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kCheckpointVersion)
    throw Error(ErrorCode::kIncompatibleCheckpoint,
                "unsupported checkpoint version " + std::to_string(version));
  ScoreNetHyper h;
  h.num_layers = static_cast<int>(get_le<std::uint32_t>(in));
  h.hidden_dim = static_cast<int>(get_le<std::uint32_t>(in));
  h.max_atomic_number = static_cast<int>(get_le<std::uint32_t>(in));
  h.num_edge_types = static_cast<int>(get_le<std::uint32_t>(in));
  const auto levels = get_le<std::uint32_t>(in);
  const double sigma_1 = get_f64(in);
  const double sigma_L = get_f64(in);
  const auto count = get_le<std::uint64_t>(in);
  try {
    h.validate();
  } catch (const Error &e) {
    throw Error(ErrorCode::kIncompatibleCheckpoint, e.what());
  }
  if (count != parameter_count(h))
    throw Error(ErrorCode::kIncompatibleCheckpoint,
                "parameter count " + std::to_string(count) +
                    " does not match the recorded architecture");
  std::vector<double> flat(count);
  for (double &w : flat)
    w = get_f64(in);

  Checkpoint ckpt;
  ckpt.params = ScoreNetParams::unflatten(h, flat);
  if (levels > 0)
    ckpt.schedule = ScheduleSpec{sigma_1, sigma_L, static_cast<int>(levels)};
  return ckpt;
}

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error(ErrorCode::kIoError, "cannot open " + tmp.string() + " for writing");
    write_checkpoint(out, ckpt);
    out.flush();
    if (!out)
      throw Error(ErrorCode::kIoError, "failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw Error(ErrorCode::kIoError,
                "cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::kIoError, "cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

} // namespace scoreconf
