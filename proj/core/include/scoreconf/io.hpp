#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scoreconf/metrics.hpp"
#include "scoreconf/molgraph.hpp"

namespace scoreconf {

// Chemical symbol for Z in [1, 54]; "X" otherwise.
std::string_view element_symbol(int z) noexcept;
std::optional<int> atomic_number(std::string_view symbol) noexcept;

// ---------------------------------------------------------------------------
// Dataset files: UTF-8, one JSON object per line, one molecule per record.
//
//   {"format": "scoreconf.dataset", "version": 1, "id": "tri-0",
//    "atoms": [6, 6, 6], "extended": true,
//    "edges": [[0, 1, "single"], [0, 2, "single"], [1, 2, "single"]],
//    "conformations": [[x0, y0, z0, x1, y1, z1, x2, y2, z2]]}
//
// Edges use the canonical (i < j, sorted) order and the edge type names
// single, double, triple, aromatic, virtual_2hop, virtual_3hop. When
// "extended" is true the virtual edges must be exactly those extend_graph
// derives from the real bonds. Coordinates are in A and written with
// round-trip precision. Blank lines are ignored.
inline constexpr std::string_view kDatasetFormat = "scoreconf.dataset";
inline constexpr int kDatasetVersion = 1;

struct DatasetRecord {
  std::string id;
  MolecularGraph graph;
  std::vector<Conformation> conformations;
};

void write_dataset(std::ostream &out, std::span<const DatasetRecord> records);
std::vector<DatasetRecord> read_dataset(std::istream &in);
void save_dataset(const std::filesystem::path &path, std::span<const DatasetRecord> records);
std::vector<DatasetRecord> load_dataset(const std::filesystem::path &path);

// ---------------------------------------------------------------------------
// Extended XYZ frames: atom count, a comment line of key=value pairs, then
// "symbol x y z" per atom with 6 decimals.
struct XyzFrame {
  std::vector<std::string> symbols;
  Conformation conformation;
  std::map<std::string, std::string> properties; // parsed from the comment line
};

void write_xyz_frame(std::ostream &out, std::span<const int> atoms,
                     const Conformation &conf,
                     const std::vector<std::pair<std::string, std::string>> &properties);
std::vector<XyzFrame> read_xyz(std::istream &in);
std::vector<XyzFrame> load_xyz(const std::filesystem::path &path);

// ---------------------------------------------------------------------------
// Metrics report as JSON with fixed keys: num_molecules, delta, cov_mean,
// cov_median, mis_mean, mis_median (percent, at delta), mat_mean,
// mat_median (A), mmd_single_mean, mmd_single_median, mmd_pair_mean,
// mmd_pair_median, mmd_all_mean, mmd_all_median, and "thresholds": a list
// of {delta, cov_mean, cov_median, mis_mean, mis_median}. Absent values are
// null.
std::string format_report(const EnsembleMetricsReport &report);

} // namespace scoreconf
