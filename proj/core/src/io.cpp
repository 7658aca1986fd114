#include "scoreconf/io.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "scoreconf/error.hpp"

namespace scoreconf {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr std::array<std::string_view, 55> kSymbols = {
    "X",  "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne",
    "Na", "Mg", "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc",
    "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge",
    "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc",
    "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe"};

[[noreturn]] void parse_fail(std::size_t line, const std::string &msg) {
  throw Error(ErrorCode::kParseError, "line " + std::to_string(line) + ": " + msg);
}

DatasetRecord parse_record(const json &j, std::size_t line) {
  if (!j.is_object())
    parse_fail(line, "record is not a JSON object");
  if (j.value("format", std::string()) != kDatasetFormat)
    parse_fail(line, "missing or wrong \"format\" (expected scoreconf.dataset)");
  if (j.value("version", -1) != kDatasetVersion)
    parse_fail(line, "unsupported dataset version");

  DatasetRecord rec;
  rec.id = j.value("id", std::string());
  const auto atoms = j.at("atoms").get<std::vector<int>>();
  const bool extended = j.value("extended", false);

  std::vector<Edge> edges;
  std::vector<BondSpec> bonds;
  for (const json &e : j.at("edges")) {
    if (!e.is_array() || e.size() != 3)
      parse_fail(line, "edge entries must be [i, j, type]");
    const auto type = parse_edge_type(e[2].get<std::string>());
    if (!type)
      parse_fail(line, "unknown edge type \"" + e[2].get<std::string>() + "\"");
    const Edge edge{e[0].get<int>(), e[1].get<int>(), *type};
    edges.push_back(edge);
    if (!is_virtual(edge.type))
      bonds.push_back({edge.i, edge.j, edge.type});
  }

  MolecularGraph g = build_graph(atoms, bonds);
  if (extended)
    g = extend_graph(g);
  const auto canonical = g.edges();
  if (!std::equal(edges.begin(), edges.end(), canonical.begin(), canonical.end()))
    parse_fail(line, "edge list is not the canonical edge set for these bonds");
  rec.graph = std::move(g);

  if (j.contains("conformations"))
    for (const json &c : j.at("conformations")) {
      const auto flat = c.get<std::vector<double>>();
      if (flat.size() != 3 * atoms.size())
        parse_fail(line, "conformation has " + std::to_string(flat.size()) +
                             " values, expected " + std::to_string(3 * atoms.size()));
      Eigen::Matrix3Xd x(3, atoms.size());
      for (std::size_t k = 0; k < flat.size(); ++k)
        x(k % 3, k / 3) = flat[k];
      rec.conformations.emplace_back(std::move(x));
    }
  return rec;
}

std::string format_coord(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  // Avoid "-0.000000" so identical geometries print identically.
  if (std::string_view(buf) == "-0.000000")
    return "0.000000";
  return buf;
}

void put_summary(ordered_json &j, const std::string &prefix, const Summary &s) {
  j[prefix + "_mean"] = s.mean ? ordered_json(*s.mean) : ordered_json(nullptr);
  j[prefix + "_median"] = s.median ? ordered_json(*s.median) : ordered_json(nullptr);
}

} // namespace

std::string_view element_symbol(int z) noexcept {
  return z >= 1 && z < static_cast<int>(kSymbols.size()) ? kSymbols[z] : kSymbols[0];
}

std::optional<int> atomic_number(std::string_view symbol) noexcept {
  for (std::size_t z = 1; z < kSymbols.size(); ++z)
    if (kSymbols[z] == symbol)
      return static_cast<int>(z);
  return std::nullopt;
}

void write_dataset(std::ostream &out, std::span<const DatasetRecord> records) {
  for (const DatasetRecord &rec : records) {
    ordered_json j;
    j["format"] = kDatasetFormat;
    j["version"] = kDatasetVersion;
    j["id"] = rec.id;
    j["atoms"] = std::vector<int>(rec.graph.atoms().begin(), rec.graph.atoms().end());
    j["extended"] = rec.graph.is_extended();
    ordered_json edges = ordered_json::array();
    for (const Edge &e : rec.graph.edges())
      edges.push_back({e.i, e.j, edge_type_name(e.type)});
    j["edges"] = std::move(edges);
    ordered_json confs = ordered_json::array();
    for (const Conformation &c : rec.conformations) {
      if (c.num_atoms() != rec.graph.num_atoms())
        throw Error(ErrorCode::kShapeMismatch,
                    "record " + rec.id + " has a conformation of the wrong size");
      std::vector<double> flat(c.coords.data(), c.coords.data() + c.coords.size());
      confs.push_back(std::move(flat));
    }
    j["conformations"] = std::move(confs);
    out << j.dump() << '\n';
  }
}

std::vector<DatasetRecord> read_dataset(std::istream &in) {
  std::vector<DatasetRecord> records;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    try {
      records.push_back(parse_record(json::parse(text), line));
    } catch (const json::exception &e) {
      parse_fail(line, e.what());
    } catch (const Error &e) {
      if (e.code() == ErrorCode::kParseError)
        throw;
      parse_fail(line, e.what());
    }
  }
  return records;
}

void save_dataset(const std::filesystem::path &path,
                  std::span<const DatasetRecord> records) {
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  write_dataset(out, records);
  if (!out)
    throw Error(ErrorCode::kIoError, "failed writing " + path.string());
}

std::vector<DatasetRecord> load_dataset(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::kIoError, "cannot open dataset " + path.string());
  return read_dataset(in);
}

void write_xyz_frame(std::ostream &out, std::span<const int> atoms,
                     const Conformation &conf,
                     const std::vector<std::pair<std::string, std::string>> &properties) {
  if (static_cast<int>(atoms.size()) != conf.num_atoms())
    throw Error(ErrorCode::kShapeMismatch, "atom list and conformation differ in size");
  out << atoms.size() << '\n';
  bool first = true;
  for (const auto &[key, value] : properties) {
    out << (first ? "" : " ") << key << '=' << value;
    first = false;
  }
  out << '\n';
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    out << element_symbol(atoms[i]);
    for (int c = 0; c < 3; ++c)
      out << ' ' << format_coord(conf.coords(c, i));
    out << '\n';
  }
}

std::vector<XyzFrame> read_xyz(std::istream &in) {
  std::vector<XyzFrame> frames;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    std::size_t count = 0;
    try {
      std::size_t used = 0;
      const long long parsed = std::stoll(text, &used);
      if (parsed < 0 || text.find_first_not_of(" \t\r", used) != std::string::npos)
        throw std::invalid_argument("count");
      count = static_cast<std::size_t>(parsed);
    } catch (const std::exception &) {
      parse_fail(line, "expected an atom count, got \"" + text + "\"");
    }

    XyzFrame frame;
    if (!std::getline(in, text))
      parse_fail(line + 1, "missing comment line");
    ++line;
    std::istringstream comment(text);
    std::string token;
    while (comment >> token) {
      const auto eq = token.find('=');
      if (eq != std::string::npos)
        frame.properties[token.substr(0, eq)] = token.substr(eq + 1);
    }

    frame.conformation.coords.resize(3, count);
    for (std::size_t i = 0; i < count; ++i) {
      if (!std::getline(in, text))
        parse_fail(line + 1, "frame ends after " + std::to_string(i) + " of " +
                                 std::to_string(count) + " atoms");
      ++line;
      std::istringstream row(text);
      std::string symbol;
      double x, y, z;
      if (!(row >> symbol >> x >> y >> z))
        parse_fail(line, "expected \"symbol x y z\", got \"" + text + "\"");
      frame.symbols.push_back(symbol);
      frame.conformation.coords.col(i) = Eigen::Vector3d(x, y, z);
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

std::vector<XyzFrame> load_xyz(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return read_xyz(in);
}

std::string format_report(const EnsembleMetricsReport &report) {
  ordered_json j;
  j["num_molecules"] = report.num_molecules;
  j["delta"] = report.primary_delta;
  put_summary(j, "cov", report.primary().cov);
  put_summary(j, "mis", report.primary().mis);
  put_summary(j, "mat", report.mat);
  put_summary(j, "mmd_single", report.mmd_single);
  put_summary(j, "mmd_pair", report.mmd_pair);
  put_summary(j, "mmd_all", report.mmd_all);
  ordered_json sweep = ordered_json::array();
  for (const ThresholdMetrics &t : report.thresholds) {
    ordered_json row;
    row["delta"] = t.delta;
    put_summary(row, "cov", t.cov);
    put_summary(row, "mis", t.mis);
    sweep.push_back(std::move(row));
  }
  j["thresholds"] = std::move(sweep);
  return j.dump(2) + "\n";
}

} // namespace scoreconf
