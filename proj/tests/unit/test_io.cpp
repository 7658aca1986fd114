#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "scoreconf/checkpoint.hpp"
#include "scoreconf/error.hpp"
#include "scoreconf/io.hpp"
#include "scoreconf/toydata.hpp"

using namespace scoreconf;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  ADD_FAILURE() << "no scoreconf::Error thrown";
  return ErrorCode::kInvalidArgument;
}

std::string message_of(auto &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.what();
  }
  return "";
}

fs::path scratch_dir(const std::string &name) {
  const fs::path p = fs::temp_directory_path() / ("scoreconf_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<DatasetRecord> sample_records() {
  std::mt19937_64 rng(3);
  std::vector<DatasetRecord> out;
  for (int k = 0; k < 4; ++k) {
    DatasetRecord r;
    r.id = "mol-" + std::to_string(k);
    r.graph = oracle::random_graph(rng, 3 + k);
    if (k % 2)
      r.graph = extend_graph(r.graph);
    for (int c = 0; c < k; ++c)
      r.conformations.push_back(oracle::random_conformation(rng, 3 + k));
    out.push_back(std::move(r));
  }
  return out;
}

} // namespace

TEST(Dataset, RoundTripIsExact) {
  const auto records = sample_records();
  std::stringstream s;
  write_dataset(s, records);
  const auto back = read_dataset(s);
  ASSERT_EQ(back.size(), records.size());
  for (std::size_t k = 0; k < records.size(); ++k) {
    EXPECT_EQ(back[k].id, records[k].id);
    EXPECT_EQ(back[k].graph.is_extended(), records[k].graph.is_extended());
    ASSERT_EQ(back[k].graph.num_edges(), records[k].graph.num_edges());
    for (int e = 0; e < records[k].graph.num_edges(); ++e)
      EXPECT_EQ(back[k].graph.edges()[e], records[k].graph.edges()[e]);
    ASSERT_EQ(back[k].conformations.size(), records[k].conformations.size());
    for (std::size_t c = 0; c < records[k].conformations.size(); ++c)
      EXPECT_EQ(back[k].conformations[c].coords, records[k].conformations[c].coords);
  }
}

TEST(Dataset, ToyTrianglesRoundTrip) {
  ToySpec spec;
  spec.count = 5;
  std::vector<DatasetRecord> records;
  for (const TrainingExample &ex : generate(spec))
    records.push_back({"tri", ex.graph, {ex.conformation}});
  const fs::path dir = scratch_dir("toy");
  save_dataset(dir / "tri.jsonl", records);
  const auto back = load_dataset(dir / "tri.jsonl");
  ASSERT_EQ(back.size(), 5u);
  for (const auto &r : back) {
    EXPECT_EQ(r.graph.num_atoms(), 3);
    EXPECT_EQ(r.conformations.size(), 1u);
  }
}

TEST(Dataset, MalformedLineReportsLineNumber) {
  std::stringstream s;
  write_dataset(s, sample_records());
  std::string text = s.str() + "\n{\"format\": \"scoreconf.dataset\", \"version\": 1, \"atoms\": [6\n";
  std::istringstream in(text);
  const std::string msg = message_of([&] { read_dataset(in); });
  EXPECT_NE(msg.find("line 6"), std::string::npos) << msg;
  std::istringstream again(text);
  EXPECT_EQ(code_of([&] { read_dataset(again); }), ErrorCode::kParseError);
}

TEST(Dataset, RejectsBadRecords) {
  auto parse = [](const std::string &line) {
    std::istringstream in(line);
    return code_of([&] { read_dataset(in); });
  };
  const std::string head = R"({"format": "scoreconf.dataset", "version": 1, "id": "x", )";
  EXPECT_EQ(parse(head + R"("atoms": [6, 6, 6], "edges": [[1, 0, "single"], [1, 2, "single"]]})"),
            ErrorCode::kParseError);
  EXPECT_EQ(parse(head + R"("atoms": [6, 6], "edges": [[0, 1, "quadruple"]]})"),
            ErrorCode::kParseError);
  EXPECT_EQ(parse(head + R"("atoms": [6, 6], "edges": [[0, 1, "single"]], "conformations": [[0, 0, 0]]})"),
            ErrorCode::kParseError);
  EXPECT_EQ(parse(head + R"("atoms": [6, 6, 6], "extended": true, "edges": [[0, 1, "single"], [1, 2, "single"]]})"),
            ErrorCode::kParseError);
  EXPECT_EQ(parse(R"({"format": "other", "version": 1, "atoms": [6], "edges": []})"),
            ErrorCode::kParseError);
  EXPECT_EQ(parse(head + R"("atoms": [6, 6], "edges": [[0, 5, "single"]]})"),
            ErrorCode::kParseError);
}

TEST(Dataset, MissingFileIsIoError) {
  EXPECT_EQ(code_of([] { load_dataset("/nonexistent/data.jsonl"); }), ErrorCode::kIoError);
}

TEST(Xyz, RoundTripWithinPrintPrecision) {
  std::mt19937_64 rng(4);
  const Conformation c = oracle::random_conformation(rng, 5);
  const std::vector<int> atoms{6, 1, 8, 7, 9};
  std::stringstream s;
  write_xyz_frame(s, atoms, c, {{"mol_id", "m0"}, {"seed", "12"}});
  write_xyz_frame(s, atoms, c, {{"mol_id", "m1"}});
  const auto frames = read_xyz(s);
  ASSERT_EQ(frames.size(), 2u);
  EXPECT_EQ(frames[0].symbols, (std::vector<std::string>{"C", "H", "O", "N", "F"}));
  EXPECT_LE(oracle::max_abs(frames[0].conformation.coords - c.coords), 5e-7 + 1e-12);
  EXPECT_EQ(frames[0].properties.at("mol_id"), "m0");
  EXPECT_EQ(frames[0].properties.at("seed"), "12");
  EXPECT_EQ(frames[1].properties.at("mol_id"), "m1");
}

TEST(Xyz, NegativeZeroPrintsAsZero) {
  Eigen::Matrix3Xd x(3, 1);
  x << -1e-9, 0.0, -0.0;
  std::stringstream s;
  write_xyz_frame(s, std::vector<int>{6}, Conformation(x), {});
  EXPECT_EQ(s.str(), "1\n\nC 0.000000 0.000000 0.000000\n");
}

TEST(Xyz, TruncatedFrameIsParseError) {
  std::istringstream in("3\ncomment\nC 0 0 0\nC 1 0 0\n");
  EXPECT_EQ(code_of([&] { read_xyz(in); }), ErrorCode::kParseError);
  std::istringstream bad("two\n\n");
  EXPECT_EQ(code_of([&] { read_xyz(bad); }), ErrorCode::kParseError);
  std::istringstream row("1\n\nC 0 zero 0\n");
  EXPECT_EQ(code_of([&] { read_xyz(row); }), ErrorCode::kParseError);
}

TEST(Xyz, SizeMismatchOnWrite) {
  std::stringstream s;
  EXPECT_EQ(code_of([&] {
              write_xyz_frame(s, std::vector<int>{6, 6}, Conformation(Eigen::Matrix3Xd::Zero(3, 3)), {});
            }),
            ErrorCode::kShapeMismatch);
}

TEST(Elements, Symbols) {
  EXPECT_EQ(element_symbol(1), "H");
  EXPECT_EQ(element_symbol(6), "C");
  EXPECT_EQ(element_symbol(17), "Cl");
  EXPECT_EQ(element_symbol(54), "Xe");
  EXPECT_EQ(element_symbol(0), "X");
  EXPECT_EQ(element_symbol(55), "X");
  for (int z = 1; z <= 54; ++z)
    EXPECT_EQ(atomic_number(element_symbol(z)), z);
  EXPECT_FALSE(atomic_number("Qq").has_value());
}

TEST(Checkpoint, RoundTripIsBitExact) {
  ScoreNetHyper h;
  h.num_layers = 2;
  h.hidden_dim = 8;
  h.max_atomic_number = 9;
  const Checkpoint ckpt{init_params(h, 5), ScheduleSpec{3.0, 0.1, 30}};
  std::stringstream s;
  write_checkpoint(s, ckpt);
  const Checkpoint back = read_checkpoint(s);
  EXPECT_EQ(back.params.flatten(), ckpt.params.flatten());
  EXPECT_EQ(back.params.hyper.hidden_dim, 8);
  ASSERT_TRUE(back.schedule.has_value());
  EXPECT_EQ(*back.schedule, *ckpt.schedule);

  std::stringstream none;
  write_checkpoint(none, Checkpoint{ckpt.params, std::nullopt});
  EXPECT_FALSE(read_checkpoint(none).schedule.has_value());
}

TEST(Checkpoint, HeaderLayout) {
  ScoreNetHyper h;
  h.num_layers = 1;
  h.hidden_dim = 4;
  h.max_atomic_number = 10;
  const ScoreNetParams p = init_params(h, 1);
  std::stringstream s;
  write_checkpoint(s, Checkpoint{p, ScheduleSpec{10.0, 0.01, 50}});
  const std::string bytes = s.str();
  const std::vector<double> flat = p.flatten();
  ASSERT_EQ(bytes.size(), 56 + 8 * flat.size());
  auto u32 = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int k = 3; k >= 0; --k)
      v = (v << 8) | static_cast<unsigned char>(bytes[off + k]);
    return v;
  };
  auto u64 = [&](std::size_t off) {
    std::uint64_t v = 0;
    for (int k = 7; k >= 0; --k)
      v = (v << 8) | static_cast<unsigned char>(bytes[off + k]);
    return v;
  };
  EXPECT_EQ(bytes.substr(0, 8), "SCNETCKP");
  EXPECT_EQ(u32(8), 1u);
  EXPECT_EQ(u32(12), 1u);
  EXPECT_EQ(u32(16), 4u);
  EXPECT_EQ(u32(20), 10u);
  EXPECT_EQ(u32(24), static_cast<std::uint32_t>(h.num_edge_types));
  EXPECT_EQ(u32(28), 50u);
  EXPECT_EQ(std::bit_cast<double>(u64(32)), 10.0);
  EXPECT_EQ(std::bit_cast<double>(u64(40)), 0.01);
  EXPECT_EQ(u64(48), flat.size());
  EXPECT_EQ(std::bit_cast<double>(u64(56)), flat[0]);
  EXPECT_EQ(std::bit_cast<double>(u64(56 + 8 * (flat.size() - 1))), flat.back());
}

TEST(Checkpoint, RejectsForeignData) {
  std::istringstream junk("NOTACKPTxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx");
  EXPECT_EQ(code_of([&] { read_checkpoint(junk); }), ErrorCode::kIncompatibleCheckpoint);
  ScoreNetHyper h;
  h.num_layers = 1;
  h.hidden_dim = 4;
  std::stringstream s;
  write_checkpoint(s, Checkpoint{init_params(h, 1), std::nullopt});
  std::istringstream truncated(s.str().substr(0, s.str().size() - 3));
  EXPECT_EQ(code_of([&] { read_checkpoint(truncated); }), ErrorCode::kIncompatibleCheckpoint);
  std::string wrong_version = s.str();
  wrong_version[8] = 7;
  std::istringstream v(wrong_version);
  EXPECT_EQ(code_of([&] { read_checkpoint(v); }), ErrorCode::kIncompatibleCheckpoint);
}

TEST(Checkpoint, SaveLeavesNoTemporary) {
  const fs::path dir = scratch_dir("ckpt");
  ScoreNetHyper h;
  h.num_layers = 1;
  h.hidden_dim = 4;
  const Checkpoint ckpt{init_params(h, 2), std::nullopt};
  save_checkpoint(dir / "model.ckpt", ckpt);
  save_checkpoint(dir / "model.ckpt", ckpt);
  int files = 0;
  for (const auto &entry : fs::directory_iterator(dir)) {
    ++files;
    EXPECT_EQ(entry.path().filename(), "model.ckpt");
  }
  EXPECT_EQ(files, 1);
  EXPECT_EQ(load_checkpoint(dir / "model.ckpt").params.flatten(), ckpt.params.flatten());
}

TEST(Report, FixedKeysAndNulls) {
  EnsembleMetricsReport r;
  r.num_molecules = 2;
  r.primary_delta = 0.5;
  r.thresholds.push_back({0.5, summarize({50.0, 100.0}), summarize({0.0, 0.0})});
  r.thresholds.push_back({1.0, summarize({100.0, 100.0}), summarize({0.0, 0.0})});
  r.mat = summarize({0.2, 0.4});
  r.mmd_all = summarize({0.01});
  const std::string text = format_report(r);
  for (const char *key : {"num_molecules", "delta", "cov_mean", "cov_median", "mis_mean",
                          "mis_median", "mat_mean", "mat_median", "mmd_single_mean",
                          "mmd_single_median", "mmd_pair_mean", "mmd_pair_median",
                          "mmd_all_mean", "mmd_all_median", "thresholds"})
    EXPECT_NE(text.find(std::string("\"") + key + "\""), std::string::npos) << key;
  EXPECT_NE(text.find("\"cov_mean\": 75.0"), std::string::npos) << text;
  EXPECT_NE(text.find("\"mmd_pair_mean\": null"), std::string::npos) << text;
}
