#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli/commands.hpp"
#include "cli/run_config.hpp"
#include "json.hpp"
#include "scoreconf/checkpoint.hpp"
#include "scoreconf/error.hpp"
#include "scoreconf/io.hpp"
#include "scoreconf/toydata.hpp"

using namespace scoreconf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path &p, const std::string &text) {
  std::ofstream(p) << text;
}

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("scoreconf_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  std::string path(const std::string &name) const { return (dir / name).string(); }

  void small_config(const std::string &name, const std::string &dataset,
                    const std::string &ckpt, int epochs = 2) {
    write_text(dir / name, R"({"dataset": ")" + dataset + R"(", "checkpoint": ")" + ckpt +
                               R"(", "model": {"num_layers": 1, "hidden_dim": 8, "max_atomic_number": 9},
 "schedule": {"sigma_1": 1.0, "sigma_L": 0.1, "num_levels": 4},
 "train": {"epochs": )" + std::to_string(epochs) +
                               R"(, "batch_size": 4, "learning_rate": 0.001, "lr_decay": 0.9, "seed": 3},
 "sampling": {"epsilon": 0.0001, "steps_per_level": 5}})");
  }

  fs::path dir;
};

} // namespace

TEST_F(CliTest, HelpExitsZero) {
  EXPECT_EQ(invoke({"--help"}).code, cli::kExitOk);
  EXPECT_EQ(invoke({"sample", "--help"}).code, cli::kExitOk);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(invoke({}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"sample", "--graphs", "x"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"make-toy-data", "--output", path("t.jsonl"), "--family", "hexagon"}).code,
            cli::kExitUsage);
}

TEST_F(CliTest, MakeToyDataWritesRecords) {
  const Outcome o = invoke({"make-toy-data", "--output", path("tri.jsonl"), "--count", "5"});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto records = load_dataset(path("tri.jsonl"));
  ASSERT_EQ(records.size(), 5u);
  EXPECT_EQ(records[0].id, "rigid_triangle-0");
  ASSERT_EQ(invoke({"make-toy-data", "--output", path("one.jsonl"), "--count", "7",
                 "--family", "two_mode_chain", "--single-record"})
                .code,
            0);
  const auto one = load_dataset(path("one.jsonl"));
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].conformations.size(), 7u);
  EXPECT_FALSE(fs::exists(path("one.jsonl.tmp")));
}

TEST_F(CliTest, MissingDatasetNamesThePath) {
  small_config("run.json", "absent.jsonl", "model.ckpt");
  const Outcome o = invoke({"train", path("run.json")});
  EXPECT_EQ(o.code, cli::kExitUsage);
  EXPECT_NE(o.err.find(path("absent.jsonl")), std::string::npos) << o.err;
  const Outcome missing = invoke({"train", path("nope.json")});
  EXPECT_EQ(missing.code, cli::kExitUsage);
  EXPECT_NE(missing.err.find("nope.json"), std::string::npos);
}

TEST_F(CliTest, UnknownConfigKeyIsUsageError) {
  write_text(dir / "bad.json", R"({"dataset": "d", "checkpoint": "c", "train": {"epoch": 3}})");
  const Outcome o = invoke({"train", path("bad.json")});
  EXPECT_EQ(o.code, cli::kExitUsage);
  EXPECT_NE(o.err.find("epoch"), std::string::npos);
}

TEST_F(CliTest, ConfigPathsResolveAgainstConfigDirectory) {
  const cli::RunConfig c = cli::parse_run_config(
      R"({"dataset": "d.jsonl", "checkpoint": "/abs/m.ckpt", "schedule": {"num_levels": 7}})",
      "/base/dir");
  EXPECT_EQ(c.dataset, fs::path("/base/dir/d.jsonl"));
  EXPECT_EQ(c.checkpoint, fs::path("/abs/m.ckpt"));
  EXPECT_EQ(c.log, fs::path("/abs/m.ckpt.log"));
  EXPECT_EQ(c.schedule.levels, 7);
  EXPECT_EQ(c.schedule.sigma_1, 10.0);
}

TEST_F(CliTest, TrainMatchesLibraryAndIsReproducible) {
  ASSERT_EQ(invoke({"make-toy-data", "--output", path("tri.jsonl"), "--count", "6"}).code, 0);
  small_config("run.json", "tri.jsonl", "a.ckpt");
  small_config("run2.json", "tri.jsonl", "b.ckpt");
  const Outcome o = invoke({"train", path("run.json")});
  ASSERT_EQ(o.code, 0) << o.err;
  ASSERT_EQ(invoke({"train", path("run2.json")}).code, 0);

  EXPECT_EQ(slurp(path("a.ckpt")), slurp(path("b.ckpt")));
  EXPECT_EQ(slurp(path("a.ckpt.log")), slurp(path("b.ckpt.log")));
  const std::string log = slurp(path("a.ckpt.log"));
  EXPECT_EQ(log.substr(0, log.find('\n')), "epoch mean_loss lr");
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 3);

  const cli::RunConfig cfg = cli::load_run_config(path("run.json"));
  std::vector<TrainingExample> examples;
  for (const DatasetRecord &r : load_dataset(path("tri.jsonl")))
    for (const Conformation &c : r.conformations)
      examples.push_back({r.graph, c});
  const TrainResult direct = train(examples, cfg.schedule.build(), cfg.model, cfg.train);
  const Checkpoint ckpt = load_checkpoint(path("a.ckpt"));
  EXPECT_EQ(ckpt.params.flatten(), direct.params.flatten());
  ASSERT_TRUE(ckpt.schedule.has_value());
  EXPECT_EQ(*ckpt.schedule, cfg.schedule);
}

TEST_F(CliTest, SampleEvalRoundTrip) {
  ASSERT_EQ(invoke({"make-toy-data", "--output", path("tri.jsonl"), "--count", "4",
                 "--single-record"})
                .code,
            0);
  small_config("run.json", "tri.jsonl", "m.ckpt", 1);
  ASSERT_EQ(invoke({"train", path("run.json")}).code, 0);

  const std::vector<std::string> base{"sample", "--checkpoint", path("m.ckpt"), "--graphs",
                                      path("tri.jsonl"), "--config", path("run.json"),
                                      "--seed", "11"};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> a = base;
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  };

  const Outcome none = invoke(with({"--output", path("zero.xyz"), "--count", "0"}));
  ASSERT_EQ(none.code, 0) << none.err;
  EXPECT_TRUE(fs::exists(path("zero.xyz")));
  EXPECT_EQ(slurp(path("zero.xyz")), "");

  ASSERT_EQ(invoke(with({"--output", path("a.xyz"), "--count", "3"})).code, 0);
  ASSERT_EQ(invoke(with({"--output", path("b.xyz"), "--count", "3", "--threads", "2"})).code, 0);
  EXPECT_EQ(slurp(path("a.xyz")), slurp(path("b.xyz")));
  std::ifstream in(path("a.xyz"));
  const auto frames = read_xyz(in);
  ASSERT_EQ(frames.size(), 3u);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(frames[k].properties.at("mol_id"), "rigid_triangle");
    EXPECT_EQ(frames[k].properties.at("chain"), std::to_string(k));
    EXPECT_TRUE(frames[k].properties.contains("seed"));
  }

  // Evaluating the reference set against itself.
  std::ofstream ref(path("ref.xyz"));
  const auto records = load_dataset(path("tri.jsonl"));
  for (const Conformation &c : records[0].conformations)
    write_xyz_frame(ref, records[0].graph.atoms(), c, {{"mol_id", "rigid_triangle"}});
  ref.close();
  const Outcome self = invoke({"eval", "--generated", path("ref.xyz"), "--reference",
                            path("ref.xyz"), "--graphs", path("tri.jsonl")});
  ASSERT_EQ(self.code, 0) << self.err;
  const auto report = nlohmann::json::parse(self.out);
  EXPECT_EQ(report["cov_mean"].get<double>(), 100.0);
  EXPECT_LE(report["mat_mean"].get<double>(), 1e-5);
  EXPECT_EQ(report["mmd_all_mean"].get<double>(), 0.0);
  EXPECT_EQ(report["thresholds"].size(), 16u);

  const Outcome gen = invoke({"eval", "--generated", path("a.xyz"), "--reference", path("ref.xyz"),
                           "--graphs", path("tri.jsonl"), "--output", path("report.json"),
                           "--sweep", "0.5,1.0"});
  ASSERT_EQ(gen.code, 0) << gen.err;
  EXPECT_EQ(nlohmann::json::parse(slurp(path("report.json")))["thresholds"].size(), 3u);

  const Outcome empty = invoke({"eval", "--generated", path("zero.xyz"), "--reference",
                             path("ref.xyz"), "--graphs", path("tri.jsonl")});
  EXPECT_EQ(empty.code, cli::kExitFailure);
}

TEST_F(CliTest, EvalMatchesLibraryOnTwoMolecules) {
  std::vector<DatasetRecord> records;
  for (auto [family, id] : {std::pair{ToyFamily::kRigidChain, "chain"},
                            std::pair{ToyFamily::kTwoModeChain, "twist"}}) {
    ToySpec s;
    s.family = family;
    s.num_atoms = 5;
    s.count = 3;
    s.jitter_std = 0.1;
    DatasetRecord r{id, {}, {}};
    for (const TrainingExample &ex : generate(s)) {
      r.graph = ex.graph;
      r.conformations.push_back(ex.conformation);
    }
    records.push_back(std::move(r));
  }
  save_dataset(path("mols.jsonl"), records);

  std::vector<MoleculeEnsemble> expected;
  std::ofstream gen(path("gen.xyz"));
  for (std::size_t m = 0; m < records.size(); ++m) {
    ToySpec s;
    s.family = m == 0 ? ToyFamily::kRigidChain : ToyFamily::kTwoModeChain;
    s.num_atoms = 5;
    s.count = 4;
    s.seed = 50 + m;
    s.jitter_std = 0.2;
    MoleculeEnsemble e{&records[m].graph, {}, records[m].conformations};
    for (const TrainingExample &ex : generate(s)) {
      write_xyz_frame(gen, records[m].graph.atoms(), ex.conformation, {{"mol_id", records[m].id}});
      // Compare against what the file holds after printing.
      Eigen::Matrix3Xd rounded = ex.conformation.coords.unaryExpr(
          [](double v) { return std::round(v * 1e6) / 1e6; });
      e.generated.push_back(Conformation(rounded));
    }
    expected.push_back(std::move(e));
  }
  gen.close();

  const std::vector<double> sweep{0.3, 0.9};
  const EnsembleMetricsReport want = evaluate_ensembles(expected, 0.5, sweep);
  const Outcome o = invoke({"eval", "--generated", path("gen.xyz"), "--reference",
                         path("mols.jsonl"), "--graphs", path("mols.jsonl"), "--sweep",
                         "0.3,0.9"});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto got = nlohmann::json::parse(o.out);
  EXPECT_EQ(got["num_molecules"].get<int>(), 2);
  EXPECT_NEAR(got["mat_mean"].get<double>(), *want.mat.mean, 1e-9);
  EXPECT_NEAR(got["cov_mean"].get<double>(), *want.primary().cov.mean, 1e-9);
  EXPECT_NEAR(got["thresholds"][2]["mis_mean"].get<double>(), *want.thresholds[2].mis.mean, 1e-9);
  EXPECT_NEAR(got["mmd_single_mean"].get<double>(), *want.mmd_single.mean, 1e-9);

  std::ofstream stray(path("stray.xyz"));
  write_xyz_frame(stray, records[0].graph.atoms(), records[0].conformations[0], {{"mol_id", "ghost"}});
  stray.close();
  EXPECT_EQ(invoke({"eval", "--generated", path("stray.xyz"), "--reference", path("mols.jsonl"),
                 "--graphs", path("mols.jsonl")})
                .code,
            cli::kExitUsage);
  std::ofstream wrong(path("wrong.xyz"));
  write_xyz_frame(wrong, records[1].graph.atoms(), records[1].conformations[0], {{"mol_id", "chain"}});
  wrong.close();
  EXPECT_EQ(invoke({"eval", "--generated", path("wrong.xyz"), "--reference", path("mols.jsonl"),
                 "--graphs", path("mols.jsonl")})
                .code,
            cli::kExitUsage);
}

TEST_F(CliTest, CheckpointTooSmallForMolecule) {
  ASSERT_EQ(invoke({"make-toy-data", "--output", path("s.jsonl"), "--atomic-number", "16"}).code, 0);
  ScoreNetHyper h;
  h.num_layers = 1;
  h.hidden_dim = 4;
  h.max_atomic_number = 9;
  save_checkpoint(path("small.ckpt"), {init_params(h, 1), ScheduleSpec{1.0, 0.1, 3}});
  const Outcome o = invoke({"sample", "--checkpoint", path("small.ckpt"), "--graphs", path("s.jsonl"),
                         "--output", path("o.xyz")});
  EXPECT_EQ(o.code, cli::kExitFailure);
  EXPECT_FALSE(fs::exists(path("o.xyz")));
  EXPECT_FALSE(fs::exists(path("o.xyz.tmp")));
}

TEST(FrameId, Sanitises) {
  EXPECT_EQ(cli::frame_id("a b=c\"d", 0), "a_b_c_d");
  EXPECT_EQ(cli::frame_id("", 4), "mol4");
  EXPECT_EQ(cli::frame_id("ok-1", 2), "ok-1");
}
