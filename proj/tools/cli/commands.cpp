#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>

#include "CLI11.hpp"

#include "run_config.hpp"
#include "scoreconf/checkpoint.hpp"
#include "scoreconf/error.hpp"
#include "scoreconf/io.hpp"
#include "scoreconf/metrics.hpp"
#include "scoreconf/random.hpp"
#include "scoreconf/sampler.hpp"
#include "scoreconf/toydata.hpp"

namespace scoreconf::cli {
namespace fs = std::filesystem;
namespace {

std::string fmt(const char *spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

void require_file(const fs::path &path, const std::string &what) {
  if (!fs::is_regular_file(path))
    throw Error(ErrorCode::kIoError, what + " not found: " + path.string());
}

// Writes through a sibling temporary that is renamed over path on commit.
class AtomicFile {
public:
  explicit AtomicFile(fs::path path)
      : path_(std::move(path)), tmp_(path_.string() + ".tmp"), out_(tmp_) {
    if (!out_)
      throw Error(ErrorCode::kIoError, "cannot open " + tmp_.string() + " for writing");
  }
  ~AtomicFile() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }
  std::ostream &stream() { return out_; }
  void commit() {
    out_.close();
    if (!out_)
      throw Error(ErrorCode::kIoError, "failed writing " + tmp_.string());
    fs::rename(tmp_, path_);
    committed_ = true;
  }

private:
  fs::path path_, tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

MolecularGraph model_graph(const MolecularGraph &g) {
  return g.is_extended() ? g : extend_graph(g);
}

// --------------------------------------------------------------------- train

int cmd_train(const fs::path &config_path, std::ostream &out) {
  const RunConfig cfg = load_run_config(config_path);
  require_file(cfg.dataset, "dataset");
  const std::vector<DatasetRecord> records = load_dataset(cfg.dataset);

  std::vector<TrainingExample> examples;
  for (const DatasetRecord &rec : records) {
    for (int z : rec.graph.atoms())
      if (z > cfg.model.max_atomic_number)
        throw Error(ErrorCode::kInvalidArgument,
                    "record " + rec.id + " has atomic number " + std::to_string(z) +
                        " above model.max_atomic_number");
    const MolecularGraph g = model_graph(rec.graph);
    for (const Conformation &c : rec.conformations)
      examples.push_back({g, c});
  }
  if (examples.empty())
    throw Error(ErrorCode::kEmptyDataset, "dataset has no conformations: " + cfg.dataset.string());

  std::ofstream log(cfg.log);
  if (!log)
    throw Error(ErrorCode::kIoError, "cannot open log " + cfg.log.string());
  log << "epoch mean_loss lr\n";
  const NoiseSchedule schedule = cfg.schedule.build();
  out << "training on " << examples.size() << " conformations from " << records.size()
      << " molecules, " << parameter_count(cfg.model) << " parameters\n";

  const TrainResult result =
      train(examples, schedule, cfg.model, cfg.train, [&](const EpochLog &e) {
        const std::string line = std::to_string(e.epoch + 1) + " " +
                                 fmt("%.17g", e.mean_loss) + " " + fmt("%.17g", e.lr);
        log << line << '\n' << std::flush;
        out << "epoch " << e.epoch + 1 << "/" << cfg.train.epochs << " loss "
            << fmt("%.6g", e.mean_loss) << " lr " << fmt("%.3g", e.lr) << '\n';
      });
  if (!log)
    throw Error(ErrorCode::kIoError, "failed writing log " + cfg.log.string());

  save_checkpoint(cfg.checkpoint, {result.params, cfg.schedule});
  out << "wrote " << cfg.checkpoint.string() << '\n';
  return kExitOk;
}

// -------------------------------------------------------------------- sample

struct SampleArgs {
  fs::path checkpoint, graphs, output, config;
  int count = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  std::optional<double> epsilon, prior_std, clamp_distance, sigma_1, sigma_L;
  std::optional<int> steps_per_level, levels;
  std::string mol_id;
};

int cmd_sample(const SampleArgs &a, std::ostream &out) {
  require_file(a.checkpoint, "checkpoint");
  require_file(a.graphs, "graph file");
  if (a.count < 0)
    throw Error(ErrorCode::kInvalidArgument, "--count must be >= 0");

  LangevinConfig lc;
  std::optional<ScheduleSpec> config_schedule;
  if (!a.config.empty()) {
    const RunConfig rc = load_run_config(a.config);
    lc = rc.sampling;
    config_schedule = rc.schedule;
  }
  if (a.epsilon) lc.epsilon = *a.epsilon;
  if (a.steps_per_level) lc.steps_per_level = *a.steps_per_level;
  if (a.prior_std) lc.prior_std = *a.prior_std;
  if (a.clamp_distance) lc.clamp_distance = *a.clamp_distance;
  lc.validate();

  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  ScheduleSpec spec = ckpt.schedule ? *ckpt.schedule
                                    : config_schedule.value_or(ScheduleSpec{});
  if (a.sigma_1) spec.sigma_1 = *a.sigma_1;
  if (a.sigma_L) spec.sigma_L = *a.sigma_L;
  if (a.levels) spec.levels = *a.levels;
  const NoiseSchedule schedule = spec.build();

  const std::vector<DatasetRecord> records = load_dataset(a.graphs);
  AtomicFile file(a.output);
  int written = 0;
  for (std::size_t m = 0; m < records.size(); ++m) {
    const std::string id = frame_id(records[m].id, m);
    if (!a.mol_id.empty() && id != a.mol_id)
      continue;
    for (int z : records[m].graph.atoms())
      if (z > ckpt.params.hyper.max_atomic_number)
        throw Error(ErrorCode::kIncompatibleCheckpoint,
                    "molecule " + id + " has atomic number " + std::to_string(z) +
                        ", checkpoint supports up to " +
                        std::to_string(ckpt.params.hyper.max_atomic_number));
    const MolecularGraph g = model_graph(records[m].graph);
    LangevinConfig mol = lc;
    mol.seed = derive_rng(a.seed, {static_cast<std::uint64_t>(m)})();
    const std::vector<Conformation> confs =
        sample_many(g, ckpt.params, schedule, mol, a.count, a.threads);
    for (int k = 0; k < a.count; ++k) {
      write_xyz_frame(file.stream(), g.atoms(), confs[k],
                      {{"Properties", "species:S:1:pos:R:3"},
                       {"mol_id", id},
                       {"seed", std::to_string(chain_seed(mol.seed, k))},
                       {"chain", std::to_string(k)}});
      ++written;
    }
  }
  if (!a.mol_id.empty() && written == 0 && a.count > 0)
    throw Error(ErrorCode::kInvalidArgument, "no molecule with id " + a.mol_id);
  file.commit();
  out << "wrote " << written << " conformations to " << a.output.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------- eval

struct EvalArgs {
  fs::path generated, reference, graphs, output;
  double delta = 0.5;
  std::vector<double> sweep{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8,
                            0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5};
};

using ConformationSets = std::map<std::string, std::vector<Conformation>>;

void check_shape(const MolecularGraph &g, const std::string &id, const XyzFrame &frame,
                 const fs::path &file) {
  bool ok = frame.conformation.num_atoms() == g.num_atoms();
  for (std::size_t i = 0; ok && i < frame.symbols.size(); ++i)
    ok = atomic_number(frame.symbols[i]) == g.atoms()[i];
  if (!ok)
    throw Error(ErrorCode::kShapeMismatch,
                file.string() + ": frame for " + id + " does not match its graph (" +
                    std::to_string(frame.conformation.num_atoms()) + " atoms vs " +
                    std::to_string(g.num_atoms()) + ")");
}

ConformationSets read_frames(const fs::path &file,
                             const std::map<std::string, const MolecularGraph *> &graphs) {
  ConformationSets sets;
  for (const XyzFrame &frame : load_xyz(file)) {
    std::string id;
    if (auto it = frame.properties.find("mol_id"); it != frame.properties.end())
      id = it->second;
    else if (graphs.size() == 1)
      id = graphs.begin()->first;
    else
      throw Error(ErrorCode::kParseError,
                  file.string() + ": frame without mol_id and several graphs");
    const auto g = graphs.find(id);
    if (g == graphs.end())
      throw Error(ErrorCode::kParseError, file.string() + ": unknown mol_id " + id);
    check_shape(*g->second, id, frame, file);
    sets[id].push_back(frame.conformation);
  }
  return sets;
}

ConformationSets read_reference_records(const fs::path &file,
                                        const std::map<std::string, const MolecularGraph *> &graphs) {
  ConformationSets sets;
  const std::vector<DatasetRecord> records = load_dataset(file);
  for (std::size_t m = 0; m < records.size(); ++m) {
    const std::string id = frame_id(records[m].id, m);
    const auto g = graphs.find(id);
    if (g == graphs.end())
      throw Error(ErrorCode::kParseError, file.string() + ": unknown molecule id " + id);
    if (records[m].graph.atoms().size() != g->second->atoms().size() ||
        !std::equal(records[m].graph.atoms().begin(), records[m].graph.atoms().end(),
                    g->second->atoms().begin()))
      throw Error(ErrorCode::kShapeMismatch,
                  file.string() + ": atoms of " + id + " differ from the graph file");
    auto &dst = sets[id];
    dst.insert(dst.end(), records[m].conformations.begin(), records[m].conformations.end());
  }
  return sets;
}

int cmd_eval(const EvalArgs &a, std::ostream &out) {
  require_file(a.generated, "generated file");
  require_file(a.reference, "reference file");
  require_file(a.graphs, "graph file");
  if (!(a.delta > 0.0) || std::any_of(a.sweep.begin(), a.sweep.end(),
                                      [](double d) { return !(d > 0.0); }))
    throw Error(ErrorCode::kInvalidArgument, "thresholds must be positive");

  const std::vector<DatasetRecord> records = load_dataset(a.graphs);
  std::vector<MolecularGraph> graphs;
  std::vector<std::string> ids;
  std::map<std::string, const MolecularGraph *> by_id;
  graphs.reserve(records.size());
  for (std::size_t m = 0; m < records.size(); ++m) {
    graphs.push_back(records[m].graph);
    ids.push_back(frame_id(records[m].id, m));
  }
  for (std::size_t m = 0; m < graphs.size(); ++m)
    if (!by_id.emplace(ids[m], &graphs[m]).second)
      throw Error(ErrorCode::kParseError,
                  a.graphs.string() + ": duplicate molecule id " + ids[m]);

  ConformationSets generated = read_frames(a.generated, by_id);
  ConformationSets reference = a.reference.extension() == ".xyz"
                                   ? read_frames(a.reference, by_id)
                                   : read_reference_records(a.reference, by_id);

  std::vector<MoleculeEnsemble> molecules;
  for (std::size_t m = 0; m < graphs.size(); ++m) {
    if (generated[ids[m]].empty())
      throw Error(ErrorCode::kEmptySet, "no generated conformations for " + ids[m]);
    if (reference[ids[m]].empty())
      throw Error(ErrorCode::kEmptySet, "no reference conformations for " + ids[m]);
    molecules.push_back({&graphs[m], std::move(generated[ids[m]]),
                         std::move(reference[ids[m]])});
  }
  const std::string report = format_report(evaluate_ensembles(molecules, a.delta, a.sweep));
  if (a.output.empty()) {
    out << report;
  } else {
    AtomicFile file(a.output);
    file.stream() << report;
    file.commit();
    out << "wrote " << a.output.string() << '\n';
  }
  return kExitOk;
}

// ------------------------------------------------------------- make-toy-data

int cmd_make_toy(const ToySpec &spec, const fs::path &output, bool single_record,
                 std::ostream &out) {
  const std::vector<TrainingExample> samples = generate(spec);
  const std::string family(toy_family_name(spec.family));
  std::vector<DatasetRecord> records;
  if (single_record) {
    DatasetRecord rec{family, samples.front().graph, {}};
    for (const TrainingExample &s : samples)
      rec.conformations.push_back(s.conformation);
    records.push_back(std::move(rec));
  } else {
    for (std::size_t k = 0; k < samples.size(); ++k)
      records.push_back({family + "-" + std::to_string(k), samples[k].graph,
                         {samples[k].conformation}});
  }
  AtomicFile file(output);
  write_dataset(file.stream(), records);
  file.commit();
  out << "wrote " << records.size() << " records to " << output.string() << '\n';
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
  case ErrorCode::kIoError:
  case ErrorCode::kParseError:
  case ErrorCode::kShapeMismatch:
  case ErrorCode::kInvalidArgument:
  case ErrorCode::kInvalidSpec:
  case ErrorCode::kInvalidRange:
    return kExitUsage;
  default:
    return kExitFailure;
  }
}

} // namespace

std::string frame_id(const std::string &id, std::size_t index) {
  if (id.empty())
    return "mol" + std::to_string(index);
  std::string out = id;
  for (char &c : out)
    if (std::isspace(static_cast<unsigned char>(c)) || c == '"' || c == '\'' || c == '=')
      c = '_';
  return out;
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Score-based molecular conformation generation", "scoreconf"};
  app.require_subcommand(1);

  fs::path config_path;
  auto *train = app.add_subcommand("train", "Train a score network from a JSON config");
  train->add_option("config", config_path, "Training config file")->required();

  SampleArgs sa;
  auto *sample = app.add_subcommand("sample", "Generate conformations with annealed Langevin dynamics");
  sample->add_option("--checkpoint", sa.checkpoint, "Trained checkpoint")->required();
  sample->add_option("--graphs", sa.graphs, "Dataset file whose records give the graphs")->required();
  sample->add_option("--output", sa.output, "Extended-XYZ output file")->required();
  sample->add_option("--count", sa.count, "Conformations per molecule")->capture_default_str();
  sample->add_option("--seed", sa.seed, "Base random seed")->capture_default_str();
  sample->add_option("--threads", sa.threads, "Parallel chains")->capture_default_str();
  sample->add_option("--config", sa.config, "Take sampling settings and fallback schedule from a training config");
  sample->add_option("--mol-id", sa.mol_id, "Only sample this molecule");
  sample->add_option("--epsilon", sa.epsilon, "Step size at the smallest noise level (default 2.4e-6)");
  sample->add_option("--steps-per-level", sa.steps_per_level, "Langevin steps per noise level (default 100)");
  sample->add_option("--prior-std", sa.prior_std, "Std of the initial coordinates in A (default 1)");
  sample->add_option("--clamp-distance", sa.clamp_distance, "Lower bound on distances in the coordinate score (default 1e-3)");
  sample->add_option("--sigma-1", sa.sigma_1, "Override the largest noise level");
  sample->add_option("--sigma-L", sa.sigma_L, "Override the smallest noise level");
  sample->add_option("--levels", sa.levels, "Override the number of noise levels");

  EvalArgs ea;
  auto *eval = app.add_subcommand("eval", "Compute COV/MAT/MIS/MMD of generated against reference conformations");
  eval->add_option("--generated", ea.generated, "Extended-XYZ file of generated conformations")->required();
  eval->add_option("--reference", ea.reference, "Reference conformations (.xyz or dataset .jsonl)")->required();
  eval->add_option("--graphs", ea.graphs, "Dataset file whose records give the graphs")->required();
  eval->add_option("--output", ea.output, "Report file (JSON); stdout if omitted");
  eval->add_option("--delta", ea.delta, "Primary RMSD threshold in A")->capture_default_str();
  eval->add_option("--sweep", ea.sweep, "Additional thresholds in A")->delimiter(',')->capture_default_str();

  ToySpec ts;
  std::string family = "rigid_triangle";
  fs::path toy_output;
  bool single_record = false;
  auto *toy = app.add_subcommand("make-toy-data", "Write a synthetic toy dataset");
  toy->add_option("--family", family, "rigid_triangle, rigid_chain or two_mode_chain")->capture_default_str();
  toy->add_option("--output", toy_output, "Dataset file to write")->required();
  toy->add_option("--count", ts.count, "Number of conformations")->capture_default_str();
  toy->add_option("--seed", ts.seed, "Random seed")->capture_default_str();
  toy->add_option("--num-atoms", ts.num_atoms, "Atoms in rigid_chain")->capture_default_str();
  toy->add_option("--bond-length", ts.bond_length, "Bond length in A")->capture_default_str();
  toy->add_option("--angle", ts.angle_deg, "Bend angle in degrees (chains)")->capture_default_str();
  toy->add_option("--dihedral", ts.dihedral_deg, "Dihedral magnitude in degrees (two_mode_chain)")->capture_default_str();
  toy->add_option("--jitter", ts.jitter_std, "Coordinate noise std in A")->capture_default_str();
  toy->add_option("--atomic-number", ts.atomic_number, "Atomic number of every atom")->capture_default_str();
  toy->add_flag("--single-record", single_record, "Store all conformations in one record");

  std::vector<std::string> argv_storage{"scoreconf"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char *> argv;
  for (std::string &s : argv_storage)
    argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train)
      return cmd_train(config_path, out);
    if (*sample)
      return cmd_sample(sa, out);
    if (*eval)
      return cmd_eval(ea, out);
    const auto parsed = parse_toy_family(family);
    if (!parsed)
      throw Error(ErrorCode::kInvalidSpec, "unknown toy family " + family);
    ts.family = *parsed;
    return cmd_make_toy(ts, toy_output, single_record, out);
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

} // namespace scoreconf::cli
