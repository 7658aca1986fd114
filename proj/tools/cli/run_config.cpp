#include "run_config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include "json.hpp"

#include "scoreconf/error.hpp"

namespace scoreconf::cli {
namespace {

using json = nlohmann::json;

void only_keys(const json &obj, std::string_view where,
               std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object())
    throw Error(ErrorCode::kParseError, std::string(where) + " must be a JSON object");
  for (const auto &item : obj.items()) {
    bool known = false;
    for (std::string_view key : allowed)
      known = known || item.key() == key;
    if (!known)
      throw Error(ErrorCode::kParseError,
                  "unknown key \"" + item.key() + "\" in " + std::string(where));
  }
}

template <class T>
void read(const json &obj, const char *key, T &dst) {
  if (obj.contains(key))
    dst = obj.at(key).get<T>();
}

std::filesystem::path resolve(const std::filesystem::path &base, const std::string &p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

} // namespace

void RunConfig::validate() const {
  model.validate();
  train.validate();
  sampling.validate();
  (void)schedule.build();
}

RunConfig parse_run_config(const std::string &text, const std::filesystem::path &base_dir) {
  RunConfig cfg;
  try {
    const json root = json::parse(text);
    only_keys(root, "config",
              {"dataset", "checkpoint", "log", "model", "schedule", "train", "sampling"});
    if (!root.contains("dataset") || !root.contains("checkpoint"))
      throw Error(ErrorCode::kParseError, "config needs \"dataset\" and \"checkpoint\"");
    cfg.dataset = resolve(base_dir, root.at("dataset").get<std::string>());
    cfg.checkpoint = resolve(base_dir, root.at("checkpoint").get<std::string>());
    cfg.log = root.contains("log") ? resolve(base_dir, root.at("log").get<std::string>())
                                   : std::filesystem::path(cfg.checkpoint.string() + ".log");

    if (root.contains("model")) {
      const json &m = root.at("model");
      only_keys(m, "model", {"num_layers", "hidden_dim", "max_atomic_number"});
      read(m, "num_layers", cfg.model.num_layers);
      read(m, "hidden_dim", cfg.model.hidden_dim);
      read(m, "max_atomic_number", cfg.model.max_atomic_number);
    }
    if (root.contains("schedule")) {
      const json &s = root.at("schedule");
      only_keys(s, "schedule", {"sigma_1", "sigma_L", "num_levels"});
      read(s, "sigma_1", cfg.schedule.sigma_1);
      read(s, "sigma_L", cfg.schedule.sigma_L);
      read(s, "num_levels", cfg.schedule.levels);
    }
    if (root.contains("train")) {
      const json &t = root.at("train");
      only_keys(t, "train",
                {"epochs", "batch_size", "learning_rate", "lr_decay", "seed", "threads"});
      read(t, "epochs", cfg.train.epochs);
      read(t, "batch_size", cfg.train.batch_size);
      read(t, "learning_rate", cfg.train.initial_lr);
      read(t, "lr_decay", cfg.train.lr_decay_rate);
      read(t, "seed", cfg.train.seed);
      read(t, "threads", cfg.train.threads);
    }
    if (root.contains("sampling")) {
      const json &s = root.at("sampling");
      only_keys(s, "sampling", {"epsilon", "steps_per_level", "prior_std", "clamp_distance"});
      read(s, "epsilon", cfg.sampling.epsilon);
      read(s, "steps_per_level", cfg.sampling.steps_per_level);
      read(s, "prior_std", cfg.sampling.prior_std);
      read(s, "clamp_distance", cfg.sampling.clamp_distance);
    }
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kParseError, std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::kIoError, "cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.parent_path());
}

} // namespace scoreconf::cli
