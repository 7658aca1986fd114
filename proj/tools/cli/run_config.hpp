#pragma once

#include <filesystem>
#include <string>

#include "scoreconf/checkpoint.hpp"
#include "scoreconf/dsm.hpp"
#include "scoreconf/sampler.hpp"
#include "scoreconf/scorenet.hpp"

namespace scoreconf::cli {

// Training configuration file (JSON). Every section and key is optional
// except "dataset" and "checkpoint"; unknown keys are rejected. Relative
// paths resolve against the directory holding the config file.
//
//   {
//     "dataset": "train.jsonl",
//     "checkpoint": "model.ckpt",
//     "log": "train.log",                 // default: <checkpoint>.log
//     "model": {"num_layers": 4, "hidden_dim": 256, "max_atomic_number": 10},
//     "schedule": {"sigma_1": 10.0, "sigma_L": 0.01, "num_levels": 50},
//     "train": {"epochs": 200, "batch_size": 128, "learning_rate": 0.001,
//               "lr_decay": 0.95, "seed": 0, "threads": 1},
//     "sampling": {"epsilon": 2.4e-6, "steps_per_level": 100,
//                  "prior_std": 1.0, "clamp_distance": 0.001}
//   }
struct RunConfig {
  std::filesystem::path dataset;
  std::filesystem::path checkpoint;
  std::filesystem::path log;
  ScoreNetHyper model;
  ScheduleSpec schedule;
  TrainConfig train;
  LangevinConfig sampling;

  void validate() const;
};

RunConfig parse_run_config(const std::string &text, const std::filesystem::path &base_dir);
RunConfig load_run_config(const std::filesystem::path &path);

} // namespace scoreconf::cli
