#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "roadbeh/gcn.hpp"
#include "roadbeh/synth.hpp"
#include "roadbeh/train.hpp"

namespace roadbeh {

/// Everything a subcommand reads. Loaded from --config, then overridden by
/// flags (or ROADBEH_<FLAG> environment variables), and echoed as config.json
/// into every output directory.
struct RunConfig {
  SynthConfig synth;
  SplitRatios split;
  ModelConfig model;
  TrainConfig train;
  double deadband = kDefaultDeadband;
  std::vector<double> fractions{0.05, 0.1, 0.2};
  std::string data;        // scene corpus directory (train/val/test.jsonl) or file
  std::string out;         // output directory
  std::string checkpoint;  // checkpoint file
  std::string eval_split = "test";
  std::vector<std::pair<std::string, std::string>> targets;  // transfer: name → scene path
};

nlohmann::json to_json(const RunConfig& cfg);
/// Unknown keys at any level throw ConfigError.
RunConfig run_config_from_json(const nlohmann::json& doc);

/// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace roadbeh
