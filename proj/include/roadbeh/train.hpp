#pragma once

// Training loop, Adam, and evaluation of trained models and the rule baseline.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "roadbeh/gcn.hpp"
#include "roadbeh/interaction_graph.hpp"
#include "roadbeh/metrics.hpp"

namespace roadbeh {

struct TrainConfig {
  std::size_t epochs = 200;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t patience = 30;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  double label_fraction = 1.0;
  std::size_t jobs = 0;  // 0 = OpenMP default

  void validate() const;  // throws ConfigError
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& doc, TrainConfig base = {});

/// Interaction graphs of a split next to their model-ready form. Scenes whose
/// graph cannot be built are listed in `errors` and left out.
struct GraphSet {
  std::vector<InteractionGraph> graphs;
  std::vector<PreparedGraph> prepared;
  std::vector<std::string> errors;
  std::size_t size() const { return graphs.size(); }
};

GraphSet build_graph_set(std::span<const Scene> scenes, double deadband = kDefaultDeadband);
GraphSet graph_set_from(std::vector<InteractionGraph> graphs);

class Adam {
 public:
  Adam(const ParamStore& shape, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(ParamStore& params, const ParamStore& grads);
  std::size_t steps() const { return t_; }

 private:
  ParamStore m_, v_;
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
};

struct TrainResult {
  std::uint64_t seed = 0;
  Checkpoint best;
  double best_val_macro_f1 = -1.0;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  std::vector<double> epoch_loss;  // mean training loss per epoch
  bool failed = false;
  std::string failure;
};

struct EpochLog {
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_macro_f1 = 0.0;
  bool improved = false;
};
using EpochCallback = std::function<void(const EpochLog&)>;

/// One seed: shuffled single-graph Adam steps, early stopping on validation
/// macro-F1. Graphs without supervised vehicles are skipped.
TrainResult train_model(const ModelConfig& model, const GraphSet& train, const GraphSet& val,
                        const TrainConfig& cfg, std::uint64_t seed, const EpochCallback& on_epoch = {});

/// Labeled vehicles only. Graphs are evaluated in parallel.
RunScores evaluate_model(const Checkpoint& ck, const GraphSet& split, std::string run = "");
RunScores evaluate_model_serial(const Checkpoint& ck, const GraphSet& split, std::string run = "");
RunScores evaluate_rules(const GraphSet& split, std::string run = "rules");

struct TrainOutcome {
  std::vector<TrainResult> runs;  // in seed order
  EvalReport report;              // test split
  std::vector<AttentionSummary> attention;  // per seed (attention models only)
  bool any_failed() const;
};

std::string method_name(const ModelConfig& model);

/// Every seed of cfg.seeds, in parallel up to cfg.jobs; each seed trains on its
/// own label subsample when cfg.label_fraction < 1.
TrainOutcome train_and_evaluate(const ModelConfig& model, std::span<const Scene> train_scenes,
                                const GraphSet& val, const GraphSet& test, const TrainConfig& cfg,
                                double deadband = kDefaultDeadband, const EpochCallback& on_epoch = {});

}  // namespace roadbeh
