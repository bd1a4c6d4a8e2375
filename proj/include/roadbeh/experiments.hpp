#pragma once

// Label-scarcity and cross-regime transfer harnesses.

#include <string>
#include <utility>
#include <vector>

#include "roadbeh/train.hpp"

namespace roadbeh {

struct ScarcityCell {
  double fraction = 0.0;
  std::string model;  // method_name()
  std::array<double, kNumClasses> recall{};  // mean over seeds, NaN without support
  double macro_recall = 0.0;
  EvalReport report;
};

struct ScarcityResult {
  std::vector<ScarcityCell> cells;  // fraction-major, models in the order given
  bool any_failed = false;
  const ScarcityCell* find(double fraction, const std::string& model) const;
};

ScarcityResult scarcity_experiment(std::span<const Scene> train_scenes, const GraphSet& val, const GraphSet& test,
                                   std::span<const double> fractions, std::span<const ModelConfig> models,
                                   TrainConfig cfg, double deadband = kDefaultDeadband);

/// "fraction,model,class,recall", one row per fraction × model × class.
std::string scarcity_csv(const ScarcityResult& result);

struct TransferResult {
  EvalReport source;                 // held-out split of the training regime
  std::vector<EvalReport> targets;   // split = target name, absent classes dropped
  bool any_failed = false;
};

/// Trains once per seed on the source regime, then scores each checkpoint on
/// every target without further training.
TransferResult transfer_experiment(const ModelConfig& model, std::span<const Scene> train_scenes,
                                   const GraphSet& val, const GraphSet& source_test,
                                   const std::vector<std::pair<std::string, GraphSet>>& targets,
                                   const TrainConfig& cfg, double deadband = kDefaultDeadband);

}  // namespace roadbeh
