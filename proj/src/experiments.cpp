#include "roadbeh/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace roadbeh {

const ScarcityCell* ScarcityResult::find(double fraction, const std::string& model) const {
  for (const ScarcityCell& c : cells)
    if (c.fraction == fraction && c.model == model) return &c;
  return nullptr;
}

ScarcityResult scarcity_experiment(std::span<const Scene> train_scenes, const GraphSet& val, const GraphSet& test,
                                   std::span<const double> fractions, std::span<const ModelConfig> models,
                                   TrainConfig cfg, double deadband) {
  ScarcityResult out;
  for (double f : fractions) {
    cfg.label_fraction = f;
    for (const ModelConfig& m : models) {
      TrainOutcome o = train_and_evaluate(m, train_scenes, val, test, cfg, deadband);
      out.any_failed = out.any_failed || o.any_failed();
      ScarcityCell cell;
      cell.fraction = f;
      cell.model = method_name(m);
      for (std::size_t c = 0; c < kNumClasses; ++c)
        cell.recall[c] = o.report.mean.classes[c].recall.value_or(std::numeric_limits<double>::quiet_NaN());
      cell.macro_recall = o.report.mean.macro.recall;
      cell.report = std::move(o.report);
      out.cells.push_back(std::move(cell));
    }
  }
  return out;
}

std::string scarcity_csv(const ScarcityResult& result) {
  std::ostringstream out;
  out << "fraction,model,class,recall\n";
  char buf[64];
  for (const ScarcityCell& cell : result.cells) {
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      std::snprintf(buf, sizeof buf, "%g", cell.fraction);
      out << buf << ',' << cell.model << ',' << to_string(kAllClasses[c]) << ',';
      if (std::isnan(cell.recall[c])) {
        out << '\n';
        continue;
      }
      std::snprintf(buf, sizeof buf, "%.2f", cell.recall[c]);
      out << buf << '\n';
    }
  }
  return out.str();
}

TransferResult transfer_experiment(const ModelConfig& model, std::span<const Scene> train_scenes,
                                   const GraphSet& val, const GraphSet& source_test,
                                   const std::vector<std::pair<std::string, GraphSet>>& targets,
                                   const TrainConfig& cfg, double deadband) {
  TrainOutcome o = train_and_evaluate(model, train_scenes, val, source_test, cfg, deadband);
  TransferResult out;
  out.any_failed = o.any_failed();
  out.source = o.report;
  out.source.attention.reset();
  for (const auto& [name, set] : targets) {
    std::vector<RunScores> runs;
    for (const TrainResult& r : o.runs) {
      const std::string run = "seed" + std::to_string(r.seed);
      if (r.failed) {
        RunScores s;
        s.run = run;
        s.failed = true;
        s.failure = r.failure;
        runs.push_back(std::move(s));
      } else {
        runs.push_back(evaluate_model(r.best, set, run));
      }
    }
    EvalReport rep = make_report(method_name(model), name, std::move(runs));
    drop_absent_classes(rep);
    out.targets.push_back(std::move(rep));
  }
  return out;
}

}  // namespace roadbeh
