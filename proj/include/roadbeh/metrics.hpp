#pragma once

// Per-class precision / recall / F1 and their micro and macro averages, in percent.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "roadbeh/gcn.hpp"
#include "roadbeh/scene.hpp"

namespace roadbeh {

struct ClassScores {
  double precision = 0.0;
  std::optional<double> recall;  // null when the class has no support
  double f1 = 0.0;
  std::size_t support = 0;
  friend bool operator==(const ClassScores&, const ClassScores&) = default;
};

struct Averages {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  friend bool operator==(const Averages&, const Averages&) = default;
};

using Confusion = std::array<std::array<std::size_t, kNumClasses>, kNumClasses>;  // [truth][predicted]

struct RunScores {
  std::string run;  // "seed1", ..., or "mean"
  std::array<ClassScores, kNumClasses> classes{};
  Averages micro;
  Averages macro;  // over classes with support only
  Confusion confusion{};
  bool failed = false;
  std::string failure;
  friend bool operator==(const RunScores&, const RunScores&) = default;
};

/// truth[i] / predicted[i] are class indices of one vehicle each.
RunScores score_predictions(std::span<const int> truth, std::span<const int> predicted, std::string run = "");

struct EvalReport {
  std::string method;  // "rules", "mrgcn", "rel_att_gcn"
  std::string split;
  std::vector<RunScores> runs;
  RunScores mean;
  std::array<bool, kNumClasses> reported{true, true, true, true, true, true};
  std::optional<AttentionSummary> attention;
  friend bool operator==(const EvalReport& a, const EvalReport& b);
};

/// Averages every field of the non-failed runs; the confusion matrix is summed.
RunScores mean_scores(std::span<const RunScores> runs);
EvalReport make_report(std::string method, std::string split, std::vector<RunScores> runs);
/// Hides classes without support from the report and recomputes the macro
/// averages over the remaining ones.
void drop_absent_classes(EvalReport& report);

nlohmann::json to_json(const EvalReport& report);
/// "method,split,run,class,precision,recall,f1,support", two decimals; the
/// micro and macro rows use class "micro_avg" / "macro_avg" and empty support.
std::string report_csv(const EvalReport& report);

}  // namespace roadbeh
