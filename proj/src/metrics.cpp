#include "roadbeh/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace roadbeh {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

double f1_of(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

void fill_from_confusion(RunScores& s, const std::array<bool, kNumClasses>& include) {
  std::size_t tp_all = 0, total = 0, predicted_total = 0;
  Averages macro;
  std::size_t counted = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::size_t tp = s.confusion[c][c], support = 0, predicted = 0;
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      support += s.confusion[c][k];
      predicted += s.confusion[k][c];
    }
    ClassScores& cs = s.classes[c];
    cs.support = support;
    cs.precision = ratio(tp, predicted);
    cs.recall = support ? std::optional<double>(ratio(tp, support)) : std::nullopt;
    cs.f1 = f1_of(cs.precision, cs.recall.value_or(0.0));
    tp_all += tp;
    total += support;
    predicted_total += predicted;
    if (support && include[c]) {
      macro.precision += cs.precision;
      macro.recall += *cs.recall;
      macro.f1 += cs.f1;
      ++counted;
    }
  }
  if (counted) {
    macro.precision /= static_cast<double>(counted);
    macro.recall /= static_cast<double>(counted);
    macro.f1 /= static_cast<double>(counted);
  }
  s.macro = macro;
  s.micro.precision = ratio(tp_all, predicted_total);
  s.micro.recall = ratio(tp_all, total);
  s.micro.f1 = f1_of(s.micro.precision, s.micro.recall);
}

}  // namespace

RunScores score_predictions(std::span<const int> truth, std::span<const int> predicted, std::string run) {
  if (truth.size() != predicted.size()) throw std::invalid_argument("truth and predictions differ in length");
  RunScores s;
  s.run = std::move(run);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= static_cast<int>(kNumClasses) || predicted[i] < 0 ||
        predicted[i] >= static_cast<int>(kNumClasses))
      throw std::invalid_argument("class index out of range");
    ++s.confusion[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
  }
  fill_from_confusion(s, {true, true, true, true, true, true});
  return s;
}

RunScores mean_scores(std::span<const RunScores> runs) {
  RunScores m;
  m.run = "mean";
  std::size_t n = 0;
  std::array<std::size_t, kNumClasses> recall_n{};
  std::array<double, kNumClasses> recall_sum{};
  for (const RunScores& r : runs) {
    if (r.failed) continue;
    ++n;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      m.classes[c].precision += r.classes[c].precision;
      m.classes[c].f1 += r.classes[c].f1;
      m.classes[c].support += r.classes[c].support;
      if (r.classes[c].recall) {
        recall_sum[c] += *r.classes[c].recall;
        ++recall_n[c];
      }
      for (std::size_t k = 0; k < kNumClasses; ++k) m.confusion[c][k] += r.confusion[c][k];
    }
    m.micro.precision += r.micro.precision;
    m.micro.recall += r.micro.recall;
    m.micro.f1 += r.micro.f1;
    m.macro.precision += r.macro.precision;
    m.macro.recall += r.macro.recall;
    m.macro.f1 += r.macro.f1;
  }
  if (n == 0) {
    m.failed = true;
    m.failure = "no successful runs";
    return m;
  }
  const double dn = static_cast<double>(n);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    m.classes[c].precision /= dn;
    m.classes[c].f1 /= dn;
    m.classes[c].support /= n;
    if (recall_n[c]) m.classes[c].recall = recall_sum[c] / static_cast<double>(recall_n[c]);
  }
  for (Averages* a : {&m.micro, &m.macro}) {
    a->precision /= dn;
    a->recall /= dn;
    a->f1 /= dn;
  }
  return m;
}

EvalReport make_report(std::string method, std::string split, std::vector<RunScores> runs) {
  EvalReport r;
  r.method = std::move(method);
  r.split = std::move(split);
  r.runs = std::move(runs);
  r.mean = mean_scores(r.runs);
  return r;
}

void drop_absent_classes(EvalReport& report) {
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    bool any = false;
    for (const RunScores& r : report.runs) any = any || r.classes[c].support > 0;
    report.reported[c] = any;
  }
  for (RunScores& r : report.runs)
    if (!r.failed) fill_from_confusion(r, report.reported);
  report.mean = mean_scores(report.runs);
}

bool operator==(const EvalReport& a, const EvalReport& b) {
  // NaN attention rows compare by serialized form
  return to_json(a) == to_json(b);
}

namespace {

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json to_json(const RunScores& s, const std::array<bool, kNumClasses>& reported) {
  nlohmann::json classes = nlohmann::json::object();
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (!reported[c]) continue;
    const ClassScores& cs = s.classes[c];
    classes[std::string(to_string(kAllClasses[c]))] = {
        {"precision", cs.precision},
        {"recall", cs.recall ? nlohmann::json(*cs.recall) : nlohmann::json(nullptr)},
        {"f1", cs.f1},
        {"support", cs.support}};
  }
  nlohmann::json out = {
      {"run", s.run},
      {"classes", classes},
      {"micro_avg", {{"precision", s.micro.precision}, {"recall", s.micro.recall}, {"f1", s.micro.f1}}},
      {"macro_avg", {{"precision", s.macro.precision}, {"recall", s.macro.recall}, {"f1", s.macro.f1}}},
      {"confusion", s.confusion}};
  if (s.failed) out["failure"] = s.failure;
  return out;
}

}  // namespace

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json runs = nlohmann::json::array();
  for (const RunScores& r : report.runs) runs.push_back(to_json(r, report.reported));
  nlohmann::json out = {{"method", report.method},
                        {"split", report.split},
                        {"class_order", nlohmann::json::array()},
                        {"runs", runs},
                        {"mean", to_json(report.mean, report.reported)}};
  for (BehaviorClass c : kAllClasses) out["class_order"].push_back(to_string(c));
  if (report.attention) {
    nlohmann::json rows = nlohmann::json::object();
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      nlohmann::json row = nlohmann::json::array();
      for (double v : report.attention->rows[c]) row.push_back(num(v));
      rows[std::string(to_string(kAllClasses[c]))] = row;
    }
    out["attention"] = {{"columns", {"node", "move_forward", "move_backward", "left_to_right", "right_to_left", "no_change"}},
                        {"rows", rows}};
  }
  return out;
}

std::string report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "method,split,run,class,precision,recall,f1,support\n";
  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  auto emit = [&](const RunScores& s) {
    const std::string prefix = report.method + "," + report.split + "," + s.run + ",";
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      if (!report.reported[c]) continue;
      const ClassScores& cs = s.classes[c];
      out << prefix << to_string(kAllClasses[c]) << ',' << fmt(cs.precision) << ','
          << (cs.recall ? fmt(*cs.recall) : std::string()) << ',' << fmt(cs.f1) << ',' << cs.support << '\n';
    }
    out << prefix << "micro_avg," << fmt(s.micro.precision) << ',' << fmt(s.micro.recall) << ','
        << fmt(s.micro.f1) << ",\n";
    out << prefix << "macro_avg," << fmt(s.macro.precision) << ',' << fmt(s.macro.recall) << ','
        << fmt(s.macro.f1) << ",\n";
  };
  for (const RunScores& r : report.runs) emit(r);
  emit(report.mean);
  return out.str();
}

}  // namespace roadbeh
