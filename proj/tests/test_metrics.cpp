#include <algorithm>
#include <random>

#include "doctest.h"
#include "roadbeh/metrics.hpp"

using namespace roadbeh;

namespace {

std::pair<std::vector<int>, std::vector<int>> random_labels(std::size_t n, std::uint64_t seed, int classes = 6) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> c(0, classes - 1);
  std::vector<int> t(n), p(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = c(rng);
    p[i] = rng() % 3 == 0 ? c(rng) : t[i];
  }
  return {t, p};
}

}  // namespace

TEST_CASE("perfect predictions score 100 everywhere") {
  std::vector<int> t{0, 1, 2, 3, 4, 5, 0, 2};
  const RunScores s = score_predictions(t, t);
  for (const ClassScores& c : s.classes) {
    CHECK(c.precision == 100.0);
    CHECK(c.recall == 100.0);
    CHECK(c.f1 == 100.0);
  }
  CHECK(s.micro.f1 == 100.0);
  CHECK(s.macro.f1 == 100.0);
}

TEST_CASE("single-class predictor on balanced data") {
  std::vector<int> t, p;
  for (int c = 0; c < 6; ++c)
    for (int i = 0; i < 10; ++i) {
      t.push_back(c);
      p.push_back(2);
    }
  const RunScores s = score_predictions(t, p);
  CHECK(s.micro.precision == doctest::Approx(100.0 / 6));
  CHECK(s.micro.recall == doctest::Approx(100.0 / 6));
  CHECK(s.micro.f1 == doctest::Approx(16.67).epsilon(1e-3));
  CHECK(s.classes[2].precision == doctest::Approx(100.0 / 6));
  CHECK(s.classes[2].recall == 100.0);
  CHECK(s.classes[0].precision == 0.0);  // 0/0 counts as 0
  CHECK(s.classes[0].f1 == 0.0);
}

TEST_CASE("per-class values match a direct count") {
  const auto [t, p] = random_labels(500, 3);
  const RunScores s = score_predictions(t, p);
  double macro = 0;
  for (int c = 0; c < 6; ++c) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      tp += t[i] == c && p[i] == c;
      fp += t[i] != c && p[i] == c;
      fn += t[i] == c && p[i] != c;
    }
    const double prec = 100 * tp / (tp + fp), rec = 100 * tp / (tp + fn);
    CHECK(s.classes[c].precision == doctest::Approx(prec).epsilon(1e-12));
    CHECK(*s.classes[c].recall == doctest::Approx(rec).epsilon(1e-12));
    CHECK(s.classes[c].f1 == doctest::Approx(2 * prec * rec / (prec + rec)).epsilon(1e-12));
    CHECK(s.classes[c].support == static_cast<std::size_t>(tp + fn));
    macro += s.classes[c].f1;
  }
  CHECK(s.macro.f1 == doctest::Approx(macro / 6).epsilon(1e-12));
}

TEST_CASE("metric identities") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto [t, p] = random_labels(200, seed);
    const RunScores s = score_predictions(t, p);
    const double acc = 100.0 * static_cast<double>(std::count_if(t.begin(), t.end(), [&, i = 0](int v) mutable {
                         return v == p[i++];
                       })) / 200.0;
    CHECK(s.micro.precision == doctest::Approx(acc));
    CHECK(s.micro.recall == doctest::Approx(acc));
    CHECK(s.micro.f1 == doctest::Approx(acc));
    double lo = 1e9, hi = -1;
    for (const auto& c : s.classes) {
      lo = std::min(lo, c.f1);
      hi = std::max(hi, c.f1);
    }
    CHECK(s.macro.f1 <= hi + 1e-12);
    CHECK(s.macro.f1 >= lo - 1e-12);
    for (int c = 0; c < 6; ++c) {
      std::size_t row = 0;
      for (std::size_t k = 0; k < 6; ++k) row += s.confusion[c][k];
      CHECK(row == s.classes[c].support);
    }
  }
}

TEST_CASE("classes without support") {
  const std::vector<int> t{0, 0, 1, 1}, p{0, 1, 1, 5};
  const RunScores s = score_predictions(t, p);
  CHECK_FALSE(s.classes[3].recall.has_value());
  CHECK_FALSE(s.classes[5].recall.has_value());
  CHECK(s.classes[5].precision == 0.0);
  // macro over MAU and MTU only
  CHECK(s.macro.recall == doctest::Approx(50.0));
  EvalReport r = make_report("rules", "test", {s});
  drop_absent_classes(r);
  CHECK(r.reported == std::array<bool, 6>{true, true, false, false, false, false});
  const auto j = to_json(r);
  CHECK(j["runs"][0]["classes"].contains("MAU"));
  CHECK_FALSE(j["runs"][0]["classes"].contains("OVT"));
  CHECK_FALSE(report_csv(r).find(",OVT,") != std::string::npos);
}

TEST_CASE("mean over runs and report formats") {
  const auto [t1, p1] = random_labels(100, 1);
  const auto [t2, p2] = random_labels(100, 2);
  RunScores a = score_predictions(t1, p1, "seed1");
  RunScores b = score_predictions(t2, p2, "seed2");
  RunScores failed;
  failed.run = "seed3";
  failed.failed = true;
  failed.failure = "loss diverged";
  const EvalReport r = make_report("mrgcn", "test", {a, b, failed});
  CHECK(r.mean.macro.f1 == doctest::Approx((a.macro.f1 + b.macro.f1) / 2));
  CHECK(r.mean.classes[4].precision == doctest::Approx((a.classes[4].precision + b.classes[4].precision) / 2));
  CHECK(r.mean.confusion[1][1] == a.confusion[1][1] + b.confusion[1][1]);
  const auto j = to_json(r);
  CHECK(j["method"] == "mrgcn");
  CHECK(j["class_order"] == nlohmann::json{"MAU", "MTU", "PRK", "LCL", "LCR", "OVT"});
  CHECK(j["runs"].size() == 3);
  CHECK(j["runs"][2]["failure"] == "loss diverged");
  const std::string csv = report_csv(r);
  CHECK(csv.rfind("method,split,run,class,precision,recall,f1,support\n", 0) == 0);
  CHECK(csv.find("mrgcn,test,mean,macro_avg,") != std::string::npos);
  char buf[64];
  std::snprintf(buf, sizeof buf, "mrgcn,test,seed1,MAU,%.2f,", a.classes[0].precision);
  CHECK(csv.find(buf) != std::string::npos);
  CHECK(make_report("mrgcn", "test", {a, b, failed}) == r);
}
