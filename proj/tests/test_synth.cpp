#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "roadbeh/synth.hpp"

using namespace roadbeh;

namespace {

SynthConfig clean(std::size_t per_class = 20) {
  SynthConfig cfg;
  cfg.scenes_per_class = per_class;
  cfg.noise_sigma = {0.0, 0.0};
  cfg.dropout = {0.0, 0.0};
  return cfg;
}

std::vector<const Track*> markings(const Scene& s) {
  std::vector<const Track*> out;
  for (const Track& t : s.tracks)
    if (t.kind == EntityKind::LaneMarking) out.push_back(&t);
  return out;
}

std::map<BehaviorClass, std::size_t> label_counts(const std::vector<Scene>& scenes) {
  std::map<BehaviorClass, std::size_t> n;
  for (const Scene& s : scenes)
    for (const Track& t : s.tracks)
      if (t.label) ++n[*t.label];
  return n;
}

}  // namespace

TEST_CASE("same seed gives byte-identical corpora") {
  SynthConfig cfg;
  cfg.scenes_per_class = 15;
  const auto a = synth_corpus(cfg), b = synth_corpus(cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(to_json(a[i]).dump() == to_json(b[i]).dump());
  cfg.seed = 2;
  CHECK(to_json(synth_corpus(cfg)[0]).dump() != to_json(a[0]).dump());
}

TEST_CASE("scene structure") {
  SynthConfig cfg;
  cfg.scenes_per_class = 30;
  const auto corpus = synth_corpus(cfg);
  CHECK(corpus.size() == 180);
  for (const Scene& s : corpus) {
    validate_scene(s);
    CHECK(markings(s).size() >= 2);
    CHECK(s.vehicle_count() >= 1);
    CHECK(s.vehicle_count() <= cfg.max_vehicles);
    for (const Track& t : s.tracks)
      if (t.kind == EntityKind::Vehicle) CHECK(t.label.has_value());
    if (s.meta.focus_class == BehaviorClass::OVT) {
      REQUIRE(s.meta.witness_pairs.size() == 1);
      const auto& [i, j] = s.meta.witness_pairs[0];
      CHECK(s.find(i)->label == BehaviorClass::OVT);
      CHECK(s.find(j)->label != BehaviorClass::OVT);
    }
  }
}

TEST_CASE("noise-free kinematics match the labels") {
  const SynthConfig cfg = clean(40);
  for (const Scene& s : synth_corpus(cfg)) {
    const auto marks = markings(s);
    for (const Track& t : s.tracks) {
      if (t.kind != EntityKind::Vehicle) continue;
      const Point2 a = *t.points.front(), b = *t.points.back();
      switch (*t.label) {
        case BehaviorClass::PRK:
          // constant offset to every marking: both share the ego-frame drift
          for (const Track* m : marks)
            for (std::size_t f = 0; f < s.frames; ++f) {
              CHECK(std::abs((t.points[f]->x - m->points[f]->x) - (a.x - m->points[0]->x)) < 1e-9);
              CHECK(std::abs((t.points[f]->y - m->points[f]->y) - (a.y - m->points[0]->y)) < 1e-9);
            }
          break;
        case BehaviorClass::MAU:
          CHECK(b.y > a.y);
          break;
        case BehaviorClass::MTU:
          CHECK(b.y < a.y);
          break;
        case BehaviorClass::LCL:
        case BehaviorClass::LCR: {
          const double dx = b.x - a.x;
          // LCL moves left to right (+x), LCR right to left
          if (t.label == BehaviorClass::LCL)
            CHECK(dx >= cfg.lane_width - 1e-9);
          else
            CHECK(dx <= -cfg.lane_width + 1e-9);
          // the marking between start and end x is crossed exactly once
          const Track* crossed = nullptr;
          for (const Track* m : marks) {
            const double mx = m->points[0]->x;
            if ((mx - a.x) * (mx - b.x) < 0) crossed = m;
          }
          REQUIRE(crossed != nullptr);
          int changes = 0;
          for (std::size_t f = 1; f < s.frames; ++f) {
            const double before = t.points[f - 1]->x - crossed->points[f - 1]->x;
            const double after = t.points[f]->x - crossed->points[f]->x;
            if ((before < 0) != (after < 0)) ++changes;
          }
          CHECK(changes == 1);
          break;
        }
        case BehaviorClass::OVT:
          break;
      }
    }
    for (const auto& [i, j] : s.meta.witness_pairs) {
      const Track& over = *s.find(i);
      const Track& under = *s.find(j);
      CHECK(over.points.front()->y < under.points.front()->y);
      CHECK(over.points.back()->y > under.points.back()->y);
    }
  }
}

TEST_CASE("labels do not depend on the noise draw") {
  SynthConfig noisy;
  noisy.scenes_per_class = 10;
  SynthConfig quiet = noisy;
  quiet.noise_sigma = {0.0, 0.0};
  quiet.dropout = {0.0, 0.0};
  const auto a = synth_corpus(noisy), b = synth_corpus(quiet);
  for (std::size_t s = 0; s < a.size(); ++s) {
    REQUIRE(a[s].tracks.size() == b[s].tracks.size());
    for (std::size_t t = 0; t < a[s].tracks.size(); ++t) CHECK(a[s].tracks[t].label == b[s].tracks[t].label);
  }
}

TEST_CASE("infeasible configs are rejected") {
  SynthConfig cfg;
  cfg.max_vehicles = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.noise_sigma = {0.5, 0.1};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.dropout = {0.0, 1.5};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_THROWS_AS(synth_config_from_json({{"bogus", 1}}), ConfigError);
  cfg = {};
  cfg.seed = 9;
  cfg.lane_width = 3.25;
  CHECK(synth_config_from_json(to_json(cfg)) == cfg);
}

TEST_CASE("split is stratified, deterministic and exhaustive") {
  SynthConfig cfg;
  cfg.scenes_per_class = 100;
  const auto corpus = synth_corpus(cfg);
  const CorpusSplit s = split_corpus(corpus, {}, 7);
  std::map<BehaviorClass, std::array<std::size_t, 3>> per;
  for (const Scene& x : s.train) ++per[*scene_stratum(x)][0];
  for (const Scene& x : s.val) ++per[*scene_stratum(x)][1];
  for (const Scene& x : s.test) ++per[*scene_stratum(x)][2];
  for (BehaviorClass c : kAllClasses) CHECK(per[c] == std::array<std::size_t, 3>{70, 15, 15});

  const CorpusSplit again = split_corpus(corpus, {}, 7);
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);

  std::vector<std::string> all, ids;
  for (const auto* part : {&s.train, &s.val, &s.test})
    for (const Scene& x : *part) ids.push_back(x.id);
  for (const Scene& x : corpus) all.push_back(x.id);
  std::sort(all.begin(), all.end());
  std::sort(ids.begin(), ids.end());
  CHECK(ids == all);

  CHECK_THROWS_AS(split_corpus(corpus, {0.5, 0.3, 0.3}, 1), ConfigError);
  CHECK_THROWS_AS(split_corpus(corpus, {1.0, 0.0, 0.0}, 1), ConfigError);
}

TEST_CASE("tiny strata warn but still partition") {
  SynthConfig cfg;
  cfg.scenes_per_class = 2;
  const auto corpus = synth_corpus(cfg);
  const CorpusSplit s = split_corpus(corpus, {}, 1);
  CHECK(s.train.size() + s.val.size() + s.test.size() == corpus.size());
  CHECK_FALSE(s.warnings.empty());
}

TEST_CASE("label subsampling") {
  // 100 labeled vehicles per class, one per scene
  std::vector<Scene> scenes;
  for (BehaviorClass c : kAllClasses)
    for (int i = 0; i < 100; ++i) {
      Scene s;
      s.id = std::string(to_string(c)) + std::to_string(i);
      Track t;
      t.id = "v";
      t.points.assign(10, Point2{0, 1});
      t.label = c;
      s.tracks.push_back(t);
      scenes.push_back(s);
    }
  CHECK(subsample_labels(scenes, 1.0, 3).scenes == scenes);
  const auto five = subsample_labels(scenes, 0.05, 3);
  for (const auto& [c, n] : label_counts(five.scenes)) CHECK(n == 5);
  CHECK(label_counts(five.scenes).size() == 6);
  CHECK(subsample_labels(scenes, 0.05, 3).scenes == five.scenes);
  CHECK(subsample_labels(scenes, 0.05, 4).scenes != five.scenes);
  const auto tiny = subsample_labels(scenes, 0.001, 3);
  for (const auto& [c, n] : label_counts(tiny.scenes)) CHECK(n == 1);
  CHECK_THROWS(subsample_labels(scenes, 0.0, 3));
  CHECK_THROWS(subsample_labels(scenes, 1.5, 3));
}
