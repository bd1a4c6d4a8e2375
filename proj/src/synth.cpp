#include "roadbeh/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "roadbeh/rng.hpp"

namespace roadbeh {

using nlohmann::json;

namespace {

// Marking dashes sit in one longitudinal band [band_lo, band_lo + kBandWidth]
// (world frame). Vehicles that move along the road cross the whole band with at
// least kCrossMargin clearance on both sides; parked vehicles and lane changers
// stay clear of it.
constexpr double kBandWidth = 2.0;
constexpr double kCrossMargin = 1.5;
constexpr double kPassMargin = 1.5;
// Pairs in relative motion never start or end within this distance on either
// axis, so the relation does not depend on the deadband for noise-free clips.
constexpr double kEndClearance = 0.5;
constexpr double kParkClearance = 2.5;
constexpr double kShoulderOffset = 1.5;
constexpr double kLaneChangeReach = 20.0;
constexpr int kSceneAttempts = 200;
constexpr int kActorAttempts = 40;

double smoothstep(double s) { return s * s * (3.0 - 2.0 * s); }

enum class Motion { Parked, Along, Oncoming };

struct Actor {
  BehaviorClass label = BehaviorClass::MAU;
  Motion motion = Motion::Along;
  std::vector<Point2> world;
};

struct Layout {
  std::size_t lanes = 3;
  std::size_t ego_lane = 1;
  double lane_width = 3.5;
  // lane 0 is the oncoming lane; lanes 1..lanes-1 run with the ego.
  double lane_center(std::size_t k) const {
    return (static_cast<double>(k) - static_cast<double>(ego_lane)) * lane_width;
  }
  // line k separates lane k-1 and lane k; lines 0 and `lanes` are the road edges.
  double line_x(std::size_t k) const {
    return (static_cast<double>(k) - static_cast<double>(ego_lane) - 0.5) * lane_width;
  }
  double shoulder_x() const { return line_x(lanes) + kShoulderOffset; }
};

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

class SceneBuilder {
 public:
  SceneBuilder(const SynthConfig& cfg, Rng& rng) : cfg_(cfg), rng_(rng) {
    duration_ = static_cast<double>(cfg.frames - 1) * cfg.dt;
    layout_.lanes = pick(rng_, cfg.min_lanes, cfg.max_lanes);
    layout_.ego_lane = pick(rng_, 1, layout_.lanes - 1);
    layout_.lane_width = cfg.lane_width;
    ego_speed_ = uniform(rng_, cfg.ego_speed.lo, cfg.ego_speed.hi);
    band_lo_ = uniform(rng_, 4.0, 14.0);
    band_hi_ = band_lo_ + kBandWidth;
  }

  bool place_focus(BehaviorClass focus) {
    focus_ = focus;
    switch (focus) {
      case BehaviorClass::MAU:
      case BehaviorClass::MTU:
      case BehaviorClass::PRK: {
        const std::size_t n = std::min<std::size_t>(pick(rng_, 1, 2), cfg_.max_vehicles);
        for (std::size_t i = 0; i < n; ++i)
          if (!place_with_retries(focus)) return false;
        return true;
      }
      case BehaviorClass::LCL:
      case BehaviorClass::LCR:
        focus_lane_ = pick(rng_, 1, layout_.lanes - 2);
        return place_with_retries(focus);
      case BehaviorClass::OVT:
        return place_overtake();
    }
    return false;
  }

  void place_distractors() {
    const std::size_t room = cfg_.max_vehicles - actors_.size();
    const std::size_t n = std::min(room, pick(rng_, 0, cfg_.max_distractors));
    static constexpr std::array<BehaviorClass, 3> kKinds = {BehaviorClass::MAU, BehaviorClass::MTU,
                                                            BehaviorClass::PRK};
    for (std::size_t i = 0; i < n; ++i) place_with_retries(kKinds[pick(rng_, 0, 2)]);
  }

  Scene finish(std::size_t index) {
    Scene scene;
    scene.id = std::string(to_string(focus_)) + "-" + pad(index);
    scene.frames = cfg_.frames;
    const double sigma = uniform(rng_, cfg_.noise_sigma.lo, cfg_.noise_sigma.hi);
    const double drop = uniform(rng_, cfg_.dropout.lo, cfg_.dropout.hi);
    scene.meta.noise_sigma = sigma;
    scene.meta.focus_class = focus_;
    if (witness_) {
      scene.meta.witness_pairs.emplace_back("v" + std::to_string(witness_->first),
                                            "v" + std::to_string(witness_->second));
    }

    for (std::size_t a = 0; a < actors_.size(); ++a) {
      Track t;
      t.id = "v" + std::to_string(a);
      t.kind = EntityKind::Vehicle;
      t.label = actors_[a].label;
      t.points = to_ego(actors_[a].world);
      scene.tracks.push_back(std::move(t));
    }
    const auto dashes = place_markings();
    for (std::size_t d = 0; d < dashes.size(); ++d) {
      Track t;
      t.id = "m" + std::to_string(d);
      t.kind = EntityKind::LaneMarking;
      t.points = to_ego(std::vector<Point2>(cfg_.frames, dashes[d]));
      scene.tracks.push_back(std::move(t));
    }

    std::normal_distribution<double> noise(0.0, 1.0);
    std::bernoulli_distribution dropped(std::clamp(drop, 0.0, 1.0));
    for (Track& t : scene.tracks) {
      for (auto& p : t.points) {
        const double nx = noise(rng_), ny = noise(rng_);
        const bool gone = dropped(rng_);
        if (sigma > 0.0) {
          p->x += sigma * nx;
          p->y += sigma * ny;
        }
        if (gone) p.reset();
      }
      if (t.present_count() < 2) {
        // keep the clip ends so every track still spans the clip
        restore(t, scene, 0);
        restore(t, scene, cfg_.frames - 1);
      }
    }
    return scene;
  }

 private:
  static std::string pad(std::size_t i) {
    std::string s = std::to_string(i);
    return std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s;
  }

  void restore(Track& t, const Scene& scene, std::size_t frame) {
    if (t.points[frame]) return;
    const std::size_t idx = static_cast<std::size_t>(&t - scene.tracks.data());
    const std::vector<Point2> clean =
        idx < actors_.size() ? to_ego_clean(actors_[idx].world)
                             : to_ego_clean(std::vector<Point2>(cfg_.frames, dashes_[idx - actors_.size()]));
    t.points[frame] = clean[frame];
  }

  std::vector<Point2> to_ego_clean(const std::vector<Point2>& world) const {
    std::vector<Point2> out(world.size());
    for (std::size_t t = 0; t < world.size(); ++t)
      out[t] = {world[t].x, world[t].y - ego_speed_ * static_cast<double>(t) * cfg_.dt};
    return out;
  }

  std::vector<std::optional<Point2>> to_ego(const std::vector<Point2>& world) const {
    const auto clean = to_ego_clean(world);
    return {clean.begin(), clean.end()};
  }

  std::vector<Point2> straight(double x, double y0, double speed) const {
    std::vector<Point2> w(cfg_.frames);
    for (std::size_t t = 0; t < cfg_.frames; ++t)
      w[t] = {x, y0 + speed * static_cast<double>(t) * cfg_.dt};
    return w;
  }

  std::size_t along_lane() { return pick(rng_, 1, layout_.lanes - 1); }

  Actor away_actor(std::size_t lane, double speed) {
    const double sweep = speed * duration_;
    const double y0 = uniform(rng_, band_hi_ + kCrossMargin - sweep, band_lo_ - kCrossMargin);
    return {BehaviorClass::MAU, Motion::Along, straight(layout_.lane_center(lane), y0, speed)};
  }

  Actor make(BehaviorClass cls) {
    switch (cls) {
      case BehaviorClass::MAU:
        return away_actor(along_lane(), ego_speed_ + uniform(rng_, cfg_.away_speed_gain.lo, cfg_.away_speed_gain.hi));
      case BehaviorClass::MTU: {
        const double speed = uniform(rng_, cfg_.oncoming_speed.lo, cfg_.oncoming_speed.hi);
        const double sweep = speed * duration_;
        const double y0 = uniform(rng_, band_hi_ + kCrossMargin, band_lo_ - kCrossMargin + sweep);
        return {BehaviorClass::MTU, Motion::Oncoming, straight(layout_.lane_center(0), y0, -speed)};
      }
      case BehaviorClass::PRK: {
        const double x = layout_.shoulder_x() + uniform(rng_, -0.3, 0.3);
        const double below = (band_lo_ - kParkClearance) - (-10.0);
        const double above = 35.0;
        const double u = uniform(rng_, 0.0, below + above);
        const double y = u < below ? -10.0 + u : band_hi_ + kParkClearance + (u - below);
        return {BehaviorClass::PRK, Motion::Parked, straight(x, y, 0.0)};
      }
      case BehaviorClass::LCL:
      case BehaviorClass::LCR: {
        const bool rightward = cls == BehaviorClass::LCL;
        const double from = layout_.lane_center(rightward ? focus_lane_ : focus_lane_ + 1);
        const double to = layout_.lane_center(rightward ? focus_lane_ + 1 : focus_lane_);
        const double speed =
            ego_speed_ + uniform(rng_, cfg_.lane_change_speed_gain.lo, cfg_.lane_change_speed_gain.hi);
        const double sweep = speed * duration_;
        const bool ahead = std::bernoulli_distribution(0.7)(rng_);
        const double y0 = ahead ? uniform(rng_, band_hi_ + kCrossMargin, band_hi_ + kCrossMargin + kLaneChangeReach)
                                : uniform(rng_, band_lo_ - kCrossMargin - sweep - kLaneChangeReach,
                                          band_lo_ - kCrossMargin - sweep);
        Actor a{cls, Motion::Along, straight(from, y0, speed)};
        for (std::size_t t = 0; t < cfg_.frames; ++t) {
          const double s = static_cast<double>(t) / static_cast<double>(cfg_.frames - 1);
          a.world[t].x = from + (to - from) * smoothstep(s);
        }
        return a;
      }
      case BehaviorClass::OVT:
        break;
    }
    throw ConfigError("overtakes are placed as pairs");
  }

  bool place_with_retries(BehaviorClass cls) {
    if (actors_.size() >= cfg_.max_vehicles) return false;
    for (int attempt = 0; attempt < kActorAttempts; ++attempt) {
      Actor a = make(cls);
      if (compatible(a, std::nullopt)) {
        actors_.push_back(std::move(a));
        return true;
      }
    }
    return false;
  }

  bool place_overtake() {
    if (cfg_.max_vehicles < 2) return false;
    for (int attempt = 0; attempt < kActorAttempts; ++attempt) {
      const std::size_t slow_lane = along_lane();
      std::size_t fast_lane = along_lane();
      if (fast_lane == slow_lane) continue;
      const double slow_speed =
          ego_speed_ + uniform(rng_, cfg_.away_speed_gain.lo, cfg_.away_speed_gain.hi);
      const double fast_speed =
          slow_speed + uniform(rng_, cfg_.overtake_speed_gain.lo, cfg_.overtake_speed_gain.hi);
      Actor slow = away_actor(slow_lane, slow_speed);
      const double reach = (fast_speed - slow_speed) * duration_;
      const double gap = uniform(rng_, kPassMargin, reach - kPassMargin);
      Actor fast{BehaviorClass::OVT, Motion::Along,
                 straight(layout_.lane_center(fast_lane), slow.world[0].y - gap, fast_speed)};
      if (!compatible(slow, std::nullopt)) continue;
      actors_.push_back(std::move(slow));
      if (!compatible(fast, actors_.size() - 1)) {
        actors_.pop_back();
        continue;
      }
      actors_.push_back(std::move(fast));
      witness_ = {actors_.size() - 1, actors_.size() - 2};
      return true;
    }
    return false;
  }

  // No near-collisions; along-road vehicles keep their longitudinal order unless
  // `may_pass` names the one vehicle the candidate is meant to overtake.
  bool compatible(const Actor& cand, std::optional<std::size_t> may_pass) const {
    const std::size_t last = cfg_.frames - 1;
    for (std::size_t k = 0; k < actors_.size(); ++k) {
      const Actor& other = actors_[k];
      for (std::size_t t = 0; t < cfg_.frames; ++t) {
        if (std::abs(cand.world[t].x - other.world[t].x) < 2.0 &&
            std::abs(cand.world[t].y - other.world[t].y) < 5.0)
          return false;
      }
      const double dx0 = cand.world[0].x - other.world[0].x;
      const double dx1 = cand.world[last].x - other.world[last].x;
      if (dx0 != dx1 && std::min(std::abs(dx0), std::abs(dx1)) < kEndClearance) return false;
      const double dy0 = cand.world[0].y - other.world[0].y;
      const double dy1 = cand.world[last].y - other.world[last].y;
      if (dy0 != dy1 && std::min(std::abs(dy0), std::abs(dy1)) < kEndClearance) return false;
      if (cand.motion == Motion::Along && other.motion == Motion::Along) {
        const double before = cand.world[0].y - other.world[0].y;
        const double after = cand.world[last].y - other.world[last].y;
        if (std::abs(before) < kPassMargin || std::abs(after) < kPassMargin) return false;
        if ((before < 0.0) != (after < 0.0)) {
          const bool intended = may_pass && *may_pass == k && before < 0.0;
          if (!intended) return false;
        }
      }
    }
    return true;
  }

  std::vector<Point2> place_markings() {
    std::vector<std::size_t> lines(layout_.lanes + 1);
    std::iota(lines.begin(), lines.end(), std::size_t{0});
    std::shuffle(lines.begin(), lines.end(), rng_);
    auto dash_y = [&] { return band_lo_ + uniform(rng_, 0.0, kBandWidth); };
    dashes_.clear();
    if (focus_ == BehaviorClass::LCL || focus_ == BehaviorClass::LCR) {
      const std::size_t crossed = focus_lane_ + 1;
      dashes_.push_back({layout_.line_x(crossed), dash_y()});
      dashes_.push_back({layout_.line_x(crossed), dash_y()});
      std::erase(lines, crossed);
      const std::size_t others = pick(rng_, 1, 2);
      for (std::size_t i = 0; i < others; ++i) dashes_.push_back({layout_.line_x(lines[i]), dash_y()});
    } else {
      const std::size_t marked = pick(rng_, 2, 3);
      for (std::size_t i = 0; i < marked; ++i) {
        const std::size_t per_line = pick(rng_, 1, 2);
        for (std::size_t d = 0; d < per_line; ++d) dashes_.push_back({layout_.line_x(lines[i]), dash_y()});
      }
    }
    return dashes_;
  }

  const SynthConfig& cfg_;
  Rng& rng_;
  Layout layout_;
  double duration_ = 0.0;
  double ego_speed_ = 0.0;
  double band_lo_ = 0.0;
  double band_hi_ = 0.0;
  BehaviorClass focus_ = BehaviorClass::MAU;
  std::size_t focus_lane_ = 1;
  std::vector<Actor> actors_;
  std::vector<Point2> dashes_;
  std::optional<std::pair<std::size_t, std::size_t>> witness_;
};

void check_range(const Range& r, const char* name, double min_lo) {
  if (!(r.lo <= r.hi)) throw ConfigError(std::string(name) + ": empty range");
  if (r.lo < min_lo) throw ConfigError(std::string(name) + ": lower bound below " + std::to_string(min_lo));
}

}  // namespace

void SynthConfig::validate() const {
  if (scenes_per_class == 0) throw ConfigError("scenes_per_class must be >= 1");
  if (frames < 2) throw ConfigError("T must be >= 2");
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  if (!(lane_width > 0.0)) throw ConfigError("lane_width must be > 0");
  if (min_lanes < 3 || min_lanes > max_lanes)
    throw ConfigError("lanes: need 3 <= min_lanes <= max_lanes (one oncoming lane plus two for lane changes)");
  check_range(ego_speed, "ego_speed", 0.0);
  check_range(away_speed_gain, "away_speed_gain", 0.0);
  check_range(oncoming_speed, "oncoming_speed", 0.0);
  check_range(lane_change_speed_gain, "lane_change_speed_gain", 0.0);
  check_range(overtake_speed_gain, "overtake_speed_gain", 0.0);
  check_range(noise_sigma, "noise_sigma", 0.0);
  check_range(dropout, "dropout", 0.0);
  if (dropout.hi > 1.0) throw ConfigError("dropout: probabilities must lie in [0, 1]");
  if (max_vehicles < 2) throw ConfigError("infeasible geometry: an overtake needs at least 2 vehicles (max_vehicles < 2)");
  const double duration = static_cast<double>(frames - 1) * dt;
  const double crossing = kBandWidth + 2.0 * kCrossMargin;
  if ((ego_speed.lo + away_speed_gain.lo) * duration < crossing)
    throw ConfigError("infeasible geometry: slowest receding vehicle cannot cross the marking band in the clip");
  if (oncoming_speed.lo * duration < crossing)
    throw ConfigError("infeasible geometry: slowest oncoming vehicle cannot cross the marking band in the clip");
  if (overtake_speed_gain.lo * duration <= 2.0 * kPassMargin)
    throw ConfigError("infeasible geometry: overtake speed gain too small to complete a pass in the clip");
}

Scene synth_scene(const SynthConfig& cfg, BehaviorClass focus, std::size_t index) {
  Rng rng = make_rng(cfg.seed, std::string("synth/") + std::string(to_string(focus)), index);
  for (int attempt = 0; attempt < kSceneAttempts; ++attempt) {
    SceneBuilder builder(cfg, rng);
    if (!builder.place_focus(focus)) continue;
    builder.place_distractors();
    return builder.finish(index);
  }
  throw ConfigError("infeasible geometry: could not realize a " + std::string(to_string(focus)) + " scene");
}

std::vector<Scene> synth_corpus(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.scenes_per_class * kNumClasses;
  std::vector<Scene> scenes(n);
  const auto total = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < total; ++i) {
    const auto u = static_cast<std::size_t>(i);
    scenes[u] = synth_scene(cfg, kAllClasses[u / cfg.scenes_per_class], u % cfg.scenes_per_class);
  }
  return scenes;
}

std::optional<BehaviorClass> scene_stratum(const Scene& scene) {
  if (scene.meta.focus_class) return scene.meta.focus_class;
  static constexpr std::array<BehaviorClass, kNumClasses> kRarity = {
      BehaviorClass::OVT, BehaviorClass::LCL, BehaviorClass::LCR,
      BehaviorClass::PRK, BehaviorClass::MTU, BehaviorClass::MAU};
  for (BehaviorClass c : kRarity)
    for (const Track& t : scene.tracks)
      if (t.label == c) return c;
  return std::nullopt;
}

CorpusSplit split_corpus(const std::vector<Scene>& scenes, SplitRatios ratios, std::uint64_t seed) {
  if (!(ratios.train > 0.0 && ratios.val > 0.0 && ratios.test > 0.0))
    throw ConfigError("split ratios must all be positive");
  if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9)
    throw ConfigError("split ratios must sum to 1");

  std::map<int, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const auto s = scene_stratum(scenes[i]);
    strata[s ? static_cast<int>(index_of(*s)) : -1].push_back(i);
  }

  CorpusSplit out;
  std::vector<int> part(scenes.size(), 0);
  for (auto& [key, members] : strata) {
    Rng rng = make_rng(seed, "split", static_cast<std::uint64_t>(key + 1));
    std::shuffle(members.begin(), members.end(), rng);
    const std::size_t n = members.size();
    const std::string name = key < 0 ? "unlabeled" : std::string(to_string(kAllClasses[static_cast<std::size_t>(key)]));
    if (n < 3) out.warnings.push_back("stratum " + name + " has " + std::to_string(n) + " scenes; split is best-effort");
    std::size_t n_train = static_cast<std::size_t>(std::llround(ratios.train * static_cast<double>(n)));
    std::size_t n_val = static_cast<std::size_t>(std::llround(ratios.val * static_cast<double>(n)));
    n_train = std::min(n_train, n);
    n_val = std::min(n_val, n - n_train);
    for (std::size_t k = 0; k < n; ++k) part[members[k]] = k < n_train ? 0 : (k < n_train + n_val ? 1 : 2);
  }
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    (part[i] == 0 ? out.train : part[i] == 1 ? out.val : out.test).push_back(scenes[i]);
  }
  return out;
}

Subsampled subsample_labels(std::vector<Scene> train, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("label fraction must lie in (0, 1]");
  Subsampled out;
  std::array<std::vector<std::pair<std::size_t, std::size_t>>, kNumClasses> holders;
  for (std::size_t s = 0; s < train.size(); ++s)
    for (std::size_t t = 0; t < train[s].tracks.size(); ++t)
      if (const auto& label = train[s].tracks[t].label) holders[index_of(*label)].emplace_back(s, t);

  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& list = holders[c];
    if (list.empty()) continue;
    const double want = fraction * static_cast<double>(list.size());
    std::size_t keep = static_cast<std::size_t>(std::ceil(want - 1e-9));
    if (keep == 0) {
      keep = 1;
      out.warnings.push_back("class " + std::string(to_string(kAllClasses[c])) +
                             ": fraction keeps no label; keeping 1");
    }
    if (keep >= list.size()) continue;
    Rng rng = make_rng(seed, "subsample", c);
    std::shuffle(list.begin(), list.end(), rng);
    for (std::size_t k = keep; k < list.size(); ++k) train[list[k].first].tracks[list[k].second].label.reset();
  }
  out.scenes = std::move(train);
  return out;
}

json to_json(const SynthConfig& cfg) {
  auto range = [](const Range& r) { return json::array({r.lo, r.hi}); };
  return {{"seed", cfg.seed},
          {"scenes_per_class", cfg.scenes_per_class},
          {"T", cfg.frames},
          {"dt", cfg.dt},
          {"ego_speed", range(cfg.ego_speed)},
          {"away_speed_gain", range(cfg.away_speed_gain)},
          {"oncoming_speed", range(cfg.oncoming_speed)},
          {"lane_change_speed_gain", range(cfg.lane_change_speed_gain)},
          {"overtake_speed_gain", range(cfg.overtake_speed_gain)},
          {"lane_width", cfg.lane_width},
          {"lanes", json::array({cfg.min_lanes, cfg.max_lanes})},
          {"noise_sigma", range(cfg.noise_sigma)},
          {"dropout", range(cfg.dropout)},
          {"max_vehicles", cfg.max_vehicles},
          {"max_distractors", cfg.max_distractors}};
}

SynthConfig synth_config_from_json(const json& doc, SynthConfig cfg) {
  if (!doc.is_object()) throw ConfigError("synth config must be an object");
  auto range = [](const json& v, const std::string& key) {
    if (v.is_number()) return Range{v.get<double>(), v.get<double>()};
    if (v.is_array() && v.size() == 2) return Range{v[0].get<double>(), v[1].get<double>()};
    throw ConfigError("synth." + key + ": expected a number or [lo, hi]");
  };
  for (const auto& [key, v] : doc.items()) {
    try {
      if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "scenes_per_class") cfg.scenes_per_class = v.get<std::size_t>();
      else if (key == "T") cfg.frames = v.get<std::size_t>();
      else if (key == "dt") cfg.dt = v.get<double>();
      else if (key == "ego_speed") cfg.ego_speed = range(v, key);
      else if (key == "away_speed_gain") cfg.away_speed_gain = range(v, key);
      else if (key == "oncoming_speed") cfg.oncoming_speed = range(v, key);
      else if (key == "lane_change_speed_gain") cfg.lane_change_speed_gain = range(v, key);
      else if (key == "overtake_speed_gain") cfg.overtake_speed_gain = range(v, key);
      else if (key == "lane_width") cfg.lane_width = v.get<double>();
      else if (key == "lanes") {
        const Range r = range(v, key);
        cfg.min_lanes = static_cast<std::size_t>(r.lo);
        cfg.max_lanes = static_cast<std::size_t>(r.hi);
      } else if (key == "noise_sigma") cfg.noise_sigma = range(v, key);
      else if (key == "dropout") cfg.dropout = range(v, key);
      else if (key == "max_vehicles") cfg.max_vehicles = v.get<std::size_t>();
      else if (key == "max_distractors") cfg.max_distractors = v.get<std::size_t>();
      else throw ConfigError("synth: unknown key '" + key + "'");
    } catch (const json::exception& e) {
      throw ConfigError("synth." + key + ": " + e.what());
    }
  }
  return cfg;
}

}  // namespace roadbeh
