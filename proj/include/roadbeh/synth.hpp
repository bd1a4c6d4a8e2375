#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "roadbeh/scene.hpp"

namespace roadbeh {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Range&, const Range&) = default;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Synthetic highway clips. Speeds are world-frame m/s; "gain" ranges are added
/// to the ego speed (or, for overtakes, to the overtaken vehicle's speed).
struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t scenes_per_class = 400;
  std::size_t frames = kDefaultFrames;
  double dt = 0.1;
  Range ego_speed{8.0, 12.0};
  Range away_speed_gain{2.0, 8.0};
  Range oncoming_speed{8.0, 15.0};
  Range lane_change_speed_gain{1.0, 6.0};
  Range overtake_speed_gain{5.0, 10.0};
  double lane_width = 3.5;
  std::size_t min_lanes = 3;
  std::size_t max_lanes = 5;
  Range noise_sigma{0.3, 0.3};
  Range dropout{0.05, 0.05};
  std::size_t max_vehicles = kDefaultMaxVehicles;
  std::size_t max_distractors = 3;

  /// Throws ConfigError for empty ranges, bad probabilities, or geometry in
  /// which some class cannot be realized (e.g. too short a clip to cross the
  /// marking band, or an overtake with room for only one vehicle).
  void validate() const;
  friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

nlohmann::json to_json(const SynthConfig& cfg);
/// Unknown keys are rejected; missing keys keep their defaults.
SynthConfig synth_config_from_json(const nlohmann::json& doc, SynthConfig base = {});

/// scenes_per_class scenes for each class, class-major. Scene k of class c draws
/// from its own stream derived from (seed, c, k).
std::vector<Scene> synth_corpus(const SynthConfig& cfg);

/// One scene whose focus behavior is `focus`.
Scene synth_scene(const SynthConfig& cfg, BehaviorClass focus, std::size_t index);

/// Stratum used for class-balanced splitting: meta focus class when present,
/// otherwise the rarest label present (OVT, LCL, LCR, PRK, MTU, MAU).
std::optional<BehaviorClass> scene_stratum(const Scene& scene);

struct SplitRatios {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
};

struct CorpusSplit {
  std::vector<Scene> train;
  std::vector<Scene> val;
  std::vector<Scene> test;
  std::vector<std::string> warnings;
};

/// Stratified seeded split; each part keeps corpus order. Throws ConfigError
/// unless all ratios are positive and sum to 1.
CorpusSplit split_corpus(const std::vector<Scene>& scenes, SplitRatios ratios, std::uint64_t seed);

struct Subsampled {
  std::vector<Scene> scenes;
  std::vector<std::string> warnings;
};

/// Keeps labels on ⌈fraction·N_c⌉ randomly chosen vehicles of each class c and
/// clears the rest.
Subsampled subsample_labels(std::vector<Scene> train, double fraction, std::uint64_t seed);

}  // namespace roadbeh
