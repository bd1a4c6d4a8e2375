#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace roadbeh {

enum class EntityKind { Vehicle, LaneMarking };

enum class BehaviorClass { MAU, MTU, PRK, LCL, LCR, OVT };

inline constexpr std::size_t kNumClasses = 6;
inline constexpr std::array<BehaviorClass, kNumClasses> kAllClasses = {
    BehaviorClass::MAU, BehaviorClass::MTU, BehaviorClass::PRK,
    BehaviorClass::LCL, BehaviorClass::LCR, BehaviorClass::OVT};

inline constexpr std::size_t kDefaultFrames = 10;
inline constexpr std::size_t kDefaultMaxVehicles = 10;

std::string_view to_string(EntityKind kind);
std::string_view to_string(BehaviorClass cls);
std::optional<EntityKind> parse_entity_kind(std::string_view s);
std::optional<BehaviorClass> parse_behavior_class(std::string_view s);
inline std::size_t index_of(BehaviorClass c) { return static_cast<std::size_t>(c); }

/// Bird's-eye-view point in meters: +x right of the ego heading, +y ahead.
struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

struct Track {
  std::string id;
  EntityKind kind = EntityKind::Vehicle;
  std::vector<std::optional<Point2>> points;  // one slot per frame, nullopt = missed detection
  std::optional<BehaviorClass> label;

  std::size_t present_count() const;
  std::optional<std::size_t> first_present() const;
  friend bool operator==(const Track&, const Track&) = default;
};

struct SceneMeta {
  std::vector<std::pair<std::string, std::string>> witness_pairs;  // (overtaker, overtaken)
  std::optional<double> noise_sigma;
  std::optional<BehaviorClass> focus_class;  // behavior the generator built the scene around
  bool empty() const { return witness_pairs.empty() && !noise_sigma && !focus_class; }
  friend bool operator==(const SceneMeta&, const SceneMeta&) = default;
};

struct Scene {
  std::string id;
  std::size_t frames = kDefaultFrames;
  std::string frame_convention = "ego_bev";
  std::vector<Track> tracks;
  SceneMeta meta;

  std::size_t vehicle_count() const;
  const Track* find(std::string_view track_id) const;
  friend bool operator==(const Scene&, const Scene&) = default;
};

/// Raised for malformed scene input; the message names file, track and field.
class SceneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws SceneError if `scene` breaks any structural invariant.
void validate_scene(const Scene& scene, std::string_view source = "<memory>");

nlohmann::json to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& doc, std::string_view source = "<memory>");

/// Keeps the `max_vehicles` vehicles nearest the ego at their first present
/// frame (ties by track id); lane markings are always kept. Track order is
/// otherwise preserved.
Scene truncate_vehicles(Scene scene, std::size_t max_vehicles = kDefaultMaxVehicles);

/// Reads one scene per .json file or one per line of a .jsonl file; directories
/// are scanned (sorted by name) for both. Each scene is validated and truncated.
std::vector<Scene> load_scenes(const std::filesystem::path& path,
                               std::size_t max_vehicles = kDefaultMaxVehicles);

/// .jsonl path → one scene per line; anything else must hold exactly one scene.
void save_scenes(const std::filesystem::path& path, const std::vector<Scene>& scenes);

}  // namespace roadbeh
