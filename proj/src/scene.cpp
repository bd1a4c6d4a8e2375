#include "roadbeh/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace roadbeh {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kNumClasses> kClassNames = {"MAU", "MTU", "PRK",
                                                                   "LCL", "LCR", "OVT"};

[[noreturn]] void fail(std::string_view source, std::string_view track, std::string_view field,
                       const std::string& what) {
  std::string msg = std::string(source);
  if (!track.empty()) msg += ": track '" + std::string(track) + "'";
  if (!field.empty()) msg += ": field '" + std::string(field) + "'";
  throw SceneError(msg + ": " + what);
}

}  // namespace

std::string_view to_string(EntityKind kind) {
  return kind == EntityKind::Vehicle ? "vehicle" : "lane_marking";
}

std::string_view to_string(BehaviorClass cls) { return kClassNames[index_of(cls)]; }

std::optional<EntityKind> parse_entity_kind(std::string_view s) {
  if (s == "vehicle") return EntityKind::Vehicle;
  if (s == "lane_marking") return EntityKind::LaneMarking;
  return std::nullopt;
}

std::optional<BehaviorClass> parse_behavior_class(std::string_view s) {
  for (std::size_t i = 0; i < kNumClasses; ++i)
    if (kClassNames[i] == s) return kAllClasses[i];
  return std::nullopt;
}

std::size_t Track::present_count() const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [](const auto& p) { return p.has_value(); }));
}

std::optional<std::size_t> Track::first_present() const {
  for (std::size_t t = 0; t < points.size(); ++t)
    if (points[t]) return t;
  return std::nullopt;
}

std::size_t Scene::vehicle_count() const {
  return static_cast<std::size_t>(std::count_if(
      tracks.begin(), tracks.end(), [](const Track& t) { return t.kind == EntityKind::Vehicle; }));
}

const Track* Scene::find(std::string_view track_id) const {
  for (const Track& t : tracks)
    if (t.id == track_id) return &t;
  return nullptr;
}

void validate_scene(const Scene& scene, std::string_view source) {
  if (scene.id.empty()) fail(source, "", "id", "scene id is empty");
  if (scene.frames < 2) fail(source, "", "T", "need at least 2 frames, got " + std::to_string(scene.frames));
  std::set<std::string> seen;
  for (const Track& t : scene.tracks) {
    if (t.id.empty()) fail(source, "", "tracks.id", "empty track id");
    if (!seen.insert(t.id).second) fail(source, t.id, "id", "duplicate track id");
    if (t.points.size() != scene.frames) {
      fail(source, t.id, "points",
           "expected " + std::to_string(scene.frames) + " entries (T), got " +
               std::to_string(t.points.size()));
    }
    if (t.present_count() < 2) fail(source, t.id, "points", "fewer than 2 present points");
    for (const auto& p : t.points) {
      if (p && !(std::isfinite(p->x) && std::isfinite(p->y)))
        fail(source, t.id, "points", "non-finite coordinate");
    }
    if (t.kind == EntityKind::LaneMarking && t.label)
      fail(source, t.id, "label", "lane markings carry no label");
  }
  for (const auto& [a, b] : scene.meta.witness_pairs) {
    if (!scene.find(a) || !scene.find(b))
      fail(source, "", "meta.witness_pairs", "unknown track id in pair (" + a + ", " + b + ")");
  }
}

json to_json(const Scene& scene) {
  json tracks = json::array();
  for (const Track& t : scene.tracks) {
    json points = json::array();
    for (const auto& p : t.points) points.push_back(p ? json::array({p->x, p->y}) : json(nullptr));
    tracks.push_back({{"id", t.id},
                      {"kind", to_string(t.kind)},
                      {"label", t.label ? json(to_string(*t.label)) : json(nullptr)},
                      {"points", std::move(points)}});
  }
  json doc = {{"id", scene.id}, {"T", scene.frames}, {"frame", scene.frame_convention},
              {"tracks", std::move(tracks)}};
  if (!scene.meta.empty()) {
    json meta = json::object();
    json pairs = json::array();
    for (const auto& [a, b] : scene.meta.witness_pairs) pairs.push_back({a, b});
    meta["witness_pairs"] = std::move(pairs);
    meta["noise_sigma"] = scene.meta.noise_sigma ? json(*scene.meta.noise_sigma) : json(nullptr);
    if (scene.meta.focus_class) meta["focus_class"] = to_string(*scene.meta.focus_class);
    doc["meta"] = std::move(meta);
  }
  return doc;
}

Scene scene_from_json(const json& doc, std::string_view source) {
  if (!doc.is_object()) fail(source, "", "", "scene must be a JSON object");
  Scene s;
  try {
    s.id = doc.at("id").get<std::string>();
  } catch (const json::exception&) {
    fail(source, "", "id", "missing or not a string");
  }
  const std::string src = std::string(source) + " (scene '" + s.id + "')";
  if (!doc.contains("T") || !doc["T"].is_number_unsigned()) fail(src, "", "T", "missing or not a non-negative integer");
  s.frames = doc["T"].get<std::size_t>();
  if (doc.contains("frame")) {
    if (!doc["frame"].is_string()) fail(src, "", "frame", "not a string");
    s.frame_convention = doc["frame"].get<std::string>();
  }
  if (!doc.contains("tracks") || !doc["tracks"].is_array()) fail(src, "", "tracks", "missing or not an array");
  for (const json& jt : doc["tracks"]) {
    Track t;
    if (!jt.is_object() || !jt.contains("id") || !jt["id"].is_string())
      fail(src, "", "tracks.id", "missing or not a string");
    t.id = jt["id"].get<std::string>();
    if (!jt.contains("kind") || !jt["kind"].is_string()) fail(src, t.id, "kind", "missing or not a string");
    const auto kind = parse_entity_kind(jt["kind"].get<std::string>());
    if (!kind) fail(src, t.id, "kind", "expected \"vehicle\" or \"lane_marking\"");
    t.kind = *kind;
    if (jt.contains("label") && !jt["label"].is_null()) {
      if (!jt["label"].is_string()) fail(src, t.id, "label", "not a string");
      const auto cls = parse_behavior_class(jt["label"].get<std::string>());
      if (!cls) fail(src, t.id, "label", "unknown class '" + jt["label"].get<std::string>() + "'");
      t.label = cls;
    }
    if (!jt.contains("points") || !jt["points"].is_array()) fail(src, t.id, "points", "missing or not an array");
    for (const json& p : jt["points"]) {
      if (p.is_null()) {
        t.points.emplace_back();
      } else if (p.is_array() && p.size() == 2 && p[0].is_number() && p[1].is_number()) {
        t.points.emplace_back(Point2{p[0].get<double>(), p[1].get<double>()});
      } else {
        fail(src, t.id, "points", "each entry must be [x, y] or null");
      }
    }
    s.tracks.push_back(std::move(t));
  }
  if (doc.contains("meta") && doc["meta"].is_object()) {
    const json& meta = doc["meta"];
    if (meta.contains("witness_pairs")) {
      for (const json& pair : meta["witness_pairs"]) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string())
          fail(src, "", "meta.witness_pairs", "each pair must be [overtaker_id, overtaken_id]");
        s.meta.witness_pairs.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
      }
    }
    if (meta.contains("noise_sigma") && meta["noise_sigma"].is_number())
      s.meta.noise_sigma = meta["noise_sigma"].get<double>();
    if (meta.contains("focus_class") && meta["focus_class"].is_string())
      s.meta.focus_class = parse_behavior_class(meta["focus_class"].get<std::string>());
  }
  validate_scene(s, src);
  return s;
}

Scene truncate_vehicles(Scene scene, std::size_t max_vehicles) {
  if (scene.vehicle_count() <= max_vehicles) return scene;
  struct Candidate {
    double distance;
    std::string id;
  };
  std::vector<Candidate> vehicles;
  for (const Track& t : scene.tracks) {
    if (t.kind != EntityKind::Vehicle) continue;
    const auto first = t.first_present();
    const Point2 p = first ? *t.points[*first] : Point2{1e300, 1e300};
    vehicles.push_back({std::hypot(p.x, p.y), t.id});
  }
  std::sort(vehicles.begin(), vehicles.end(), [](const Candidate& a, const Candidate& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
  });
  std::set<std::string> keep;
  for (std::size_t i = 0; i < max_vehicles; ++i) keep.insert(vehicles[i].id);
  std::erase_if(scene.tracks, [&](const Track& t) {
    return t.kind == EntityKind::Vehicle && !keep.count(t.id);
  });
  std::erase_if(scene.meta.witness_pairs, [&](const auto& pair) {
    return !keep.count(pair.first) || !keep.count(pair.second);
  });
  return scene;
}

namespace {

void load_file(const fs::path& file, std::size_t max_vehicles, std::vector<Scene>& out) {
  std::ifstream in(file);
  if (!in) throw SceneError(file.string() + ": cannot open");
  if (file.extension() == ".jsonl") {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const std::string source = file.string() + ":" + std::to_string(lineno);
      json doc;
      try {
        doc = json::parse(line);
      } catch (const json::parse_error& e) {
        throw SceneError(source + ": invalid JSON: " + e.what());
      }
      out.push_back(truncate_vehicles(scene_from_json(doc, source), max_vehicles));
    }
  } else {
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw SceneError(file.string() + ": invalid JSON: " + e.what());
    }
    out.push_back(truncate_vehicles(scene_from_json(doc, file.string()), max_vehicles));
  }
}

}  // namespace

std::vector<Scene> load_scenes(const fs::path& path, std::size_t max_vehicles) {
  if (!fs::exists(path)) throw SceneError(path.string() + ": no such file or directory");
  std::vector<Scene> scenes;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      const auto ext = entry.path().extension();
      if (entry.is_regular_file() && (ext == ".json" || ext == ".jsonl")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) load_file(f, max_vehicles, scenes);
  } else {
    load_file(path, max_vehicles, scenes);
  }
  return scenes;
}

void save_scenes(const fs::path& path, const std::vector<Scene>& scenes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw SceneError(path.string() + ": cannot open for writing");
  if (path.extension() == ".jsonl") {
    for (const Scene& s : scenes) out << to_json(s).dump() << '\n';
  } else {
    if (scenes.size() != 1)
      throw SceneError(path.string() + ": a .json file holds exactly one scene; use .jsonl");
    out << to_json(scenes.front()).dump(1) << '\n';
  }
}

}  // namespace roadbeh
