#pragma once

// Quadrant spatial relations and the temporal Interaction Graph.
//
// Edge convention: an edge (src, dst, r) says that entity `dst` moved `r`
// relative to entity `src` over the clip, so a node's *incoming* edges describe
// its own motion relative to each neighbor. Every edge has its inverse
// (dst, src, inverse(r)).

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "roadbeh/scene.hpp"

namespace roadbeh {

enum class Quadrant { TopLeft, TopRight, BottomLeft, BottomRight };

enum class TemporalRelation { MoveForward, MoveBackward, LeftToRight, RightToLeft, NoChange };

inline constexpr std::size_t kNumRelations = 5;
inline constexpr std::array<TemporalRelation, kNumRelations> kAllRelations = {
    TemporalRelation::MoveForward, TemporalRelation::MoveBackward, TemporalRelation::LeftToRight,
    TemporalRelation::RightToLeft, TemporalRelation::NoChange};

inline constexpr double kDefaultDeadband = 0.3;

TemporalRelation inverse(TemporalRelation r);
std::string_view to_string(TemporalRelation r);
std::string_view to_string(Quadrant q);
std::optional<TemporalRelation> parse_relation(std::string_view s);
inline std::size_t index_of(TemporalRelation r) { return static_cast<std::size_t>(r); }

inline bool is_top(Quadrant q) { return q == Quadrant::TopLeft || q == Quadrant::TopRight; }
inline bool is_right(Quadrant q) { return q == Quadrant::TopRight || q == Quadrant::BottomRight; }
Quadrant make_quadrant(bool top, bool right);

/// Quadrant of offset v = object − subject; v.y == 0 counts as Top, v.x == 0 as Right.
Quadrant quadrant_of_offset(Point2 v);
inline Quadrant quadrant_of(Point2 subject, Point2 object) {
  return quadrant_of_offset({object.x - subject.x, object.y - subject.y});
}

/// Per-axis hysteresis over a sequence of offsets: an axis flips to Top/Right only
/// once the coordinate reaches +deadband and to Bottom/Left only below −deadband.
/// The first frame takes its raw quadrant; deadband 0 reproduces the raw sequence.
std::vector<Quadrant> smooth_quadrants(std::span<const Point2> offsets, double deadband);

/// Up to one relation per axis, or {NoChange}.
struct RelationSet {
  std::array<TemporalRelation, 2> items{};
  std::size_t count = 0;
  std::span<const TemporalRelation> view() const { return {items.data(), count}; }
  friend bool operator==(const RelationSet& a, const RelationSet& b) {
    return a.count == b.count && std::equal(a.items.begin(), a.items.begin() + a.count, b.items.begin());
  }
};

/// Relation of the object w.r.t. the subject from its first and last quadrant.
RelationSet temporal_relation(Quadrant first, Quadrant last);
/// Same, reading the first and last entries of a (smoothed) sequence.
RelationSet temporal_relation(std::span<const Quadrant> sequence);

struct GraphNode {
  std::uint32_t index = 0;
  EntityKind kind = EntityKind::Vehicle;
  std::string track_id;
  std::optional<BehaviorClass> label;
  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

struct GraphEdge {
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  TemporalRelation rel = TemporalRelation::NoChange;
  friend auto operator<=>(const GraphEdge&, const GraphEdge&) = default;
};

/// A pair with fewer than two co-visible frames; it contributes no edge.
struct SkippedPair {
  std::string first;
  std::string second;
  std::size_t covisible_frames = 0;
  friend bool operator==(const SkippedPair&, const SkippedPair&) = default;
};

struct InteractionGraph {
  std::string scene_id;
  std::size_t frames = 0;
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;  // sorted by (src, dst, rel)
  std::vector<SkippedPair> skipped;

  std::size_t vehicle_count() const;
  bool has_edge(std::uint32_t src, std::uint32_t dst, TemporalRelation rel) const;
  friend bool operator==(const InteractionGraph&, const InteractionGraph&) = default;
};

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Nodes are vehicles by track id, then lane markings by track id. For every
/// pair with ≥2 co-visible frames the smoothed first/last quadrants decide the
/// relation(s); both directions are emitted. Throws GraphError("degenerate
/// scene") for fewer than two tracks.
InteractionGraph build_graph(const Scene& scene, double deadband = kDefaultDeadband);

/// {"scene_id","T","nodes":[{"idx","kind","track_id","label"}],"edges":[{"src","dst","rel"}],
///  "skipped_pairs":[...]}
nlohmann::json to_json(const InteractionGraph& graph);
InteractionGraph graph_from_json(const nlohmann::json& doc);

}  // namespace roadbeh
