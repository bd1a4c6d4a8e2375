#include "roadbeh/interaction_graph.hpp"

#include <algorithm>

namespace roadbeh {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kNumRelations> kRelationNames = {
    "move_forward", "move_backward", "left_to_right", "right_to_left", "no_change"};

}  // namespace

TemporalRelation inverse(TemporalRelation r) {
  switch (r) {
    case TemporalRelation::MoveForward: return TemporalRelation::MoveBackward;
    case TemporalRelation::MoveBackward: return TemporalRelation::MoveForward;
    case TemporalRelation::LeftToRight: return TemporalRelation::RightToLeft;
    case TemporalRelation::RightToLeft: return TemporalRelation::LeftToRight;
    case TemporalRelation::NoChange: return TemporalRelation::NoChange;
  }
  return r;
}

std::string_view to_string(TemporalRelation r) { return kRelationNames[index_of(r)]; }

std::string_view to_string(Quadrant q) {
  switch (q) {
    case Quadrant::TopLeft: return "top_left";
    case Quadrant::TopRight: return "top_right";
    case Quadrant::BottomLeft: return "bottom_left";
    case Quadrant::BottomRight: return "bottom_right";
  }
  return "?";
}

std::optional<TemporalRelation> parse_relation(std::string_view s) {
  for (std::size_t i = 0; i < kNumRelations; ++i)
    if (kRelationNames[i] == s) return kAllRelations[i];
  return std::nullopt;
}

Quadrant make_quadrant(bool top, bool right) {
  if (top) return right ? Quadrant::TopRight : Quadrant::TopLeft;
  return right ? Quadrant::BottomRight : Quadrant::BottomLeft;
}

Quadrant quadrant_of_offset(Point2 v) { return make_quadrant(v.y >= 0.0, v.x >= 0.0); }

std::vector<Quadrant> smooth_quadrants(std::span<const Point2> offsets, double deadband) {
  std::vector<Quadrant> out;
  out.reserve(offsets.size());
  if (offsets.empty()) return out;
  bool top = offsets[0].y >= 0.0;
  bool right = offsets[0].x >= 0.0;
  out.push_back(make_quadrant(top, right));
  for (std::size_t t = 1; t < offsets.size(); ++t) {
    const Point2 v = offsets[t];
    if (top && v.y < -deadband) top = false;
    else if (!top && v.y >= deadband) top = true;
    if (right && v.x < -deadband) right = false;
    else if (!right && v.x >= deadband) right = true;
    out.push_back(make_quadrant(top, right));
  }
  return out;
}

RelationSet temporal_relation(Quadrant first, Quadrant last) {
  RelationSet set;
  if (is_top(first) != is_top(last))
    set.items[set.count++] = is_top(last) ? TemporalRelation::MoveForward : TemporalRelation::MoveBackward;
  if (is_right(first) != is_right(last))
    set.items[set.count++] = is_right(last) ? TemporalRelation::LeftToRight : TemporalRelation::RightToLeft;
  if (set.count == 0) set.items[set.count++] = TemporalRelation::NoChange;
  return set;
}

RelationSet temporal_relation(std::span<const Quadrant> sequence) {
  if (sequence.size() < 2) throw GraphError("temporal_relation needs at least 2 frames");
  return temporal_relation(sequence.front(), sequence.back());
}

std::size_t InteractionGraph::vehicle_count() const {
  return static_cast<std::size_t>(std::count_if(
      nodes.begin(), nodes.end(), [](const GraphNode& n) { return n.kind == EntityKind::Vehicle; }));
}

bool InteractionGraph::has_edge(std::uint32_t src, std::uint32_t dst, TemporalRelation rel) const {
  return std::binary_search(edges.begin(), edges.end(), GraphEdge{src, dst, rel});
}

InteractionGraph build_graph(const Scene& scene, double deadband) {
  if (scene.tracks.size() < 2) throw GraphError("degenerate scene '" + scene.id + "': fewer than 2 tracks");
  std::vector<const Track*> order;
  for (const Track& t : scene.tracks) order.push_back(&t);
  std::sort(order.begin(), order.end(), [](const Track* a, const Track* b) {
    if (a->kind != b->kind) return a->kind == EntityKind::Vehicle;
    return a->id < b->id;
  });

  InteractionGraph g;
  g.scene_id = scene.id;
  g.frames = scene.frames;
  for (std::size_t i = 0; i < order.size(); ++i) {
    g.nodes.push_back({static_cast<std::uint32_t>(i), order[i]->kind, order[i]->id, order[i]->label});
  }

  std::vector<Point2> offsets;
  for (std::uint32_t a = 0; a < order.size(); ++a) {
    for (std::uint32_t b = a + 1; b < order.size(); ++b) {
      offsets.clear();
      const auto& pa = order[a]->points;
      const auto& pb = order[b]->points;
      for (std::size_t t = 0; t < std::min(pa.size(), pb.size()); ++t) {
        if (pa[t] && pb[t]) offsets.push_back({pb[t]->x - pa[t]->x, pb[t]->y - pa[t]->y});
      }
      if (offsets.size() < 2) {
        g.skipped.push_back({order[a]->id, order[b]->id, offsets.size()});
        continue;
      }
      const auto smoothed = smooth_quadrants(offsets, deadband);
      const RelationSet rels = temporal_relation(smoothed);
      for (TemporalRelation r : rels.view()) {
        g.edges.push_back({a, b, r});
        g.edges.push_back({b, a, inverse(r)});
      }
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

json to_json(const InteractionGraph& graph) {
  json nodes = json::array();
  for (const GraphNode& n : graph.nodes) {
    nodes.push_back({{"idx", n.index},
                     {"kind", to_string(n.kind)},
                     {"track_id", n.track_id},
                     {"label", n.label ? json(to_string(*n.label)) : json(nullptr)}});
  }
  json edges = json::array();
  for (const GraphEdge& e : graph.edges)
    edges.push_back({{"src", e.src}, {"dst", e.dst}, {"rel", to_string(e.rel)}});
  json skipped = json::array();
  for (const SkippedPair& s : graph.skipped)
    skipped.push_back({{"first", s.first}, {"second", s.second}, {"covisible_frames", s.covisible_frames}});
  return {{"scene_id", graph.scene_id}, {"T", graph.frames}, {"nodes", std::move(nodes)},
          {"edges", std::move(edges)}, {"skipped_pairs", std::move(skipped)}};
}

InteractionGraph graph_from_json(const json& doc) {
  InteractionGraph g;
  try {
    g.scene_id = doc.at("scene_id").get<std::string>();
    g.frames = doc.value("T", std::size_t{0});
    for (const json& n : doc.at("nodes")) {
      GraphNode node;
      node.index = n.at("idx").get<std::uint32_t>();
      const auto kind = parse_entity_kind(n.at("kind").get<std::string>());
      if (!kind) throw GraphError("graph '" + g.scene_id + "': bad node kind");
      node.kind = *kind;
      node.track_id = n.at("track_id").get<std::string>();
      if (n.contains("label") && !n["label"].is_null()) {
        node.label = parse_behavior_class(n["label"].get<std::string>());
        if (!node.label) throw GraphError("graph '" + g.scene_id + "': bad node label");
      }
      if (node.index != g.nodes.size()) throw GraphError("graph '" + g.scene_id + "': node idx out of order");
      g.nodes.push_back(std::move(node));
    }
    for (const json& e : doc.at("edges")) {
      const auto rel = parse_relation(e.at("rel").get<std::string>());
      if (!rel) throw GraphError("graph '" + g.scene_id + "': bad relation");
      GraphEdge edge{e.at("src").get<std::uint32_t>(), e.at("dst").get<std::uint32_t>(), *rel};
      if (edge.src >= g.nodes.size() || edge.dst >= g.nodes.size() || edge.src == edge.dst)
        throw GraphError("graph '" + g.scene_id + "': edge endpoint invalid");
      g.edges.push_back(edge);
    }
    if (doc.contains("skipped_pairs")) {
      for (const json& s : doc["skipped_pairs"])
        g.skipped.push_back({s.at("first").get<std::string>(), s.at("second").get<std::string>(),
                             s.at("covisible_frames").get<std::size_t>()});
    }
  } catch (const json::exception& e) {
    throw GraphError(std::string("malformed graph JSON: ") + e.what());
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

}  // namespace roadbeh
