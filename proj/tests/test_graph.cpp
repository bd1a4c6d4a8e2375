#include <algorithm>
#include <random>

#include "doctest.h"
#include "roadbeh/interaction_graph.hpp"
#include "roadbeh/synth.hpp"

using namespace roadbeh;
using Q = Quadrant;
using R = TemporalRelation;

namespace {

Track make_track(const std::string& id, EntityKind kind, std::vector<std::optional<Point2>> pts) {
  Track t;
  t.id = id;
  t.kind = kind;
  t.points = std::move(pts);
  return t;
}

std::vector<std::optional<Point2>> line(Point2 a, Point2 b, std::size_t n = 10) {
  std::vector<std::optional<Point2>> p;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(n - 1);
    p.push_back(Point2{a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)});
  }
  return p;
}

// Per-axis sign comparison of first vs last offset, written independently.
std::vector<R> brute_force(Point2 first, Point2 last) {
  std::vector<R> out;
  const bool top0 = first.y >= 0, top1 = last.y >= 0;
  const bool right0 = first.x >= 0, right1 = last.x >= 0;
  if (top0 != top1) out.push_back(top1 ? R::MoveForward : R::MoveBackward);
  if (right0 != right1) out.push_back(right1 ? R::LeftToRight : R::RightToLeft);
  if (out.empty()) out.push_back(R::NoChange);
  return out;
}

std::vector<R> as_vec(const RelationSet& s) { return {s.view().begin(), s.view().end()}; }

using EdgeKey = std::tuple<std::string, std::string, R>;
std::vector<EdgeKey> keyed_edges(const InteractionGraph& g) {
  std::vector<EdgeKey> out;
  for (const GraphEdge& e : g.edges) out.emplace_back(g.nodes[e.src].track_id, g.nodes[e.dst].track_id, e.rel);
  std::sort(out.begin(), out.end());
  return out;
}

void check_inverse_closed(const InteractionGraph& g) {
  CHECK(g.edges.size() % 2 == 0);
  for (const GraphEdge& e : g.edges) {
    CHECK(e.src != e.dst);
    CHECK(g.has_edge(e.dst, e.src, inverse(e.rel)));
  }
}

}  // namespace

TEST_CASE("quadrants") {
  CHECK(quadrant_of_offset({2, 5}) == Q::TopRight);
  CHECK(quadrant_of_offset({-1, -1}) == Q::BottomLeft);
  CHECK(quadrant_of_offset({0, 0}) == Q::TopRight);
  CHECK(quadrant_of_offset({-1, 0}) == Q::TopLeft);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int i = 0; i < 500; ++i) {
    const Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)};
    const Q ab = quadrant_of(a, b), ba = quadrant_of(b, a);
    CHECK(is_top(ab) != is_top(ba));
    CHECK(is_right(ab) != is_right(ba));
  }
  CHECK(quadrant_of({0, 0}, {-1, 2}) == Q::TopLeft);
  CHECK(quadrant_of({-1, 2}, {0, 0}) == Q::BottomRight);
}

TEST_CASE("inverse relation mapping") {
  for (R r : kAllRelations) CHECK(inverse(inverse(r)) == r);
  CHECK(inverse(R::MoveForward) == R::MoveBackward);
  CHECK(inverse(R::LeftToRight) == R::RightToLeft);
  CHECK(inverse(R::NoChange) == R::NoChange);
  for (R r : kAllRelations) CHECK(parse_relation(to_string(r)) == r);
  CHECK(to_string(R::MoveForward) == "move_forward");
}

TEST_CASE("smoothing") {
  std::vector<Point2> jitter{{1, 0.1}, {1, -0.05}, {1, 0.1}};
  CHECK(smooth_quadrants(jitter, 0.3) == std::vector<Q>{Q::TopRight, Q::TopRight, Q::TopRight});
  std::vector<Point2> decisive{{1, 1}, {1, -1}};
  CHECK(smooth_quadrants(decisive, 0.3) == std::vector<Q>{Q::TopRight, Q::BottomRight});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Point2> raw(40);
  for (auto& p : raw) p = {u(rng), u(rng)};
  std::vector<Q> direct;
  for (const auto& p : raw) direct.push_back(quadrant_of_offset(p));
  CHECK(smooth_quadrants(raw, 0.0) == direct);
}

TEST_CASE("temporal relation from first and last quadrant") {
  CHECK(as_vec(temporal_relation(Q::BottomLeft, Q::TopLeft)) == std::vector<R>{R::MoveForward});
  CHECK(as_vec(temporal_relation(Q::BottomLeft, Q::BottomRight)) == std::vector<R>{R::LeftToRight});
  CHECK(as_vec(temporal_relation(Q::BottomLeft, Q::TopRight)) == std::vector<R>{R::MoveForward, R::LeftToRight});
  const std::array<Point2, 4> reps{Point2{-1, 1}, Point2{1, 1}, Point2{-1, -1}, Point2{1, -1}};
  for (const Point2& a : reps)
    for (const Point2& b : reps) {
      const auto got = as_vec(temporal_relation(quadrant_of_offset(a), quadrant_of_offset(b)));
      CHECK(got == brute_force(a, b));
      CHECK(got.size() <= 2);
      if (got.size() == 2) {
        CHECK(got[0] != R::NoChange);
        CHECK(got[1] != R::NoChange);
      }
    }
}

TEST_CASE("a car driving past two static markings") {
  Scene s;
  s.id = "fig3";
  s.tracks = {make_track("L2", EntityKind::LaneMarking, line({1.75, 5}, {1.75, 5})),
              make_track("car", EntityKind::Vehicle, line({0, -10}, {0, 20})),
              make_track("L1", EntityKind::LaneMarking, line({-1.75, 2}, {-1.75, 2}))};
  const InteractionGraph g = build_graph(s);
  REQUIRE(g.nodes.size() == 3);
  CHECK(g.nodes[0].track_id == "car");
  CHECK(g.nodes[1].track_id == "L1");
  CHECK(g.nodes[2].track_id == "L2");
  CHECK(g.has_edge(1, 0, R::MoveForward));
  CHECK(g.has_edge(2, 0, R::MoveForward));
  CHECK(g.has_edge(0, 1, R::MoveBackward));
  CHECK(g.has_edge(0, 2, R::MoveBackward));
  CHECK(g.has_edge(1, 2, R::NoChange));
  CHECK(g.has_edge(2, 1, R::NoChange));
  CHECK(g.edges.size() == 6);
  check_inverse_closed(g);
  CHECK(std::is_sorted(g.edges.begin(), g.edges.end()));
}

TEST_CASE("static scene has only NoChange edges") {
  Scene s;
  s.id = "static";
  s.tracks = {make_track("a", EntityKind::Vehicle, line({0, 5}, {0, 5})),
              make_track("b", EntityKind::Vehicle, line({3, -5}, {3, -5})),
              make_track("m", EntityKind::LaneMarking, line({1, 1}, {1, 1}))};
  const InteractionGraph g = build_graph(s);
  CHECK(g.edges.size() == 6);
  for (const GraphEdge& e : g.edges) CHECK(e.rel == R::NoChange);
  check_inverse_closed(g);
}

TEST_CASE("pairs without two co-visible frames are skipped") {
  Scene s;
  s.id = "gap";
  auto early = line({0, 0}, {0, 9});
  auto late = line({2, 0}, {2, 9});
  for (std::size_t f = 5; f < 10; ++f) early[f].reset();
  for (std::size_t f = 0; f < 5; ++f) late[f].reset();
  s.tracks = {make_track("a", EntityKind::Vehicle, early), make_track("b", EntityKind::Vehicle, late),
              make_track("m", EntityKind::LaneMarking, line({1, 1}, {1, 1}))};
  const InteractionGraph g = build_graph(s);
  REQUIRE(g.skipped.size() == 1);
  CHECK(g.skipped[0].covisible_frames == 0);
  for (const GraphEdge& e : g.edges) CHECK_FALSE((e.src <= 1 && e.dst <= 1));
  check_inverse_closed(g);
}

TEST_CASE("degenerate scene") {
  Scene s;
  s.id = "one";
  s.tracks = {make_track("a", EntityKind::Vehicle, line({0, 0}, {0, 9}))};
  CHECK_THROWS_WITH_AS(build_graph(s), doctest::Contains("degenerate scene"), GraphError);
}

TEST_CASE("synthetic corpus properties") {
  SynthConfig cfg;
  cfg.scenes_per_class = 10;
  SynthConfig clean = cfg;
  clean.noise_sigma = {0, 0};
  clean.dropout = {0, 0};
  std::mt19937_64 rng(9);
  for (const Scene& s : synth_corpus(cfg)) {
    const InteractionGraph g = build_graph(s);
    check_inverse_closed(g);
    CHECK(build_graph(s) == g);
    Scene shuffled = s;
    std::shuffle(shuffled.tracks.begin(), shuffled.tracks.end(), rng);
    CHECK(keyed_edges(build_graph(shuffled)) == keyed_edges(g));
    CHECK(graph_from_json(nlohmann::json::parse(to_json(g).dump())) == g);
  }
  for (const Scene& s : synth_corpus(clean)) {
    const InteractionGraph g = build_graph(s, 0.0);
    CHECK(build_graph(s) == g);
    // each pair is decided from the first node's view; the reverse edge is its inverse
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
      for (std::size_t j = i + 1; j < g.nodes.size(); ++j) {
        const Track& a = *s.find(g.nodes[i].track_id);
        const Track& b = *s.find(g.nodes[j].track_id);
        const Point2 v0{b.points.front()->x - a.points.front()->x, b.points.front()->y - a.points.front()->y};
        const Point2 v1{b.points.back()->x - a.points.back()->x, b.points.back()->y - a.points.back()->y};
        std::vector<R> got;
        for (const GraphEdge& e : g.edges)
          if (e.src == i && e.dst == j) got.push_back(e.rel);
        auto want = brute_force(v0, v1);
        std::sort(want.begin(), want.end());
        CHECK(got == want);
      }
  }
}
