#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "roadbeh/gcn.hpp"
#include "support.hpp"

using namespace roadbeh;
using R = TemporalRelation;

namespace {

InteractionGraph hand_graph(std::vector<EntityKind> kinds, std::vector<GraphEdge> edges) {
  InteractionGraph g;
  g.scene_id = "hand";
  g.frames = 10;
  for (std::size_t i = 0; i < kinds.size(); ++i)
    g.nodes.push_back({static_cast<std::uint32_t>(i), kinds[i], "n" + std::to_string(i),
                       kinds[i] == EntityKind::Vehicle ? std::optional(BehaviorClass::MAU) : std::nullopt});
  g.edges = std::move(edges);
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

// Layer weights recorded as constants on `tape`.
struct HandLayer {
  Tensor self;
  std::array<Tensor, kNumRelations> rel;
  std::vector<Tensor> att;
  Tensor out;
  LayerWeights bind(Tape& tape) const {
    LayerWeights w;
    w.self = tape.constant(self);
    for (std::size_t r = 0; r < kNumRelations; ++r) w.relation[r] = tape.constant(rel[r]);
    for (const Tensor& a : att) w.attention.push_back(tape.constant(a));
    if (out.size()) w.head_projection = tape.constant(out);
    return w;
  }
};

HandLayer random_layer(std::size_t in, std::size_t out, std::uint64_t seed) {
  HandLayer l;
  l.self = testing::random_tensor(in, out, seed, -1, 1);
  for (std::size_t r = 0; r < kNumRelations; ++r) l.rel[r] = testing::random_tensor(in, out, seed + 1 + r, -1, 1);
  return l;
}

// Literal per-node evaluation: sum over in-neighbors j of edges (j, i, r),
// divided by their count, with row-vector weights (x·W).
Tensor literal_mrgcn(const InteractionGraph& g, const Tensor& h, const HandLayer& w, bool activate) {
  const std::size_t n = g.nodes.size(), d = w.self.cols();
  Tensor out(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<long double> acc(d, 0.0L);
    for (std::size_t c = 0; c < d; ++c)
      for (std::size_t k = 0; k < h.cols(); ++k) acc[c] += static_cast<long double>(h(i, k)) * w.self(k, c);
    for (R r : kAllRelations) {
      std::vector<std::size_t> nbrs;
      for (const GraphEdge& e : g.edges)
        if (e.dst == i && e.rel == r) nbrs.push_back(e.src);
      for (std::size_t j : nbrs)
        for (std::size_t c = 0; c < d; ++c)
          for (std::size_t k = 0; k < h.cols(); ++k)
            acc[c] += static_cast<long double>(h(j, k)) * w.rel[index_of(r)](k, c) / nbrs.size();
    }
    for (std::size_t c = 0; c < d; ++c) {
      const double v = static_cast<double>(acc[c]);
      out(i, c) = activate ? std::max(v, 0.0) : v;
    }
  }
  return out;
}

InteractionGraph permuted(const InteractionGraph& g, const std::vector<std::uint32_t>& perm) {
  // node i moves to position perm[i]
  InteractionGraph p = g;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    p.nodes[perm[i]] = g.nodes[i];
    p.nodes[perm[i]].index = perm[i];
  }
  for (GraphEdge& e : p.edges) e = {perm[e.src], perm[e.dst], e.rel};
  std::sort(p.edges.begin(), p.edges.end());
  return p;
}

ModelConfig small(bool attention) {
  ModelConfig cfg;
  cfg.layer_dims = {8, 4, 6};
  cfg.embedding_dim = 8;
  cfg.use_attention = attention;
  return cfg;
}

}  // namespace

TEST_CASE("embedding lookup") {
  const PreparedGraph g = prepare_graph(hand_graph(
      {EntityKind::Vehicle, EntityKind::Vehicle, EntityKind::LaneMarking}, {{0, 2, R::NoChange}, {2, 0, R::NoChange}}));
  const Tensor table = Tensor::from_rows({{1, 2, 3}, {4, 5, 6}});
  Tape t;
  const Tensor e = t.variable(table);
  const Tensor h = embed_nodes(t, g, e);
  CHECK(h == Tensor::from_rows({{1, 2, 3}, {1, 2, 3}, {4, 5, 6}}));
  t.backward(sum(t, h));
  CHECK(t.grad(e) == Tensor::from_rows({{2, 2, 2}, {1, 1, 1}}));
  Tape z;
  CHECK(embed_nodes(z, g, z.constant(Tensor(2, 3))) == Tensor(3, 3));
}

TEST_CASE("relation convolution averages in-neighbors") {
  const InteractionGraph ig = hand_graph({EntityKind::Vehicle, EntityKind::Vehicle, EntityKind::Vehicle},
                                         {{0, 2, R::MoveForward}, {1, 2, R::MoveForward}, {2, 0, R::MoveBackward},
                                          {2, 1, R::MoveBackward}, {0, 1, R::NoChange}, {1, 0, R::NoChange}});
  const PreparedGraph g = prepare_graph(ig);
  const Tensor h = Tensor::from_rows({{1, 2}, {3, 6}, {5, 7}});
  Tape t;
  const Tensor I = t.constant(Tensor::identity(2));
  const Tensor fwd = relation_conv(t, t.constant(h), g.in_neighbors[index_of(R::MoveForward)], I);
  CHECK(fwd == Tensor::from_rows({{0, 0}, {0, 0}, {2, 4}}));
  const Tensor back = relation_conv(t, t.constant(h), g.in_neighbors[index_of(R::MoveBackward)], I);
  CHECK(back == Tensor::from_rows({{5, 7}, {5, 7}, {0, 0}}));
  CHECK(relation_conv(t, t.constant(h), g.in_neighbors[index_of(R::LeftToRight)], I) == Tensor(3, 2));
}

TEST_CASE("mrgcn layer against a literal evaluation") {
  const InteractionGraph path = hand_graph(
      {EntityKind::Vehicle, EntityKind::Vehicle, EntityKind::LaneMarking},
      {{0, 1, R::MoveForward}, {1, 0, R::MoveBackward}, {1, 2, R::LeftToRight}, {2, 1, R::RightToLeft}});
  HandLayer w;
  w.self = Tensor::from_rows({{0.5, -1.0}, {2.0, 0.25}});
  w.rel[index_of(R::MoveForward)] = Tensor::from_rows({{1.0, 0.0}, {-0.5, 1.5}});
  w.rel[index_of(R::MoveBackward)] = Tensor::from_rows({{0.3, 0.7}, {0.2, -0.9}});
  w.rel[index_of(R::LeftToRight)] = Tensor::from_rows({{-1.2, 0.4}, {0.6, 0.1}});
  w.rel[index_of(R::RightToLeft)] = Tensor::from_rows({{0.9, -0.3}, {-0.8, 0.5}});
  w.rel[index_of(R::NoChange)] = Tensor::from_rows({{2.0, 2.0}, {2.0, 2.0}});
  const Tensor h = Tensor::from_rows({{1.0, -2.0}, {0.5, 3.0}, {-1.5, 0.25}});
  const PreparedGraph g = prepare_graph(path);
  Tape t;
  const Tensor got = mrgcn_layer(t, t.constant(h), g, w.bind(t), nullptr, true);
  CHECK(max_abs_diff(got, literal_mrgcn(path, h, w, true)) <= 1e-9);
  // hand check of node 1: self (0.5·0.5+3·2, 0.5·-1+3·0.25) = (6.25, 0.25), plus
  // forward from node 0 (1·1+2·0.5, -3) = (2, -3), plus right_to_left from node 2
  // (-1.35-0.2, 0.45+0.125) = (-1.55, 0.575)
  CHECK(got(1, 0) == doctest::Approx(6.25 + 2.0 - 1.55));
  CHECK(got(1, 1) == doctest::Approx(0.0));

  Tape t2;
  const Tensor random_h = testing::random_tensor(3, 2, 4);
  CHECK(max_abs_diff(mrgcn_layer(t2, t2.constant(random_h), g, random_layer(2, 2, 60).bind(t2), nullptr, false),
                     literal_mrgcn(path, random_h, random_layer(2, 2, 60), false)) <= 1e-9);
}

TEST_CASE("edgeless graph and zero weights") {
  const PreparedGraph g = prepare_graph(hand_graph({EntityKind::Vehicle, EntityKind::LaneMarking}, {}));
  const HandLayer w = random_layer(3, 2, 70);
  const Tensor h = testing::random_tensor(2, 3, 71);
  Tape t;
  const Tensor got = mrgcn_layer(t, t.constant(h), g, w.bind(t), nullptr, true);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t c = 0; c < 2; ++c) {
      double v = 0;
      for (std::size_t k = 0; k < 3; ++k) v += h(i, k) * w.self(k, c);
      CHECK(got(i, c) == doctest::Approx(std::max(v, 0.0)).epsilon(1e-12));
    }
  HandLayer zero;
  zero.self = Tensor(3, 2);
  for (auto& r : zero.rel) r = Tensor(3, 2);
  CHECK(mrgcn_layer(t, t.constant(h), g, zero.bind(t), nullptr, true) == Tensor(2, 2));
}

TEST_CASE("attention layer") {
  const PreparedGraph g = prepare_graph(random_graph(3));
  const std::size_t n = g.node_count();
  const Tensor h = testing::random_tensor(n, 3, 80);

  SUBCASE("zero scorer gives uniform attention and the scaled mrgcn identity") {
    HandLayer w = random_layer(3, 3, 81);
    w.att = {Tensor(6 * 3, 6)};
    Tensor six(3, 3);
    for (std::size_t i = 0; i < 3; ++i) six(i, i) = 6.0;
    w.out = six;
    Tape t;
    const auto res = rel_att_layer(t, t.constant(h), g, w.bind(t), nullptr, false);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < kAttentionSlots; ++k) CHECK(res.alpha_mean(i, k) == doctest::Approx(1.0 / 6));
    Tape t2;
    const Tensor pre = mrgcn_layer(t2, t2.constant(h), g, w.bind(t2), nullptr, false);
    CHECK(max_abs_diff(res.features, pre) <= 1e-9);
  }

  SUBCASE("rows of alpha lie on the simplex") {
    HandLayer w = random_layer(3, 3, 82);
    w.att = {testing::random_tensor(18, 6, 83, -3, 3), testing::random_tensor(18, 6, 84, -3, 3)};
    w.out = testing::random_tensor(6, 3, 85);
    Tape t;
    const auto res = rel_att_layer(t, t.constant(h), g, w.bind(t), nullptr, true);
    REQUIRE(res.alpha.size() == 2);
    for (const Tensor& a : res.alpha)
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0;
        for (std::size_t k = 0; k < kAttentionSlots; ++k) {
          CHECK(a(i, k) >= 0.0);
          s += a(i, k);
        }
        CHECK(std::abs(s - 1.0) <= 1e-12);
      }
  }

  SUBCASE("a +40 node-slot logit reduces the layer to its self term") {
    // constant first input column makes W_self's first output column constant 1
    Tensor hc = testing::random_tensor(n, 2, 86);
    for (std::size_t i = 0; i < n; ++i) hc(i, 0) = 1.0;
    HandLayer w = random_layer(2, 2, 87);
    w.self = Tensor::from_rows({{1.0, 0.7}, {0.0, -1.3}});
    Tensor scorer(12, 6);
    scorer(0, 0) = 40.0;
    w.att = {scorer};
    w.out = Tensor::identity(2);
    Tape t;
    const auto res = rel_att_layer(t, t.constant(hc), g, w.bind(t), nullptr, true);
    double worst = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < 2; ++c) {
        const double self = hc(i, 0) * w.self(0, c) + hc(i, 1) * w.self(1, c);
        worst = std::max(worst, std::abs(res.features(i, c) - std::max(self, 0.0)));
      }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("forward is deterministic and permutation equivariant") {
  for (bool att : {false, true}) {
    ModelConfig cfg;
    cfg.use_attention = att;
    const ParamStore params = init_params(cfg);
    std::mt19937_64 rng(17);
    for (std::uint64_t s = 0; s < 5; ++s) {
      const InteractionGraph ig = random_graph(s + 10, 7, 3);
      std::vector<std::uint32_t> perm(ig.nodes.size());
      std::iota(perm.begin(), perm.end(), 0u);
      std::shuffle(perm.begin(), perm.end(), rng);
      auto logits = [&](const InteractionGraph& graph) {
        Tape t;
        return forward(t, prepare_graph(graph), bind_params(t, params, false), cfg).logits;
      };
      const Tensor a = logits(ig);
      CHECK(a == logits(ig));
      const Tensor b = logits(permuted(ig, perm));
      double worst = 0;
      for (std::size_t i = 0; i < ig.nodes.size(); ++i)
        for (std::size_t c = 0; c < 6; ++c) worst = std::max(worst, std::abs(a(i, c) - b(perm[i], c)));
      CHECK(worst <= 1e-9);
    }
  }
}

TEST_CASE("parameter layout") {
  ModelConfig cfg;
  const ParamStore p = init_params(cfg);
  CHECK(p.get("embedding").rows() == 2);
  CHECK(p.get("embedding").cols() == 64);
  CHECK(p.get("layer0.W_self").rows() == 64);
  CHECK(p.get("layer1.W_rel.left_to_right").cols() == 32);
  CHECK(p.get("layer2.W_att.head1").rows() == 36);
  CHECK(p.get("layer2.W_att.head1") == Tensor(36, 6));
  CHECK(p.get("layer2.W_out").rows() == 12);
  CHECK(p.get("skip.to_layer1").cols() == 32);
  CHECK(p.get("skip.to_layer2").rows() == 64);
  CHECK(p.get("skip.to_layer2").cols() == 6);
  for (double v : p.get("embedding").data()) CHECK(std::abs(v) <= 0.1);
  const double glorot = std::sqrt(6.0 / (64 + 32));
  for (double v : p.get("layer1.W_self").data()) CHECK(std::abs(v) <= glorot);
  check_params(cfg, p);
  ModelConfig other = cfg;
  other.layer_dims = {64, 16, 6};
  CHECK_THROWS_AS(check_params(other, p), ConfigError);
  other = cfg;
  other.layer_dims = {64, 32, 5};
  CHECK_THROWS_AS(other.validate(), ConfigError);
  CHECK(init_params(cfg) == p);
}

TEST_CASE("checkpoint round trip") {
  ModelConfig cfg = small(true);
  cfg.seed = 4;
  const Checkpoint ck{cfg, init_params(cfg)};
  CHECK(checkpoint_from_json(nlohmann::json::parse(to_json(ck).dump())) == ck);
  CHECK(model_config_from_json(to_json(cfg)) == cfg);
  CHECK_THROWS_AS(model_config_from_json({{"layers", 3}}), ConfigError);
}

TEST_CASE("loss gradients match finite differences") {
  const PreparedGraph g = prepare_graph(random_graph(5));
  for (bool att : {false, true}) {
    const ModelGradCheck r = check_model_gradients(small(att), g);
    INFO("attention " << att << " worst " << r.report.worst_param);
    CHECK(r.report.passed);
    CHECK(r.report.max_rel_error < 1e-4);
    CHECK(r.min_relu_margin >= 1e-4);
  }
}

TEST_CASE("random graphs are inverse closed and contain every relation") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const InteractionGraph g = random_graph(s);
    std::array<bool, kNumRelations> seen{};
    for (const GraphEdge& e : g.edges) {
      seen[index_of(e.rel)] = true;
      CHECK(g.has_edge(e.dst, e.src, inverse(e.rel)));
    }
    for (bool b : seen) CHECK(b);
  }
}

TEST_CASE("attention summary") {
  ModelConfig cfg;
  const ParamStore p = init_params(cfg);
  std::vector<PreparedGraph> graphs;
  for (std::uint64_t s = 0; s < 30; ++s) graphs.push_back(prepare_graph(random_graph(s, 8, 2)));
  const AttentionSummary sum = attention_summary(p, cfg, graphs);
  std::size_t total = 0;
  for (BehaviorClass c : kAllClasses) {
    total += sum.counts[index_of(c)];
    if (!sum.present(c)) {
      CHECK(std::isnan(sum.rows[index_of(c)][0]));
      continue;
    }
    double s = 0;
    for (double v : sum.rows[index_of(c)]) {
      CHECK(v == doctest::Approx(1.0 / 6).epsilon(1e-12));
      s += v;
    }
    CHECK(std::abs(s - 1) <= 1e-9);
  }
  CHECK(total == 30 * 6);
  const std::string csv = attention_csv(sum);
  CHECK(csv.rfind("class,node,move_forward,move_backward,left_to_right,right_to_left,no_change\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  CHECK_THROWS_AS(attention_summary(init_params(small(false)), small(false), graphs), ConfigError);
}
