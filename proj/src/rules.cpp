#include "roadbeh/rules.hpp"

#include <stdexcept>

namespace roadbeh {

BehaviorClass class_for_relation(TemporalRelation r) {
  switch (r) {
    case TemporalRelation::MoveForward: return BehaviorClass::MAU;
    case TemporalRelation::MoveBackward: return BehaviorClass::MTU;
    case TemporalRelation::LeftToRight: return BehaviorClass::LCL;
    case TemporalRelation::RightToLeft: return BehaviorClass::LCR;
    case TemporalRelation::NoChange: return BehaviorClass::PRK;
  }
  return BehaviorClass::PRK;
}

BehaviorClass majority_class(const std::array<std::size_t, kNumRelations>& counts) {
  static constexpr std::array<TemporalRelation, kNumRelations> kPriority = {
      TemporalRelation::LeftToRight, TemporalRelation::RightToLeft, TemporalRelation::MoveForward,
      TemporalRelation::MoveBackward, TemporalRelation::NoChange};
  std::size_t best = 0;
  std::optional<TemporalRelation> pick;
  for (TemporalRelation r : kPriority) {
    if (counts[index_of(r)] > best) {
      best = counts[index_of(r)];
      pick = r;
    }
  }
  return pick ? class_for_relation(*pick) : BehaviorClass::PRK;
}

RuleVerdict classify_stage1(const InteractionGraph& g, std::uint32_t vehicle) {
  if (vehicle >= g.nodes.size() || g.nodes[vehicle].kind != EntityKind::Vehicle)
    throw std::invalid_argument("classify_stage1: node " + std::to_string(vehicle) + " is not a vehicle");
  RuleVerdict v;
  v.node = vehicle;
  std::array<std::size_t, kNumRelations> all{};
  std::size_t marking_edges = 0;
  for (const GraphEdge& e : g.edges) {
    if (e.dst != vehicle) continue;
    ++all[index_of(e.rel)];
    if (g.nodes[e.src].kind == EntityKind::LaneMarking) {
      ++v.counts[index_of(e.rel)];
      ++marking_edges;
    }
  }
  if (marking_edges == 0) {
    v.counts = all;
    v.used_all_edges = true;
  }
  v.stage1 = majority_class(v.counts);
  v.final_class = v.stage1;
  return v;
}

std::vector<RuleVerdict> classify_overtake(const InteractionGraph& g, std::vector<RuleVerdict> verdicts) {
  auto eligible = [](const RuleVerdict& v) {
    return v.stage1 != BehaviorClass::PRK && v.stage1 != BehaviorClass::MTU;
  };
  for (RuleVerdict& i : verdicts) {
    if (!eligible(i)) continue;
    for (const RuleVerdict& j : verdicts) {
      if (&i == &j || !eligible(j)) continue;
      if (g.has_edge(j.node, i.node, TemporalRelation::MoveForward)) {
        i.final_class = BehaviorClass::OVT;
        i.overtaken = j.node;
        break;
      }
    }
  }
  return verdicts;
}

std::vector<RuleVerdict> classify_rules(const InteractionGraph& g) {
  std::vector<RuleVerdict> stage1;
  for (const GraphNode& n : g.nodes)
    if (n.kind == EntityKind::Vehicle) stage1.push_back(classify_stage1(g, n.index));
  return classify_overtake(g, std::move(stage1));
}

}  // namespace roadbeh
