#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "roadbeh/interaction_graph.hpp"

namespace roadbeh {

/// Majority-relation verdict for one vehicle node.
struct RuleVerdict {
  std::uint32_t node = 0;
  BehaviorClass stage1 = BehaviorClass::PRK;
  BehaviorClass final_class = BehaviorClass::PRK;
  std::array<std::size_t, kNumRelations> counts{};  // indexed by TemporalRelation
  bool used_all_edges = false;                       // no lane-marking evidence
  std::optional<std::uint32_t> overtaken;            // set when promoted to OVT
};

/// MoveForward→MAU, MoveBackward→MTU, LeftToRight→LCL, RightToLeft→LCR, NoChange→PRK.
BehaviorClass class_for_relation(TemporalRelation r);

/// Argmax over relation counts. Ties prefer lane changes, then forward/backward
/// motion, then no-change; within a tier the class enum order decides. All-zero
/// counts yield PRK.
BehaviorClass majority_class(const std::array<std::size_t, kNumRelations>& counts);

/// Counts the vehicle's own motion relative to lane markings (edges
/// marking → vehicle). Falls back to every incoming edge when the vehicle has no
/// lane-marking neighbor.
RuleVerdict classify_stage1(const InteractionGraph& g, std::uint32_t vehicle);

/// Promotes vehicle i to OVT when i moved forward relative to another vehicle j
/// (edge j → i, MoveForward) and neither stage-1 verdict is PRK or MTU.
std::vector<RuleVerdict> classify_overtake(const InteractionGraph& g, std::vector<RuleVerdict> stage1);

/// Both stages for every vehicle node, in node order.
std::vector<RuleVerdict> classify_rules(const InteractionGraph& g);

}  // namespace roadbeh
