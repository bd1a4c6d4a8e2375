#pragma once

// Multi-relational GCN and its relation-attention variant over InteractionGraphs.
//
// Node features are stacked row-wise (n_nodes × dim). For relation r a node
// aggregates the mean of its in-neighbors under r (sources j of edges j → i),
// then applies W_r. The plain layer sums the self-loop term W_self·h[i] with the
// per-relation aggregates under a ReLU; the attention layer instead weights
// those six terms per node with a softmax computed from their concatenation,
// one softmax per head, and projects the concatenated heads back to the layer
// width.

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "roadbeh/grad_check.hpp"
#include "roadbeh/interaction_graph.hpp"
#include "roadbeh/param_store.hpp"
#include "roadbeh/synth.hpp"
#include "roadbeh/tape.hpp"

namespace roadbeh {

/// Attention slots per node: the self-loop term followed by one per relation.
inline constexpr std::size_t kAttentionSlots = kNumRelations + 1;
inline constexpr std::size_t kNumEntityKinds = 2;

struct ModelConfig {
  std::vector<std::size_t> layer_dims{64, 32, 6};
  std::size_t embedding_dim = 64;
  std::size_t num_relations = kNumRelations;
  std::size_t heads = 2;
  bool use_attention = true;
  bool use_skip = true;
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError
  std::size_t input_dim(std::size_t layer) const {  // layer is 0-based
    return layer == 0 ? embedding_dim : layer_dims[layer - 1];
  }
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

nlohmann::json to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& doc, ModelConfig base = {});

/// Graph in the form the models consume.
struct PreparedGraph {
  std::string scene_id;
  std::vector<std::uint32_t> kinds;                   // 0 vehicle, 1 lane marking
  std::array<RowGroups, kNumRelations> in_neighbors;  // per relation, CSR over target nodes
  std::vector<int> labels;                            // class index, -1 when unlabeled
  std::vector<char> mask;                             // labeled vehicle rows
  std::vector<char> vehicle;

  std::size_t node_count() const { return kinds.size(); }
  std::size_t supervised() const;
};

PreparedGraph prepare_graph(const InteractionGraph& g);

/// Glorot-uniform weights, U(±0.1) embeddings, zero attention scorers.
ParamStore init_params(const ModelConfig& cfg);
/// Throws ConfigError when names or shapes disagree with the config.
void check_params(const ModelConfig& cfg, const ParamStore& params);

namespace param_names {
std::string embedding();
std::string self_weight(std::size_t layer);
std::string relation_weight(std::size_t layer, TemporalRelation r);
std::string attention_weight(std::size_t layer, std::size_t head);
std::string head_projection(std::size_t layer);
std::string skip_projection(std::size_t target_layer);
}  // namespace param_names

/// Parameters recorded on a tape, by name.
using Binding = std::map<std::string, Tensor>;
Binding bind_params(Tape& tape, const ParamStore& params, bool trainable);

struct LayerWeights {
  Tensor self;
  std::array<Tensor, kNumRelations> relation;
  std::vector<Tensor> attention;  // one scorer per head (attention layers only)
  Tensor head_projection;         // (heads·d) × d (attention layers only)
};
LayerWeights layer_weights(const Binding& b, const ModelConfig& cfg, std::size_t layer);

Tensor embed_nodes(Tape& tape, const PreparedGraph& g, const Tensor& embedding);
Tensor relation_conv(Tape& tape, const Tensor& h_prev, const RowGroups& neighbors, const Tensor& w_rel);

/// `residual`, when given, is added to the pre-activation. `activate` = false
/// leaves the output linear (classifier head).
Tensor mrgcn_layer(Tape& tape, const Tensor& h_prev, const PreparedGraph& g, const LayerWeights& w,
                   const Tensor* residual, bool activate);

struct AttentionLayerOutput {
  Tensor features;
  Tensor alpha_mean;  // n × kAttentionSlots, averaged over heads (value only)
  std::vector<Tensor> alpha;  // per head, recorded on the tape
};
AttentionLayerOutput rel_att_layer(Tape& tape, const Tensor& h_prev, const PreparedGraph& g,
                                   const LayerWeights& w, const Tensor* residual, bool activate);

struct ForwardResult {
  Tensor logits;                   // n × classes, no activation
  std::vector<Tensor> attention;   // per layer head-averaged α (attention models only)
};
ForwardResult forward(Tape& tape, const PreparedGraph& g, const Binding& b, const ModelConfig& cfg);

/// Masked cross-entropy of one graph; fills `grads` (same names as params) when given.
double loss_and_gradients(const PreparedGraph& g, const ParamStore& params, const ModelConfig& cfg,
                          ParamStore* grads, double* min_relu_margin = nullptr);

/// Argmax class per node (all nodes, including lane markings).
std::vector<int> predict(const PreparedGraph& g, const ParamStore& params, const ModelConfig& cfg);

struct Checkpoint {
  ModelConfig config;
  ParamStore params;
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};
nlohmann::json to_json(const Checkpoint& ck);
Checkpoint checkpoint_from_json(const nlohmann::json& doc);

/// Class × (self, relations...) attention matrix from the final layer.
struct AttentionSummary {
  std::array<std::array<double, kAttentionSlots>, kNumClasses> rows{};
  std::array<std::size_t, kNumClasses> counts{};  // vehicles predicted per class
  bool present(BehaviorClass c) const { return counts[index_of(c)] > 0; }
};

/// Mean final-layer α over every vehicle node grouped by predicted class, each
/// row renormalized to 1. Classes never predicted get NaN rows. Graphs are
/// evaluated in parallel; accumulation follows graph order.
AttentionSummary attention_summary(const ParamStore& params, const ModelConfig& cfg,
                                   std::span<const PreparedGraph> graphs);

/// "class,node,move_forward,move_backward,left_to_right,right_to_left,no_change"
std::string attention_csv(const AttentionSummary& summary);

/// Inverse-closed random graph: `nodes − markings` labeled vehicles then
/// `markings` lane markings, every node pair related, every relation present
/// (needs at least 3 pairs).
InteractionGraph random_graph(std::uint64_t seed, std::size_t nodes = 6, std::size_t markings = 2);

struct ModelGradCheck {
  GradCheckReport report;
  std::size_t redraws = 0;        // initializations rejected for a ReLU input near 0
  double min_relu_margin = 0.0;   // of the accepted initialization
};

/// Full-loss gradient check at a fresh initialization. Draws are repeated until
/// every ReLU input is at least 1e-4 from the kink, so central differences never
/// straddle it. `randomize_attention` replaces the zero scorer init with
/// U(±0.5) entries to exercise non-uniform attention.
ModelGradCheck check_model_gradients(const ModelConfig& cfg, const PreparedGraph& g, double h = 1e-5,
                                     double tol = 1e-4, bool randomize_attention = true);

}  // namespace roadbeh
