#include "roadbeh/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "roadbeh/rng.hpp"

namespace roadbeh {

using nlohmann::json;

void ModelConfig::validate() const {
  if (layer_dims.empty()) throw ConfigError("model: layer_dims is empty");
  if (layer_dims.back() != kNumClasses)
    throw ConfigError("model: last layer dim must be " + std::to_string(kNumClasses) + " (classes)");
  if (std::find(layer_dims.begin(), layer_dims.end(), std::size_t{0}) != layer_dims.end())
    throw ConfigError("model: layer dims must be positive");
  if (embedding_dim == 0) throw ConfigError("model: embedding_dim must be positive");
  if (num_relations != kNumRelations)
    throw ConfigError("model: num_relations must be " + std::to_string(kNumRelations));
  if (heads == 0) throw ConfigError("model: heads must be >= 1");
}

json to_json(const ModelConfig& cfg) {
  return {{"layer_dims", cfg.layer_dims}, {"embedding_dim", cfg.embedding_dim},
          {"num_relations", cfg.num_relations}, {"heads", cfg.heads},
          {"use_attention", cfg.use_attention}, {"use_skip", cfg.use_skip}, {"seed", cfg.seed}};
}

ModelConfig model_config_from_json(const json& doc, ModelConfig cfg) {
  if (!doc.is_object()) throw ConfigError("model config must be an object");
  for (const auto& [key, v] : doc.items()) {
    try {
      if (key == "layer_dims") cfg.layer_dims = v.get<std::vector<std::size_t>>();
      else if (key == "embedding_dim") cfg.embedding_dim = v.get<std::size_t>();
      else if (key == "num_relations") cfg.num_relations = v.get<std::size_t>();
      else if (key == "heads") cfg.heads = v.get<std::size_t>();
      else if (key == "use_attention") cfg.use_attention = v.get<bool>();
      else if (key == "use_skip") cfg.use_skip = v.get<bool>();
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else throw ConfigError("model: unknown key '" + key + "'");
    } catch (const json::exception& e) {
      throw ConfigError("model." + key + ": " + e.what());
    }
  }
  return cfg;
}

std::size_t PreparedGraph::supervised() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), char{1}));
}

PreparedGraph prepare_graph(const InteractionGraph& g) {
  PreparedGraph p;
  p.scene_id = g.scene_id;
  const std::size_t n = g.nodes.size();
  for (const GraphNode& node : g.nodes) {
    const bool is_vehicle = node.kind == EntityKind::Vehicle;
    p.kinds.push_back(is_vehicle ? 0u : 1u);
    p.vehicle.push_back(is_vehicle ? 1 : 0);
    const bool labeled = is_vehicle && node.label.has_value();
    p.labels.push_back(labeled ? static_cast<int>(index_of(*node.label)) : -1);
    p.mask.push_back(labeled ? 1 : 0);
  }
  // Edges are sorted by (src, dst, rel), so each target's sources come out in
  // ascending order.
  std::array<std::vector<std::vector<std::uint32_t>>, kNumRelations> lists;
  for (auto& l : lists) l.assign(n, {});
  for (const GraphEdge& e : g.edges) lists[index_of(e.rel)][e.dst].push_back(e.src);
  for (std::size_t r = 0; r < kNumRelations; ++r)
    for (std::size_t i = 0; i < n; ++i) p.in_neighbors[r].push_group(lists[r][i]);
  return p;
}

namespace param_names {
std::string embedding() { return "embedding"; }
std::string self_weight(std::size_t layer) { return "layer" + std::to_string(layer) + ".W_self"; }
std::string relation_weight(std::size_t layer, TemporalRelation r) {
  return "layer" + std::to_string(layer) + ".W_rel." + std::string(to_string(r));
}
std::string attention_weight(std::size_t layer, std::size_t head) {
  return "layer" + std::to_string(layer) + ".W_att.head" + std::to_string(head);
}
std::string head_projection(std::size_t layer) { return "layer" + std::to_string(layer) + ".W_out"; }
std::string skip_projection(std::size_t target_layer) {
  return "skip.to_layer" + std::to_string(target_layer);
}
}  // namespace param_names

namespace {

struct Shape {
  std::size_t rows, cols;
};

// Expected parameter shapes; the value flags how to initialize.
enum class Init { Glorot, Embedding, Zero };

std::vector<std::tuple<std::string, Shape, Init>> layout(const ModelConfig& cfg) {
  std::vector<std::tuple<std::string, Shape, Init>> out;
  out.emplace_back(param_names::embedding(), Shape{kNumEntityKinds, cfg.embedding_dim}, Init::Embedding);
  const std::size_t layers = cfg.layer_dims.size();
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = cfg.input_dim(l), outd = cfg.layer_dims[l];
    out.emplace_back(param_names::self_weight(l), Shape{in, outd}, Init::Glorot);
    for (TemporalRelation r : kAllRelations)
      out.emplace_back(param_names::relation_weight(l, r), Shape{in, outd}, Init::Glorot);
    if (cfg.use_attention) {
      for (std::size_t h = 0; h < cfg.heads; ++h)
        out.emplace_back(param_names::attention_weight(l, h), Shape{kAttentionSlots * outd, kAttentionSlots},
                         Init::Zero);
      out.emplace_back(param_names::head_projection(l), Shape{cfg.heads * outd, outd}, Init::Glorot);
    }
    if (cfg.use_skip && l >= 1) {
      // h^{l-1} (the embedding when l == 1) feeds the pre-activation of layer l, whose input is h^l
      const std::size_t src = cfg.input_dim(l - 1);
      if (src != outd)
        out.emplace_back(param_names::skip_projection(l), Shape{src, outd}, Init::Glorot);
    }
  }
  return out;
}

}  // namespace

ParamStore init_params(const ModelConfig& cfg) {
  cfg.validate();
  ParamStore store;
  Rng rng = make_rng(cfg.seed, "init");
  for (const auto& [name, shape, init] : layout(cfg)) {
    Tensor t(shape.rows, shape.cols);
    if (init == Init::Glorot) {
      const double limit = std::sqrt(6.0 / static_cast<double>(shape.rows + shape.cols));
      for (double& v : t.data()) v = uniform(rng, -limit, limit);
    } else if (init == Init::Embedding) {
      for (double& v : t.data()) v = uniform(rng, -0.1, 0.1);
    }
    store.add(name, std::move(t));
  }
  return store;
}

void check_params(const ModelConfig& cfg, const ParamStore& params) {
  cfg.validate();
  const auto expected = layout(cfg);
  if (expected.size() != params.size())
    throw ConfigError("checkpoint has " + std::to_string(params.size()) + " tensors, config expects " +
                      std::to_string(expected.size()));
  for (const auto& [name, shape, init] : expected) {
    if (!params.contains(name)) throw ConfigError("checkpoint lacks parameter '" + name + "'");
    const Tensor& t = params.get(name);
    if (t.rows() != shape.rows || t.cols() != shape.cols)
      throw ConfigError("parameter '" + name + "' is " + t.shape_string() + ", config expects " +
                        std::to_string(shape.rows) + "x" + std::to_string(shape.cols));
  }
}

Binding bind_params(Tape& tape, const ParamStore& params, bool trainable) {
  Binding b;
  for (const auto& [name, t] : params) b.emplace(name, tape.parameter(t, trainable));
  return b;
}

LayerWeights layer_weights(const Binding& b, const ModelConfig& cfg, std::size_t layer) {
  LayerWeights w;
  w.self = b.at(param_names::self_weight(layer));
  for (TemporalRelation r : kAllRelations) w.relation[index_of(r)] = b.at(param_names::relation_weight(layer, r));
  if (cfg.use_attention) {
    for (std::size_t h = 0; h < cfg.heads; ++h) w.attention.push_back(b.at(param_names::attention_weight(layer, h)));
    w.head_projection = b.at(param_names::head_projection(layer));
  }
  return w;
}

Tensor embed_nodes(Tape& tape, const PreparedGraph& g, const Tensor& embedding) {
  return gather_rows(tape, embedding, g.kinds);
}

Tensor relation_conv(Tape& tape, const Tensor& h_prev, const RowGroups& neighbors, const Tensor& w_rel) {
  // mean_j(W·h[j]) == W·mean_j(h[j]); aggregating first is cheaper.
  return matmul(tape, group_mean(tape, h_prev, neighbors), w_rel);
}

namespace {

std::vector<Tensor> layer_terms(Tape& tape, const Tensor& h_prev, const PreparedGraph& g, const LayerWeights& w) {
  std::vector<Tensor> terms;
  terms.reserve(kAttentionSlots + 1);
  terms.push_back(matmul(tape, h_prev, w.self));
  for (std::size_t r = 0; r < kNumRelations; ++r)
    terms.push_back(relation_conv(tape, h_prev, g.in_neighbors[r], w.relation[r]));
  return terms;
}

Tensor finish(Tape& tape, Tensor pre, const Tensor* residual, bool activate) {
  if (residual) pre = add(tape, pre, *residual);
  return activate ? relu(tape, pre) : pre;
}

}  // namespace

Tensor mrgcn_layer(Tape& tape, const Tensor& h_prev, const PreparedGraph& g, const LayerWeights& w,
                   const Tensor* residual, bool activate) {
  auto terms = layer_terms(tape, h_prev, g, w);
  if (residual) terms.push_back(*residual);
  Tensor pre = add_n(tape, terms);
  return activate ? relu(tape, pre) : pre;
}

AttentionLayerOutput rel_att_layer(Tape& tape, const Tensor& h_prev, const PreparedGraph& g,
                                   const LayerWeights& w, const Tensor* residual, bool activate) {
  const auto terms = layer_terms(tape, h_prev, g, w);
  const Tensor stacked = concat_cols(tape, terms);
  const std::size_t n = h_prev.rows();
  AttentionLayerOutput out;
  out.alpha_mean = Tensor(n, kAttentionSlots);
  std::vector<Tensor> heads;
  std::vector<Tensor> weighted(kAttentionSlots);
  for (const Tensor& scorer : w.attention) {
    Tensor alpha = softmax_rows(tape, matmul(tape, stacked, scorer));
    for (std::size_t k = 0; k < kAttentionSlots; ++k) weighted[k] = scale_rows_by_column(tape, terms[k], alpha, k);
    heads.push_back(add_n(tape, weighted));
    auto mean = out.alpha_mean.data();
    const auto a = alpha.data();
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += a[i];
    out.alpha.push_back(std::move(alpha));
  }
  for (double& v : out.alpha_mean.data()) v /= static_cast<double>(w.attention.size());
  const Tensor merged = heads.size() == 1 ? heads.front() : concat_cols(tape, heads);
  out.features = finish(tape, matmul(tape, merged, w.head_projection), residual, activate);
  return out;
}

ForwardResult forward(Tape& tape, const PreparedGraph& g, const Binding& b, const ModelConfig& cfg) {
  ForwardResult result;
  std::vector<Tensor> outputs;  // outputs[l] = h^l, outputs[0] = embeddings
  outputs.push_back(embed_nodes(tape, g, b.at(param_names::embedding())));
  const std::size_t layers = cfg.layer_dims.size();
  for (std::size_t l = 0; l < layers; ++l) {
    const bool last = l + 1 == layers;
    std::optional<Tensor> residual;
    if (cfg.use_skip && l >= 1) {
      const Tensor& src = outputs[l - 1];
      const auto it = b.find(param_names::skip_projection(l));
      residual = it != b.end() ? matmul(tape, src, it->second) : src;
    }
    const LayerWeights w = layer_weights(b, cfg, l);
    const Tensor* res = residual ? &*residual : nullptr;
    if (cfg.use_attention) {
      auto out = rel_att_layer(tape, outputs.back(), g, w, res, !last);
      result.attention.push_back(std::move(out.alpha_mean));
      outputs.push_back(std::move(out.features));
    } else {
      outputs.push_back(mrgcn_layer(tape, outputs.back(), g, w, res, !last));
    }
  }
  result.logits = std::move(outputs.back());
  return result;
}

double loss_and_gradients(const PreparedGraph& g, const ParamStore& params, const ModelConfig& cfg,
                          ParamStore* grads, double* min_relu_margin) {
  Tape tape;
  const Binding b = bind_params(tape, params, grads != nullptr);
  const ForwardResult fr = forward(tape, g, b, cfg);
  const Tensor loss = masked_cross_entropy(tape, fr.logits, g.labels, g.mask);
  if (min_relu_margin) *min_relu_margin = tape.min_relu_input_abs();
  const double value = loss(0, 0);
  if (grads) {
    tape.backward(loss);
    for (const auto& [name, t] : b) tape.grad_into(t, grads->values(name));
  }
  return value;
}

std::vector<int> predict(const PreparedGraph& g, const ParamStore& params, const ModelConfig& cfg) {
  Tape tape;
  const Binding b = bind_params(tape, params, false);
  const Tensor logits = forward(tape, g, b, cfg).logits;
  std::vector<int> out(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto row = logits.row(i);
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

json to_json(const Checkpoint& ck) {
  json doc = to_json(ck.params);
  doc["config"] = to_json(ck.config);
  return doc;
}

Checkpoint checkpoint_from_json(const json& doc) {
  if (doc.value("version", 0) != 1) throw ConfigError("checkpoint: unsupported version");
  if (!doc.contains("config")) throw ConfigError("checkpoint: missing config");
  Checkpoint ck{model_config_from_json(doc.at("config")), param_store_from_json(doc)};
  check_params(ck.config, ck.params);
  return ck;
}

AttentionSummary attention_summary(const ParamStore& params, const ModelConfig& cfg,
                                   std::span<const PreparedGraph> graphs) {
  if (!cfg.use_attention) throw ConfigError("attention summary needs an attention model");
  struct PerGraph {
    std::vector<int> predicted;
    Tensor alpha;
  };
  std::vector<PerGraph> results(graphs.size());
  const auto count = static_cast<std::ptrdiff_t>(graphs.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const PreparedGraph& g = graphs[static_cast<std::size_t>(k)];
    Tape tape;
    const Binding b = bind_params(tape, params, false);
    ForwardResult fr = forward(tape, g, b, cfg);
    PerGraph& r = results[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < fr.logits.rows(); ++i) {
      const auto row = fr.logits.row(i);
      r.predicted.push_back(static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
    }
    r.alpha = std::move(fr.attention.back());
  }

  AttentionSummary s;
  std::array<std::array<double, kAttentionSlots>, kNumClasses> sums{};
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    for (std::size_t i = 0; i < graphs[k].node_count(); ++i) {
      if (!graphs[k].vehicle[i]) continue;
      const auto c = static_cast<std::size_t>(results[k].predicted[i]);
      ++s.counts[c];
      for (std::size_t j = 0; j < kAttentionSlots; ++j) sums[c][j] += results[k].alpha(i, j);
    }
  }
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (s.counts[c] == 0) {
      s.rows[c].fill(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    double total = 0.0;
    for (double v : sums[c]) total += v;
    for (std::size_t j = 0; j < kAttentionSlots; ++j) s.rows[c][j] = sums[c][j] / total;
  }
  return s;
}

std::string attention_csv(const AttentionSummary& summary) {
  std::ostringstream out;
  out << "class,node";
  for (TemporalRelation r : kAllRelations) out << ',' << to_string(r);
  out << '\n';
  out.precision(6);
  out << std::fixed;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    out << to_string(kAllClasses[c]);
    for (double v : summary.rows[c]) {
      if (std::isnan(v)) out << ",nan";
      else out << ',' << v;
    }
    out << '\n';
  }
  return out.str();
}

InteractionGraph random_graph(std::uint64_t seed, std::size_t nodes, std::size_t markings) {
  if (markings > nodes || nodes * (nodes - 1) / 2 < 3)
    throw std::invalid_argument("random_graph: need at least 3 node pairs and markings <= nodes");
  Rng rng = make_rng(seed, "random_graph");
  InteractionGraph g;
  g.scene_id = "random-" + std::to_string(seed);
  for (std::size_t i = 0; i < nodes; ++i) {
    const bool vehicle = i < nodes - markings;
    GraphNode n;
    n.index = static_cast<std::uint32_t>(i);
    n.kind = vehicle ? EntityKind::Vehicle : EntityKind::LaneMarking;
    n.track_id = (vehicle ? "v" : "m") + std::to_string(i);
    if (vehicle) n.label = kAllClasses[std::uniform_int_distribution<std::size_t>(0, kNumClasses - 1)(rng)];
    g.nodes.push_back(std::move(n));
  }
  // The first pairs take MoveForward, LeftToRight, NoChange (their inverses
  // supply the remaining two relations); the rest are random.
  static constexpr std::array<TemporalRelation, 3> kSeed = {
      TemporalRelation::MoveForward, TemporalRelation::LeftToRight, TemporalRelation::NoChange};
  std::size_t pair = 0;
  std::uniform_int_distribution<std::size_t> pick(0, kNumRelations - 1);
  for (std::uint32_t a = 0; a < nodes; ++a)
    for (std::uint32_t b = a + 1; b < nodes; ++b, ++pair) {
      const TemporalRelation r = pair < kSeed.size() ? kSeed[pair] : kAllRelations[pick(rng)];
      g.edges.push_back({a, b, r});
      g.edges.push_back({b, a, inverse(r)});
    }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

ModelGradCheck check_model_gradients(const ModelConfig& cfg, const PreparedGraph& g, double h, double tol,
                                     bool randomize_attention) {
  constexpr double kMargin = 1e-4;
  constexpr std::size_t kMaxDraws = 1000;
  ModelGradCheck out;
  ParamStore params;
  for (std::size_t draw = 0;; ++draw) {
    if (draw == kMaxDraws) throw std::runtime_error("no initialization keeps ReLU inputs away from 0");
    ModelConfig c = cfg;
    c.seed = draw == 0 ? cfg.seed : derive_seed(cfg.seed, "gradcheck", draw);
    params = init_params(c);
    if (randomize_attention && cfg.use_attention) {
      Rng rng = make_rng(c.seed, "gradcheck/attention");
      for (const auto& name : params.names())
        if (name.find(".W_att.") != std::string::npos)
          for (double& v : params.values(name)) v = uniform(rng, -0.5, 0.5);
    }
    double margin = 0.0;
    loss_and_gradients(g, params, cfg, nullptr, &margin);
    if (margin >= kMargin) {
      out.redraws = draw;
      out.min_relu_margin = margin;
      break;
    }
  }
  const LossFunction f = [&](const ParamStore& p, ParamStore* grads) { return loss_and_gradients(g, p, cfg, grads); };
  out.report = grad_check(f, params, h, tol);
  return out;
}

}  // namespace roadbeh
