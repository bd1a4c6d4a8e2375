#include "roadbeh/train.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "roadbeh/rng.hpp"
#include "roadbeh/rules.hpp"
#include "roadbeh/synth.hpp"

namespace roadbeh {

using nlohmann::json;

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("train: epochs must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("train: lr must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("train: betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("train: eps must be > 0");
  if (seeds.empty()) throw ConfigError("train: seeds is empty");
  if (!(label_fraction > 0.0 && label_fraction <= 1.0))
    throw ConfigError("train: label_fraction must lie in (0, 1]");
}

json to_json(const TrainConfig& cfg) {
  return {{"epochs", cfg.epochs}, {"lr", cfg.lr},       {"beta1", cfg.beta1},
          {"beta2", cfg.beta2},   {"eps", cfg.eps},     {"patience", cfg.patience},
          {"seeds", cfg.seeds},   {"label_fraction", cfg.label_fraction}, {"jobs", cfg.jobs}};
}

TrainConfig train_config_from_json(const json& doc, TrainConfig cfg) {
  if (!doc.is_object()) throw ConfigError("train config must be an object");
  for (const auto& [key, v] : doc.items()) {
    try {
      if (key == "epochs") cfg.epochs = v.get<std::size_t>();
      else if (key == "lr") cfg.lr = v.get<double>();
      else if (key == "beta1") cfg.beta1 = v.get<double>();
      else if (key == "beta2") cfg.beta2 = v.get<double>();
      else if (key == "eps") cfg.eps = v.get<double>();
      else if (key == "patience") cfg.patience = v.get<std::size_t>();
      else if (key == "seeds") cfg.seeds = v.get<std::vector<std::uint64_t>>();
      else if (key == "label_fraction") cfg.label_fraction = v.get<double>();
      else if (key == "jobs") cfg.jobs = v.get<std::size_t>();
      else throw ConfigError("train: unknown key '" + key + "'");
    } catch (const json::exception& e) {
      throw ConfigError("train." + key + ": " + e.what());
    }
  }
  return cfg;
}

GraphSet build_graph_set(std::span<const Scene> scenes, double deadband) {
  std::vector<std::optional<InteractionGraph>> built(scenes.size());
  std::vector<std::string> errors(scenes.size());
  const auto n = static_cast<std::ptrdiff_t>(scenes.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Scene& s = scenes[static_cast<std::size_t>(i)];
    try {
      built[static_cast<std::size_t>(i)] = build_graph(s, deadband);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = s.id + ": " + e.what();
    }
  }
  GraphSet out;
  for (std::size_t i = 0; i < built.size(); ++i) {
    if (built[i]) out.graphs.push_back(std::move(*built[i]));
    else out.errors.push_back(std::move(errors[i]));
  }
  for (const InteractionGraph& g : out.graphs) out.prepared.push_back(prepare_graph(g));
  return out;
}

GraphSet graph_set_from(std::vector<InteractionGraph> graphs) {
  GraphSet out;
  out.graphs = std::move(graphs);
  for (const InteractionGraph& g : out.graphs) out.prepared.push_back(prepare_graph(g));
  return out;
}

Adam::Adam(const ParamStore& shape, double lr, double beta1, double beta2, double eps)
    : m_(shape.zeros_like()), v_(shape.zeros_like()), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(ParamStore& params, const ParamStore& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double root_c2 = std::sqrt(1.0 - std::pow(beta2_, static_cast<double>(t_)));
  // lr·m̂/(√v̂ + ε) rewritten as step·m/(√v + ε√c2)
  const double step = lr_ * root_c2 / c1;
  const double eps = eps_ * root_c2;
  const double b1 = beta1_, b2 = beta2_;
  for (const auto& [name, g_tensor] : grads) {
    const std::size_t len = g_tensor.size();
    const double* __restrict g = g_tensor.data().data();
    double* __restrict p = params.values(name).data();
    double* __restrict m = m_.values(name).data();
    double* __restrict v = v_.values(name).data();
#pragma omp simd
    for (std::size_t i = 0; i < len; ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      p[i] -= step * m[i] / (std::sqrt(v[i]) + eps);
    }
  }
}

namespace {

struct Collected {
  std::vector<int> truth, predicted;
};

void collect(const PreparedGraph& g, const std::vector<int>& pred, Collected& out) {
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    if (!g.vehicle[i] || g.labels[i] < 0) continue;
    out.truth.push_back(g.labels[i]);
    out.predicted.push_back(pred[i]);
  }
}

RunScores evaluate_impl(const Checkpoint& ck, const GraphSet& split, std::string run, bool parallel) {
  std::vector<std::vector<int>> preds(split.size());
  const auto n = static_cast<std::ptrdiff_t>(split.size());
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    preds[static_cast<std::size_t>(i)] = predict(split.prepared[static_cast<std::size_t>(i)], ck.params, ck.config);
  Collected c;
  for (std::size_t i = 0; i < split.size(); ++i) collect(split.prepared[i], preds[i], c);
  return score_predictions(c.truth, c.predicted, std::move(run));
}

}  // namespace

RunScores evaluate_model(const Checkpoint& ck, const GraphSet& split, std::string run) {
  return evaluate_impl(ck, split, std::move(run), true);
}

RunScores evaluate_model_serial(const Checkpoint& ck, const GraphSet& split, std::string run) {
  return evaluate_impl(ck, split, std::move(run), false);
}

RunScores evaluate_rules(const GraphSet& split, std::string run) {
  Collected c;
  for (std::size_t k = 0; k < split.size(); ++k) {
    const InteractionGraph& g = split.graphs[k];
    std::vector<int> pred(g.nodes.size(), -1);
    for (const RuleVerdict& v : classify_rules(g)) pred[v.node] = static_cast<int>(index_of(v.final_class));
    collect(split.prepared[k], pred, c);
  }
  return score_predictions(c.truth, c.predicted, std::move(run));
}

TrainResult train_model(const ModelConfig& model, const GraphSet& train, const GraphSet& val,
                        const TrainConfig& cfg, std::uint64_t seed, const EpochCallback& on_epoch) {
  cfg.validate();
  TrainResult result;
  result.seed = seed;
  ModelConfig mc = model;
  mc.seed = seed;
  ParamStore params = init_params(mc);
  ParamStore grads = params.zeros_like();
  Adam adam(params, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);
  result.best = {mc, params};

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < train.size(); ++i)
    if (train.prepared[i].supervised() > 0) order.push_back(i);
  if (order.empty()) {
    result.failed = true;
    result.failure = "training split has no labeled vehicles";
    return result;
  }

  Rng rng = make_rng(seed, "shuffle");
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t idx : order) {
      const double loss = loss_and_gradients(train.prepared[idx], params, mc, &grads);
      if (!std::isfinite(loss)) {
        result.failed = true;
        result.failure = "loss became non-finite at epoch " + std::to_string(epoch) + " on scene " +
                         train.prepared[idx].scene_id;
        result.epochs_run = epoch;
        return result;
      }
      total += loss;
      adam.step(params, grads);
    }
    result.epoch_loss.push_back(total / static_cast<double>(order.size()));
    result.epochs_run = epoch;

    EpochLog log{seed, epoch, result.epoch_loss.back(), 0.0, true};
    if (val.size() == 0) {
      result.best = {mc, params};
      result.best_epoch = epoch;
      if (on_epoch) on_epoch(log);
      continue;
    }
    log.val_macro_f1 = evaluate_model({mc, params}, val).macro.f1;
    log.improved = log.val_macro_f1 > result.best_val_macro_f1;
    if (on_epoch) on_epoch(log);
    if (log.improved) {
      result.best_val_macro_f1 = log.val_macro_f1;
      result.best_epoch = epoch;
      result.best.params = params;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  return result;
}

bool TrainOutcome::any_failed() const {
  return std::any_of(runs.begin(), runs.end(), [](const TrainResult& r) { return r.failed; });
}

std::string method_name(const ModelConfig& model) { return model.use_attention ? "rel_att_gcn" : "mrgcn"; }

TrainOutcome train_and_evaluate(const ModelConfig& model, std::span<const Scene> train_scenes,
                                const GraphSet& val, const GraphSet& test, const TrainConfig& cfg,
                                double deadband, const EpochCallback& on_epoch) {
  cfg.validate();
  model.validate();
  const std::size_t n = cfg.seeds.size();
  TrainOutcome out;
  out.runs.resize(n);
  std::vector<RunScores> scores(n);
  std::vector<std::optional<AttentionSummary>> attention(n);

  std::optional<GraphSet> shared;
  if (cfg.label_fraction >= 1.0) shared = build_graph_set(train_scenes, deadband);

  const int threads = cfg.jobs ? static_cast<int>(cfg.jobs) : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
    const auto i = static_cast<std::size_t>(k);
    const std::uint64_t seed = cfg.seeds[i];
    const std::string run = "seed" + std::to_string(seed);
    std::optional<GraphSet> own;
    if (!shared) {
      std::vector<Scene> copy(train_scenes.begin(), train_scenes.end());
      own = build_graph_set(subsample_labels(std::move(copy), cfg.label_fraction, seed).scenes, deadband);
    }
    TrainResult r = train_model(model, shared ? *shared : *own, val, cfg, seed, on_epoch);
    if (r.failed) {
      scores[i].run = run;
      scores[i].failed = true;
      scores[i].failure = r.failure;
    } else {
      scores[i] = evaluate_model(r.best, test, run);
      if (model.use_attention) attention[i] = attention_summary(r.best.params, r.best.config, test.prepared);
    }
    out.runs[i] = std::move(r);
  }

  out.report = make_report(method_name(model), "test", std::move(scores));
  if (model.use_attention) {
    AttentionSummary mean;
    std::array<std::size_t, kNumClasses> present{};
    for (const auto& a : attention) {
      if (!a) continue;
      out.attention.push_back(*a);
      for (std::size_t c = 0; c < kNumClasses; ++c) {
        mean.counts[c] += a->counts[c];
        if (!a->present(kAllClasses[c])) continue;
        ++present[c];
        for (std::size_t j = 0; j < kAttentionSlots; ++j) mean.rows[c][j] += a->rows[c][j];
      }
    }
    for (std::size_t c = 0; c < kNumClasses; ++c)
      for (double& v : mean.rows[c])
        v = present[c] ? v / static_cast<double>(present[c]) : std::numeric_limits<double>::quiet_NaN();
    if (!out.attention.empty()) out.report.attention = mean;
  }
  return out;
}

}  // namespace roadbeh
