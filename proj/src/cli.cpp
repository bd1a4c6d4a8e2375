#include "roadbeh/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "roadbeh/experiments.hpp"
#include "roadbeh/rules.hpp"

namespace roadbeh {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown(const json& doc, std::initializer_list<const char*> keys, const std::string& where) {
  if (!doc.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, v] : doc.items())
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; }))
      throw ConfigError(where + ": unknown key '" + key + "'");
}

}  // namespace

json to_json(const RunConfig& cfg) {
  json targets = json::array();
  for (const auto& [name, path] : cfg.targets) targets.push_back({{"name", name}, {"path", path}});
  return {{"synth", to_json(cfg.synth)},
          {"split", {{"train", cfg.split.train}, {"val", cfg.split.val}, {"test", cfg.split.test}}},
          {"model", to_json(cfg.model)},
          {"train", to_json(cfg.train)},
          {"graph", {{"deadband", cfg.deadband}}},
          {"scarcity", {{"fractions", cfg.fractions}}},
          {"transfer", {{"targets", targets}}},
          {"paths", {{"data", cfg.data}, {"out", cfg.out}, {"checkpoint", cfg.checkpoint}}},
          {"eval", {{"split", cfg.eval_split}}}};
}

RunConfig run_config_from_json(const json& doc) {
  reject_unknown(doc, {"synth", "split", "model", "train", "graph", "scarcity", "transfer", "paths", "eval"},
                 "config");
  RunConfig cfg;
  try {
    if (doc.contains("synth")) cfg.synth = synth_config_from_json(doc["synth"]);
    if (doc.contains("model")) cfg.model = model_config_from_json(doc["model"]);
    if (doc.contains("train")) cfg.train = train_config_from_json(doc["train"]);
    if (doc.contains("split")) {
      const json& s = doc["split"];
      reject_unknown(s, {"train", "val", "test"}, "split");
      cfg.split.train = s.value("train", cfg.split.train);
      cfg.split.val = s.value("val", cfg.split.val);
      cfg.split.test = s.value("test", cfg.split.test);
    }
    if (doc.contains("graph")) {
      reject_unknown(doc["graph"], {"deadband"}, "graph");
      cfg.deadband = doc["graph"].value("deadband", cfg.deadband);
    }
    if (doc.contains("scarcity")) {
      reject_unknown(doc["scarcity"], {"fractions"}, "scarcity");
      cfg.fractions = doc["scarcity"].value("fractions", cfg.fractions);
    }
    if (doc.contains("transfer")) {
      reject_unknown(doc["transfer"], {"targets"}, "transfer");
      for (const json& t : doc["transfer"].value("targets", json::array())) {
        reject_unknown(t, {"name", "path"}, "transfer.targets");
        cfg.targets.emplace_back(t.at("name").get<std::string>(), t.at("path").get<std::string>());
      }
    }
    if (doc.contains("paths")) {
      const json& p = doc["paths"];
      reject_unknown(p, {"data", "out", "checkpoint"}, "paths");
      cfg.data = p.value("data", cfg.data);
      cfg.out = p.value("out", cfg.out);
      cfg.checkpoint = p.value("checkpoint", cfg.checkpoint);
    }
    if (doc.contains("eval")) {
      reject_unknown(doc["eval"], {"split"}, "eval");
      cfg.eval_split = doc["eval"].value("split", cfg.eval_split);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

fs::path prepare_out(const RunConfig& cfg) {
  if (cfg.out.empty()) throw ConfigError("no output directory (--out)");
  fs::create_directories(cfg.out);
  write_json(fs::path(cfg.out) / "config.json", to_json(cfg));
  return cfg.out;
}

std::vector<Scene> load_split(const RunConfig& cfg, const std::string& split) {
  if (cfg.data.empty()) throw ConfigError("no scene data (--data)");
  const fs::path p = cfg.data;
  if (fs::is_directory(p) && fs::exists(p / (split + ".jsonl")))
    return load_scenes(p / (split + ".jsonl"), cfg.synth.max_vehicles);
  if (fs::is_directory(p)) throw SceneError((p / (split + ".jsonl")).string() + ": no such file");
  return load_scenes(p, cfg.synth.max_vehicles);
}

GraphSet graphs_for(const std::vector<Scene>& scenes, double deadband, std::ostream& err) {
  GraphSet set = build_graph_set(scenes, deadband);
  for (const std::string& e : set.errors) err << "warning: skipped " << e << "\n";
  return set;
}

Checkpoint load_checkpoint(const RunConfig& cfg) {
  if (cfg.checkpoint.empty()) throw ConfigError("no checkpoint (--checkpoint)");
  try {
    return checkpoint_from_json(read_json(cfg.checkpoint));
  } catch (const ConfigError& e) {
    throw ConfigError(cfg.checkpoint + ": " + e.what());
  }
}

std::string upper_env(const std::string& flag) {
  std::string name = "ROADBEH_";
  for (char c : flag) name += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return name;
}

void attach_env(CLI::App& app) {
  for (CLI::Option* opt : app.get_options()) {
    const auto& names = opt->get_lnames();
    if (names.empty() || names.front() == "help") continue;
    opt->envname(upper_env(names.front()));
  }
  for (CLI::App* sub : app.get_subcommands({})) attach_env(*sub);
}

// ---------------------------------------------------------------------------

int cmd_synth(const RunConfig& cfg, std::ostream& out) {
  cfg.synth.validate();
  const CorpusSplit split = split_corpus(synth_corpus(cfg.synth), cfg.split, cfg.synth.seed);
  const fs::path dir = prepare_out(cfg);
  save_scenes(dir / "train.jsonl", split.train);
  save_scenes(dir / "val.jsonl", split.val);
  save_scenes(dir / "test.jsonl", split.test);
  json manifest = {{"seed", cfg.synth.seed},
                   {"scenes", split.train.size() + split.val.size() + split.test.size()},
                   {"splits", {{"train", split.train.size()}, {"val", split.val.size()}, {"test", split.test.size()}}},
                   {"warnings", split.warnings}};
  write_json(dir / "manifest.json", manifest);
  out << "wrote " << split.train.size() << " train, " << split.val.size() << " val, " << split.test.size()
      << " test scenes to " << dir.string() << "\n";
  return 0;
}

int cmd_graph(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.data.empty()) throw ConfigError("no scene input (--in)");
  const std::vector<Scene> scenes = load_scenes(cfg.data, cfg.synth.max_vehicles);
  const fs::path dir = prepare_out(cfg);
  std::ostringstream lines;
  json errors = json::array();
  for (const Scene& s : scenes) {
    try {
      lines << to_json(build_graph(s, cfg.deadband)).dump() << "\n";
    } catch (const GraphError& e) {
      errors.push_back({{"scene", s.id}, {"error", e.what()}});
      err << "error: " << e.what() << "\n";
    }
  }
  write_text(dir / "graphs.jsonl", lines.str());
  write_json(dir / "errors.json", errors);
  out << "built " << scenes.size() - errors.size() << " of " << scenes.size() << " graphs\n";
  return errors.empty() ? 0 : 1;
}

std::string training_log_csv(const std::vector<TrainResult>& runs) {
  std::ostringstream s;
  s << "seed,epoch,train_loss\n";
  s.precision(17);
  for (const TrainResult& r : runs)
    for (std::size_t e = 0; e < r.epoch_loss.size(); ++e) s << r.seed << ',' << e + 1 << ',' << r.epoch_loss[e] << "\n";
  return s.str();
}

int cmd_train(const RunConfig& cfg, bool verbose, std::ostream& out, std::ostream& err) {
  cfg.model.validate();
  cfg.train.validate();
  const auto train = load_split(cfg, "train");
  const GraphSet val = graphs_for(load_split(cfg, "val"), cfg.deadband, err);
  const GraphSet test = graphs_for(load_split(cfg, "test"), cfg.deadband, err);
  const fs::path dir = prepare_out(cfg);
  std::mutex io;
  EpochCallback progress;
  if (verbose)
    progress = [&](const EpochLog& l) {
      std::lock_guard lock(io);
      err << "seed " << l.seed << " epoch " << l.epoch << " loss " << l.train_loss << " val macro-F1 "
          << l.val_macro_f1 << (l.improved ? " *" : "") << "\n";
    };
  const TrainOutcome o = train_and_evaluate(cfg.model, train, val, test, cfg.train, cfg.deadband, progress);

  json runs = json::array();
  for (const TrainResult& r : o.runs) {
    runs.push_back({{"seed", r.seed}, {"best_epoch", r.best_epoch}, {"epochs_run", r.epochs_run},
                    {"best_val_macro_f1", r.best_val_macro_f1}, {"failed", r.failed}, {"failure", r.failure}});
    if (!r.failed) write_json(dir / ("checkpoint_seed" + std::to_string(r.seed) + ".json"), to_json(r.best));
    else err << "error: seed " << r.seed << " diverged: " << r.failure << "\n";
  }
  write_json(dir / "training.json", runs);
  write_text(dir / "training_log.csv", training_log_csv(o.runs));
  write_json(dir / "report.json", to_json(o.report));
  write_text(dir / "report.csv", report_csv(o.report));
  if (o.report.attention) {
    write_text(dir / "attention.csv", attention_csv(*o.report.attention));
    std::size_t k = 0;
    for (const TrainResult& r : o.runs)
      if (!r.failed) write_text(dir / ("attention_seed" + std::to_string(r.seed) + ".csv"), attention_csv(o.attention[k++]));
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s test macro-F1 %.2f (mean over %zu seeds)\n", o.report.method.c_str(),
                o.report.mean.macro.f1, o.runs.size());
  out << buf;
  return o.any_failed() ? 1 : 0;
}

int cmd_eval(const RunConfig& cfg, const std::set<std::string>& flags, std::ostream& out, std::ostream& err) {
  const Checkpoint ck = load_checkpoint(cfg);
  const json have = to_json(ck.config), want = to_json(cfg.model);
  for (const std::string& key : flags)
    if (have[key] != want[key])
      throw ConfigError("config conflict: checkpoint has " + key + " = " + have[key].dump() + ", flags give " +
                        want[key].dump());
  const GraphSet split = graphs_for(load_split(cfg, cfg.eval_split), cfg.deadband, err);
  const EvalReport report = make_report(method_name(ck.config), cfg.eval_split, {evaluate_model(ck, split, "checkpoint")});
  const fs::path dir = prepare_out(cfg);
  write_json(dir / "report.json", to_json(report));
  write_text(dir / "report.csv", report_csv(report));
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s %s macro-F1 %.2f\n", report.method.c_str(), cfg.eval_split.c_str(),
                report.mean.macro.f1);
  out << buf;
  return 0;
}

int cmd_rules(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const GraphSet split = graphs_for(load_split(cfg, cfg.eval_split), cfg.deadband, err);
  const EvalReport report = make_report("rules", cfg.eval_split, {evaluate_rules(split, "rules")});
  const fs::path dir = prepare_out(cfg);
  write_json(dir / "report.json", to_json(report));
  write_text(dir / "report.csv", report_csv(report));
  char buf[128];
  std::snprintf(buf, sizeof buf, "rules %s macro-F1 %.2f\n", cfg.eval_split.c_str(), report.mean.macro.f1);
  out << buf;
  return 0;
}

int cmd_scarcity(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  cfg.train.validate();
  if (cfg.fractions.empty()) throw ConfigError("scarcity: no fractions");
  for (double f : cfg.fractions)
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("scarcity: fractions must lie in (0, 1]");
  const auto train = load_split(cfg, "train");
  const GraphSet val = graphs_for(load_split(cfg, "val"), cfg.deadband, err);
  const GraphSet test = graphs_for(load_split(cfg, "test"), cfg.deadband, err);
  std::vector<ModelConfig> models(2, cfg.model);
  models[0].use_attention = false;
  models[1].use_attention = true;
  const ScarcityResult r = scarcity_experiment(train, val, test, cfg.fractions, models, cfg.train, cfg.deadband);
  const fs::path dir = prepare_out(cfg);
  json cells = json::array();
  for (const ScarcityCell& c : r.cells)
    cells.push_back({{"fraction", c.fraction}, {"model", c.model}, {"macro_recall", c.macro_recall},
                     {"report", to_json(c.report)}});
  write_json(dir / "scarcity.json", cells);
  const std::string csv = scarcity_csv(r);
  write_text(dir / "scarcity.csv", csv);
  out << csv;
  return r.any_failed ? 1 : 0;
}

std::vector<Scene> load_target(const RunConfig& cfg, const std::string& path) {
  const fs::path p = path;
  if (fs::is_directory(p) && fs::exists(p / "test.jsonl")) return load_scenes(p / "test.jsonl", cfg.synth.max_vehicles);
  return load_scenes(p, cfg.synth.max_vehicles);
}

int cmd_transfer(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  cfg.train.validate();
  if (cfg.targets.empty()) throw ConfigError("transfer: no targets (--target name=path)");
  const auto train = load_split(cfg, "train");
  const GraphSet val = graphs_for(load_split(cfg, "val"), cfg.deadband, err);
  const GraphSet test = graphs_for(load_split(cfg, "test"), cfg.deadband, err);
  std::vector<std::pair<std::string, GraphSet>> targets;
  for (const auto& [name, path] : cfg.targets) targets.emplace_back(name, graphs_for(load_target(cfg, path), cfg.deadband, err));
  const TransferResult r = transfer_experiment(cfg.model, train, val, test, targets, cfg.train, cfg.deadband);
  const fs::path dir = prepare_out(cfg);
  json reports = json::array();
  std::string csv = report_csv(r.source);
  for (const EvalReport& t : r.targets) {
    reports.push_back(to_json(t));
    const std::string part = report_csv(t);
    csv += part.substr(part.find('\n') + 1);
  }
  write_json(dir / "transfer.json", {{"source", to_json(r.source)}, {"targets", reports}});
  write_text(dir / "transfer.csv", csv);
  char buf[160];
  std::snprintf(buf, sizeof buf, "source macro-F1 %.2f\n", r.source.mean.macro.f1);
  out << buf;
  for (const EvalReport& t : r.targets) {
    std::snprintf(buf, sizeof buf, "%s macro-F1 %.2f\n", t.split.c_str(), t.mean.macro.f1);
    out << buf;
  }
  return r.any_failed ? 1 : 0;
}

int cmd_attn(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Checkpoint ck = load_checkpoint(cfg);
  if (!ck.config.use_attention) throw ConfigError(cfg.checkpoint + ": not an attention model");
  const GraphSet split = graphs_for(load_split(cfg, cfg.eval_split), cfg.deadband, err);
  const AttentionSummary s = attention_summary(ck.params, ck.config, split.prepared);
  const fs::path dir = prepare_out(cfg);
  const std::string csv = attention_csv(s);
  write_text(dir / "attention.csv", csv);
  for (BehaviorClass c : kAllClasses)
    if (!s.present(c)) err << "warning: class " << to_string(c) << " never predicted; its row is nan\n";
  out << csv;
  return 0;
}

int cmd_gradcheck(const RunConfig& cfg, const std::string& variant, std::size_t nodes, double step, double tol,
                  std::ostream& out) {
  cfg.model.validate();
  std::vector<bool> variants;
  if (variant == "mrgcn" || variant == "both") variants.push_back(false);
  if (variant == "rel_att_gcn" || variant == "both") variants.push_back(true);
  const PreparedGraph g = prepare_graph(random_graph(cfg.model.seed, nodes, std::min<std::size_t>(2, nodes - 1)));
  bool ok = true;
  json reports = json::array();
  for (bool attention : variants) {
    ModelConfig m = cfg.model;
    m.use_attention = attention;
    const ModelGradCheck r = check_model_gradients(m, g, step, tol);
    ok = ok && r.report.passed;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s: max rel error %.3e over %zu entries (worst %s[%zu]) %s\n",
                  method_name(m).c_str(), r.report.max_rel_error, r.report.entries_checked,
                  r.report.worst_param.c_str(), r.report.worst_index, r.report.passed ? "PASS" : "FAIL");
    out << buf;
    reports.push_back({{"model", method_name(m)}, {"max_rel_error", r.report.max_rel_error},
                       {"entries", r.report.entries_checked}, {"worst_param", r.report.worst_param},
                       {"worst_index", r.report.worst_index}, {"analytic", r.report.analytic_at_worst},
                       {"numeric", r.report.numeric_at_worst}, {"redraws", r.redraws}, {"passed", r.report.passed}});
  }
  if (!cfg.out.empty()) write_json(prepare_out(cfg) / "gradcheck.json", reports);
  return ok ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"On-road behavior classification over interaction graphs", "roadbeh"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  // Flags are collected as overrides and applied on top of --config after parsing.
  std::vector<std::function<void(RunConfig&)>> overrides;
  auto later = [&](auto fn) { overrides.push_back(fn); };

  std::string config_path;
  app.add_option("--config", config_path, "RunConfig JSON file")->check(CLI::ExistingFile);
  app.add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) {
    later([s](RunConfig& c) { c.synth.seed = s; c.model.seed = s; });
  }, "Seed for the corpus and model streams");
  app.add_option_function<std::size_t>("--jobs", [&](std::size_t j) {
    later([j](RunConfig& c) { c.train.jobs = j; });
    if (j > 0) omp_set_num_threads(static_cast<int>(j));
  }, "Worker threads (scenes / seeds)");

  auto data_opt = [&](CLI::App* sub, const std::string& name, const std::string& help) {
    sub->add_option_function<std::string>(name, [&](const std::string& v) { later([v](RunConfig& c) { c.data = v; }); }, help);
  };
  auto out_opt = [&](CLI::App* sub) {
    sub->add_option_function<std::string>("--out", [&](const std::string& v) { later([v](RunConfig& c) { c.out = v; }); },
                                          "Output directory");
  };
  auto deadband_opt = [&](CLI::App* sub) {
    sub->add_option_function<double>("--deadband", [&](double v) { later([v](RunConfig& c) { c.deadband = v; }); },
                                     "Quadrant hysteresis in meters");
  };
  auto split_opt = [&](CLI::App* sub) {
    sub->add_option_function<std::string>("--split", [&](const std::string& v) {
      later([v](RunConfig& c) { c.eval_split = v; });
    }, "Split to evaluate (train, val, test)")->check(CLI::IsMember({"train", "val", "test"}));
  };
  auto checkpoint_opt = [&](CLI::App* sub) {
    sub->add_option_function<std::string>("--checkpoint", [&](const std::string& v) {
      later([v](RunConfig& c) { c.checkpoint = v; });
    }, "Checkpoint JSON");
  };
  std::set<std::string> model_given;
  auto model_opts = [&](CLI::App* sub) {
    sub->add_option_function<std::string>("--model", [&](const std::string& v) {
      model_given.insert("use_attention");
      later([v](RunConfig& c) { c.model.use_attention = v == "rel_att_gcn"; });
    }, "mrgcn or rel_att_gcn")->check(CLI::IsMember({"mrgcn", "rel_att_gcn"}));
    sub->add_option_function<std::vector<std::size_t>>("--layer-dims", [&](const std::vector<std::size_t>& v) {
      model_given.insert("layer_dims");
      later([v](RunConfig& c) { c.model.layer_dims = v; });
    }, "Comma-separated layer widths")->delimiter(',');
    sub->add_option_function<std::size_t>("--embedding-dim", [&](std::size_t v) {
      model_given.insert("embedding_dim");
      later([v](RunConfig& c) { c.model.embedding_dim = v; });
    }, "Entity embedding width");
    sub->add_option_function<std::size_t>("--heads", [&](std::size_t v) {
      model_given.insert("heads");
      later([v](RunConfig& c) { c.model.heads = v; });
    }, "Attention heads per layer");
    sub->add_flag_function("--no-skip", [&](std::int64_t) {
      model_given.insert("use_skip");
      later([](RunConfig& c) { c.model.use_skip = false; });
    }, "Disable skip connections");
  };
  auto train_opts = [&](CLI::App* sub) {
    sub->add_option_function<std::size_t>("--epochs", [&](std::size_t v) { later([v](RunConfig& c) { c.train.epochs = v; }); },
                                          "Maximum epochs");
    sub->add_option_function<double>("--lr", [&](double v) { later([v](RunConfig& c) { c.train.lr = v; }); }, "Learning rate");
    sub->add_option_function<std::size_t>("--patience", [&](std::size_t v) {
      later([v](RunConfig& c) { c.train.patience = v; });
    }, "Early-stopping patience in epochs");
    sub->add_option_function<std::vector<std::uint64_t>>("--seeds", [&](const std::vector<std::uint64_t>& v) {
      later([v](RunConfig& c) { c.train.seeds = v; });
    }, "Comma-separated training seeds")->delimiter(',');
    sub->add_option_function<double>("--label-fraction", [&](double v) {
      later([v](RunConfig& c) { c.train.label_fraction = v; });
    }, "Fraction of training labels kept per class");
  };

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic scene corpus with train/val/test splits");
  out_opt(synth);
  synth->add_option_function<std::size_t>("--scenes-per-class", [&](std::size_t v) {
    later([v](RunConfig& c) { c.synth.scenes_per_class = v; });
  }, "Scenes generated per behavior class");
  synth->add_option_function<std::size_t>("--frames", [&](std::size_t v) { later([v](RunConfig& c) { c.synth.frames = v; }); },
                                           "Frames per clip");
  synth->add_option_function<double>("--noise-sigma", [&](double v) {
    later([v](RunConfig& c) { c.synth.noise_sigma = {v, v}; });
  }, "Position noise in meters");
  synth->add_option_function<double>("--dropout", [&](double v) { later([v](RunConfig& c) { c.synth.dropout = {v, v}; }); },
                                     "Per-frame detection dropout probability");
  synth->add_option_function<std::vector<double>>("--split-ratios", [&](const std::vector<double>& v) {
    later([v](RunConfig& c) {
      if (v.size() != 3) throw ConfigError("--split-ratios takes train,val,test");
      c.split = {v[0], v[1], v[2]};
    });
  }, "train,val,test fractions")->delimiter(',');

  CLI::App* graph = app.add_subcommand("graph", "Build interaction graphs from scenes");
  data_opt(graph, "--in", "Scene file or directory");
  out_opt(graph);
  deadband_opt(graph);

  bool verbose = false;
  CLI::App* train = app.add_subcommand("train", "Train a model for every seed and report on the test split");
  data_opt(train, "--data", "Corpus directory from `synth`");
  out_opt(train);
  deadband_opt(train);
  model_opts(train);
  train_opts(train);
  train->add_flag("-v,--verbose", verbose, "Log every epoch to stderr");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  data_opt(eval, "--data", "Corpus directory or scene file");
  out_opt(eval);
  deadband_opt(eval);
  split_opt(eval);
  checkpoint_opt(eval);
  model_opts(eval);

  CLI::App* rules = app.add_subcommand("rules", "Evaluate the rule baseline");
  data_opt(rules, "--data", "Corpus directory or scene file");
  out_opt(rules);
  deadband_opt(rules);
  split_opt(rules);

  CLI::App* scarcity = app.add_subcommand("scarcity", "Recall of both models under reduced training labels");
  data_opt(scarcity, "--data", "Corpus directory from `synth`");
  out_opt(scarcity);
  deadband_opt(scarcity);
  model_opts(scarcity);
  train_opts(scarcity);
  scarcity->add_option_function<std::vector<double>>("--fractions", [&](const std::vector<double>& v) {
    later([v](RunConfig& c) { c.fractions = v; });
  }, "Comma-separated label fractions")->delimiter(',');

  CLI::App* transfer = app.add_subcommand("transfer", "Train on one corpus, evaluate on others");
  data_opt(transfer, "--data", "Source corpus directory");
  out_opt(transfer);
  deadband_opt(transfer);
  model_opts(transfer);
  train_opts(transfer);
  transfer->add_option_function<std::vector<std::string>>("--target", [&](const std::vector<std::string>& v) {
    later([v](RunConfig& c) {
      c.targets.clear();
      for (const std::string& t : v) {
        const auto eq = t.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--target expects name=path, got '" + t + "'");
        c.targets.emplace_back(t.substr(0, eq), t.substr(eq + 1));
      }
    });
  }, "Target corpus as name=path (repeatable)");

  CLI::App* attn = app.add_subcommand("attn", "Export the class by relation attention matrix");
  data_opt(attn, "--data", "Corpus directory or scene file");
  out_opt(attn);
  deadband_opt(attn);
  split_opt(attn);
  checkpoint_opt(attn);

  std::string variant = "both";
  std::size_t nodes = 6;
  double step = 1e-5, tol = 1e-4;
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of the model gradients");
  model_opts(gradcheck);
  out_opt(gradcheck);
  gradcheck->add_option("--variant", variant, "mrgcn, rel_att_gcn or both")
      ->check(CLI::IsMember({"mrgcn", "rel_att_gcn", "both"}));
  gradcheck->add_option("--nodes", nodes, "Nodes in the random graph")->check(CLI::Range(3, 64));
  gradcheck->add_option("--step", step, "Central-difference step");
  gradcheck->add_option("--tolerance", tol, "Maximum relative error");

  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();
  attach_env(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : run_config_from_json(read_json(config_path));
    for (auto& apply : overrides) apply(cfg);
    if (cfg.train.jobs > 0) omp_set_num_threads(static_cast<int>(cfg.train.jobs));

    if (synth->parsed()) return cmd_synth(cfg, out);
    if (graph->parsed()) return cmd_graph(cfg, out, err);
    if (train->parsed()) return cmd_train(cfg, verbose, out, err);
    if (eval->parsed()) return cmd_eval(cfg, model_given, out, err);
    if (rules->parsed()) return cmd_rules(cfg, out, err);
    if (scarcity->parsed()) return cmd_scarcity(cfg, out, err);
    if (transfer->parsed()) return cmd_transfer(cfg, out, err);
    if (attn->parsed()) return cmd_attn(cfg, out, err);
    if (gradcheck->parsed()) return cmd_gradcheck(cfg, variant, nodes, step, tol, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

}  // namespace roadbeh
