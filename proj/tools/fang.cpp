#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fang/config.hpp"
#include "fang/pipeline.hpp"
#include "fang/synth.hpp"

namespace fs = std::filesystem;
using namespace fang;

namespace {

// Everything a subcommand may read: config file first, flags on top.
struct RunOptions {
  std::string config_file;
  std::string data_dir, entities, edges, embeddings, stop_words, out_dir, checkpoint;
  std::vector<std::string> overrides;  // key=value
  std::optional<std::uint64_t> seed;
  std::optional<double> train_frac;
  std::optional<int> epochs;
  std::optional<double> learning_rate;
  bool no_time = false, no_stance = false, no_prox = false;
  std::optional<std::size_t> articles, sources, users;
};

KeyValues gather(const RunOptions& o) {
  KeyValues kv;
  if (!o.config_file.empty()) kv = read_key_values(o.config_file);
  for (const auto& item : o.overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(ErrorCategory::Config, "--set expects key=value, got '" + item + "'");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  auto put = [&](const char* key, const std::string& v) {
    if (!v.empty()) kv[key] = v;
  };
  put("data", o.data_dir);
  put("entities", o.entities);
  put("edges", o.edges);
  put("embeddings", o.embeddings);
  put("stop_words", o.stop_words);
  put("out", o.out_dir);
  put("checkpoint", o.checkpoint);
  if (o.seed) kv["seed"] = std::to_string(*o.seed);
  if (o.train_frac) kv["train_frac"] = format_double(*o.train_frac);
  if (o.epochs) kv["epochs"] = std::to_string(*o.epochs);
  if (o.learning_rate) kv["learning_rate"] = format_double(*o.learning_rate);
  if (o.no_time) kv["disable_time"] = "true";
  if (o.no_stance) kv["disable_stance_loss"] = "true";
  if (o.no_prox) kv["disable_proximity_loss"] = "true";
  if (o.articles) kv["articles"] = std::to_string(*o.articles);
  if (o.sources) kv["sources"] = std::to_string(*o.sources);
  if (o.users) kv["users"] = std::to_string(*o.users);
  return kv;
}

std::string take(KeyValues& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) return {};
  std::string v = it->second;
  kv.erase(it);
  return v;
}

void reject_leftovers(const KeyValues& kv) {
  if (!kv.empty()) throw Error(ErrorCategory::Config, "unknown config key: " + kv.begin()->first);
}

fs::path require_file(const std::string& path, const char* what) {
  if (path.empty()) throw Error(ErrorCategory::Config, std::string("missing ") + what + " path");
  if (!fs::is_regular_file(path)) throw Error(ErrorCategory::Io, std::string(what) + " not found: " + path);
  return path;
}

DatasetPaths dataset_paths(KeyValues& kv) {
  const std::string data = take(kv, "data");
  DatasetPaths p;
  std::string entities = take(kv, "entities"), edges = take(kv, "edges"), emb = take(kv, "embeddings");
  if (!data.empty()) {
    const auto d = synth_paths(data);
    if (entities.empty()) entities = d.entities.string();
    if (edges.empty()) edges = d.edges.string();
    if (emb.empty() && fs::exists(d.embeddings)) emb = d.embeddings.string();
  }
  p.entities = require_file(entities, "entities");
  p.edges = require_file(edges, "edges");
  if (!emb.empty()) p.embeddings = require_file(emb, "embeddings");
  if (const std::string sw = take(kv, "stop_words"); !sw.empty()) p.stop_words = require_file(sw, "stop-word list");
  return p;
}

EvalOptions eval_options(KeyValues& kv) {
  EvalOptions o;
  if (std::string v = take(kv, "min_pts"); !v.empty()) o.min_pts = static_cast<int>(parse_int("min_pts", v));
  if (std::string v = take(kv, "max_eps"); !v.empty()) o.max_eps = parse_real("max_eps", v);
  if (std::string v = take(kv, "probe_folds"); !v.empty()) o.probe_folds = static_cast<int>(parse_int("probe_folds", v));
  if (std::string v = take(kv, "probe_l2"); !v.empty()) o.probe.l2 = parse_real("probe_l2", v);
  if (o.min_pts < 1 || !(o.max_eps > 0) || o.probe_folds < 2 || !(o.probe.l2 > 0))
    throw Error(ErrorCategory::Config, "invalid evaluation options");
  return o;
}

fs::path output_dir(KeyValues& kv) {
  const std::string out = take(kv, "out");
  if (out.empty()) throw Error(ErrorCategory::Config, "missing output directory (--out)");
  return out;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCategory::Io, "cannot create " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw Error(ErrorCategory::Io, "cannot write " + p.string());
  return f;
}

void print_summary(const GraphSummary& s) {
  std::cout << "articles " << s.articles << " (fake " << s.fake << ", real " << s.real << ", unlabeled " << s.unlabeled
            << ")\nsources " << s.sources << "\nusers " << s.users << "\nfollowership " << s.followership
            << "\ncitation " << s.citation << "\npublication " << s.publication << "\nstance " << s.stance
            << "\narticles without source " << s.articles_without_source << '\n';
}

int cmd_synth(const RunOptions& o) {
  KeyValues kv = gather(o);
  SynthConfig cfg;
  const fs::path out = output_dir(kv);
  apply_key_values(cfg, kv);
  reject_leftovers(kv);
  cfg.validate();
  const SynthPaths paths = write_synth(cfg, out);
  std::cout << "wrote " << paths.entities.string() << ", " << paths.edges.string() << ", "
            << paths.embeddings.string() << '\n';
  return 0;
}

int cmd_ingest_check(const RunOptions& o) {
  KeyValues kv = gather(o);
  const DatasetPaths paths = dataset_paths(kv);
  take(kv, "out");
  const SocialGraph g = load_graph(paths.entities, paths.edges);
  print_summary(summarize(g));
  return 0;
}

int cmd_train(const RunOptions& o) {
  KeyValues kv = gather(o);
  const DatasetPaths paths = dataset_paths(kv);
  const fs::path out = output_dir(kv);
  TrainConfig cfg;
  apply_key_values(cfg, kv);
  reject_leftovers(kv);
  cfg.validate();

  Dataset ds = load_dataset(paths, cfg.max_vocab);
  const DataSplit split = split_articles(ds.graph, cfg);
  const TrainingContext ctx = make_context(ds.graph, ds.space.features, cfg);
  std::cout << "labeled pool " << split.pool.size() << ", train " << split.train.size() << " (train_frac "
            << cfg.train_frac << "), test " << split.test.size() << '\n';
  make_dir(out);
  write_key_values(to_key_values(cfg), out / "config_resolved");
  const TrainResult r = train(ctx, split, [](const EpochLog& e) {
    std::cout << "epoch " << e.epoch << " total " << e.total << " val_auc " << e.val_auc << std::endl;
  });
  auto log = open_out(out / "train_log.csv");
  write_train_log(log, r.log);
  save_checkpoint(out / "checkpoint", r.params, to_key_values(cfg));
  return 0;
}

// Dataset plus the checkpoint's own training config.
struct Restored {
  Dataset data;
  TrainConfig cfg;
  ModelParams<double> params;
  EvalOptions eval;
  fs::path out;
};

Restored restore(const RunOptions& o) {
  KeyValues kv = gather(o);
  const DatasetPaths paths = dataset_paths(kv);
  Restored r;
  r.out = output_dir(kv);
  const fs::path ck = require_file(take(kv, "checkpoint"), "checkpoint");
  r.eval = eval_options(kv);
  Checkpoint checkpoint = load_checkpoint(ck);
  apply_key_values(r.cfg, checkpoint.config);
  apply_key_values(r.cfg, kv);  // flags and config file override the stored config
  reject_leftovers(kv);
  r.cfg.validate();
  r.params = std::move(checkpoint.params);
  r.data = load_dataset(paths, r.cfg.max_vocab);
  const ModelDims dims = dims_of(r.params);
  if (dims.input_dim != r.data.space.dim() || dims.dim != r.cfg.dim || dims.temporal_hidden != r.cfg.temporal_hidden ||
      dims.depth != static_cast<int>(r.cfg.fanouts.size()))
    throw Error(ErrorCategory::DimensionMismatch,
                "checkpoint dimensions (input " + std::to_string(dims.input_dim) + ", d " + std::to_string(dims.dim) +
                    ") do not match the dataset/config (input " + std::to_string(r.data.space.dim()) + ", d " +
                    std::to_string(r.cfg.dim) + ")");
  return r;
}

int cmd_eval(const RunOptions& o) {
  Restored r = restore(o);
  const TrainingContext ctx = make_context(r.data.graph, r.data.space.features, r.cfg);
  const DataSplit split = split_articles(r.data.graph, r.cfg);
  const Metrics m = evaluate_model(ctx, r.params, split, r.eval);
  const auto edges = default_windows();
  const TimeWindowProfile prof = attention_profile(ctx, r.params, r.data.graph.nodes_of_kind(NodeKind::Article), edges);
  make_dir(r.out);
  auto mf = open_out(r.out / "metrics.csv");
  write_metrics(mf, m);
  auto af = open_out(r.out / "attention_profile.csv");
  write_attention_profile(af, prof);
  write_metrics(std::cout, m);
  return 0;
}

int cmd_attention(const RunOptions& o) {
  Restored r = restore(o);
  const TrainingContext ctx = make_context(r.data.graph, r.data.space.features, r.cfg);
  const TimeWindowProfile prof =
      attention_profile(ctx, r.params, r.data.graph.nodes_of_kind(NodeKind::Article), default_windows());
  make_dir(r.out);
  auto af = open_out(r.out / "attention_profile.csv");
  write_attention_profile(af, prof);
  write_attention_profile(std::cout, prof);
  return 0;
}

int cmd_export_reps(const RunOptions& o) {
  Restored r = restore(o);
  const TrainingContext ctx = make_context(r.data.graph, r.data.space.features, r.cfg);
  const SourceRepresentations reps = export_source_representations(ctx, r.params);
  make_dir(r.out);
  auto full = open_out(r.out / "source_reps.csv");
  write_representations(full, r.data.graph, reps.sources, reps.full);
  auto base = open_out(r.out / "source_reps_baseline.csv");
  write_representations(base, r.data.graph, reps.sources, reps.baseline);
  std::cout << "exported " << reps.sources.size() << " sources (" << reps.full.rows() << " / " << reps.baseline.rows()
            << " dims)\n";
  return 0;
}

void common_io(CLI::App* sub, RunOptions& o) {
  sub->add_option("--config", o.config_file, "flat key = value config file");
  sub->add_option("--set", o.overrides, "override a config key (key=value)");
  sub->add_option("--data", o.data_dir, "directory with entities.jsonl, edges.jsonl, embeddings.txt");
  sub->add_option("--entities", o.entities, "entities file");
  sub->add_option("--edges", o.edges, "edges file");
  sub->add_option("--embeddings", o.embeddings, "word vectors");
  sub->add_option("--stop-words", o.stop_words, "stop-word list");
  sub->add_option("--out", o.out_dir, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Social-context fake news detection"};
  app.require_subcommand(1);
  RunOptions o;

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--config", o.config_file);
  synth->add_option("--set", o.overrides);
  synth->add_option("--out", o.out_dir, "output directory");
  synth->add_option("--seed", o.seed);
  synth->add_option("--articles", o.articles);
  synth->add_option("--sources", o.sources);
  synth->add_option("--users", o.users);

  auto* ingest = app.add_subcommand("ingest-check", "validate and summarize a dataset");
  common_io(ingest, o);

  auto* train_cmd = app.add_subcommand("train", "train a model");
  common_io(train_cmd, o);
  train_cmd->add_option("--seed", o.seed);
  train_cmd->add_option("--train-frac", o.train_frac, "labeled share of the training pool");
  train_cmd->add_option("--epochs", o.epochs);
  train_cmd->add_option("--learning-rate", o.learning_rate);
  train_cmd->add_flag("--no-time", o.no_time, "drop the engagement time feature");
  train_cmd->add_flag("--no-stance-loss", o.no_stance, "drop the stance objective");
  train_cmd->add_flag("--no-proximity-loss", o.no_prox, "drop the proximity objective");

  std::vector<CLI::App*> model_cmds{app.add_subcommand("eval", "evaluate a checkpoint"),
                                    app.add_subcommand("attention", "attention mass per time window"),
                                    app.add_subcommand("export-reps", "export source representations")};
  for (auto* sub : model_cmds) {
    common_io(sub, o);
    sub->add_option("--checkpoint", o.checkpoint, "checkpoint file");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (synth->parsed()) return cmd_synth(o);
    if (ingest->parsed()) return cmd_ingest_check(o);
    if (train_cmd->parsed()) return cmd_train(o);
    if (model_cmds[0]->parsed()) return cmd_eval(o);
    if (model_cmds[1]->parsed()) return cmd_attention(o);
    if (model_cmds[2]->parsed()) return cmd_export_reps(o);
  } catch (const Error& e) {
    std::cerr << "error[" << category_name(e.category()) << "] " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error[internal] " << e.what() << '\n';
    return 3;
  }
  return 1;
}
