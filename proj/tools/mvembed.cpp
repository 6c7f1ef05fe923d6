// Command-line front end: generate / analyze / train / train-plus / eval.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mvembed/analysis.hpp"
#include "mvembed/attention.hpp"
#include "mvembed/errors.hpp"
#include "mvembed/eval.hpp"
#include "mvembed/graph.hpp"
#include "mvembed/io.hpp"
#include "mvembed/log.hpp"
#include "mvembed/train.hpp"
#include "mvembed/walks.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mvembed;

namespace {

struct CommonOpts {
  std::vector<std::string> views;
  std::string labels;
  std::string out = ".";
  std::string node_ids = "names";  // or "indices"
  std::uint64_t seed = 42;
  int threads = 1;
};

struct TrainOpts {
  double alpha = 1.0, beta = 1.0, gamma = 1000.0;
  std::size_t dim = 128, negatives = 10;
  std::size_t walk_length = 10, walks_per_node = 5, window = 3;
  std::size_t epochs = 10;
  double lr = 0.01;
  std::string mode = "sampled";  // or "exact"
  std::string ablation = "none";  // none | no-c2 | no-c1c2
  std::string task = "node";      // node | pair
  std::string combiner = "hadamard";
  std::size_t folds = 5;
  std::size_t neg_ratio = 5;
};

void add_common_flags(CLI::App* cmd, CommonOpts& o, bool needs_views) {
  auto* v = cmd->add_option("--views", o.views,
                            "comma-separated edge-list files, one per view")
                ->delimiter(',');
  if (needs_views) v->required();
  cmd->add_option("--labels", o.labels, "label file (node<TAB>class)");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--node-ids", o.node_ids,
                  "node id handling: names (intern) or indices (strict)")
      ->check(CLI::IsMember({"names", "indices"}));
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--threads", o.threads, "worker threads (1 = deterministic)");
  // --config is declared on the root app; fallthrough lets it appear after
  // the subcommand name (e.g. `mvembed train --config run.cfg`).
  cmd->fallthrough();
}

void add_train_flags(CLI::App* cmd, TrainOpts& t) {
  cmd->add_option("--alpha", t.alpha, "first-order collaboration weight");
  cmd->add_option("--beta", t.beta, "second-order collaboration weight");
  cmd->add_option("--dim", t.dim, "total embedding dimension D");
  cmd->add_option("--negatives", t.negatives, "negative samples per pair");
  cmd->add_option("--walk-length", t.walk_length, "random-walk length");
  cmd->add_option("--walks-per-node", t.walks_per_node, "walks per node");
  cmd->add_option("--window", t.window, "context window size");
  cmd->add_option("--epochs", t.epochs, "training epochs");
  cmd->add_option("--lr", t.lr, "Adam learning rate");
  cmd->add_option("--mode", t.mode, "softmax handling")
      ->check(CLI::IsMember({"sampled", "exact"}));
  cmd->add_option("--ablation", t.ablation, "preset: none, no-c2, no-c1c2")
      ->check(CLI::IsMember({"none", "no-c2", "no-c1c2"}));
}

void apply_ablation(TrainOpts& t) {
  if (t.ablation == "no-c2") t.beta = 0;
  if (t.ablation == "no-c1c2") t.alpha = t.beta = 0;
}

MultiViewGraph load_views(const CommonOpts& o) {
  return load_graph(o.views, o.node_ids == "indices" ? NodeMapPolicy::Strict
                                                     : NodeMapPolicy::DenseReindex);
}

WalkConfig make_walk_config(const CommonOpts& o, const TrainOpts& t) {
  WalkConfig wc;
  wc.walk_length = t.walk_length;
  wc.walks_per_node = t.walks_per_node;
  wc.window = t.window;
  wc.seed = o.seed;
  wc.threads = o.threads;
  return wc;
}

TrainConfig make_train_config(const CommonOpts& o, const TrainOpts& t) {
  TrainConfig cfg;
  cfg.alpha = t.alpha;
  cfg.beta = t.beta;
  cfg.total_dim = t.dim;
  cfg.negatives = t.negatives;
  cfg.lr = t.lr;
  cfg.epochs = t.epochs;
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  return cfg;
}

void ensure_out_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out))
    throw InputError("cannot create output directory " + out);
}

// Every command writes one of these: resolved parameters, the seed, and a
// content hash per input file, enough to reproduce the run bit-exactly.
void write_manifest(const std::string& command, const CommonOpts& o,
                    const json& params) {
  json m;
  m["command"] = command;
  m["seed"] = o.seed;
  m["threads"] = o.threads;
  m["node_ids"] = o.node_ids;
  m["params"] = params;
  json inputs = json::object();
  for (const auto& p : o.views) inputs[p] = file_hash_hex(p);
  if (!o.labels.empty()) inputs[o.labels] = file_hash_hex(o.labels);
  m["inputs"] = inputs;
  std::ofstream f(o.out + "/manifest.json");
  if (!f) throw InputError("cannot write " + o.out + "/manifest.json");
  f << m.dump(2) << "\n";
}

json train_params(const TrainOpts& t) {
  return json{{"alpha", t.alpha},
              {"beta", t.beta},
              {"dim", t.dim},
              {"negatives", t.negatives},
              {"walk_length", t.walk_length},
              {"walks_per_node", t.walks_per_node},
              {"window", t.window},
              {"epochs", t.epochs},
              {"lr", t.lr},
              {"mode", t.mode},
              {"ablation", t.ablation}};
}

int cmd_generate(const CommonOpts& o, const SynthSpec& spec) {
  ensure_out_dir(o.out);
  auto r = generate_synthetic(spec);
  std::vector<std::string> paths;
  for (std::size_t v = 0; v < r.graph.num_views(); ++v)
    paths.push_back(o.out + "/view" + std::to_string(v + 1) + ".edges");
  write_edge_lists(r.graph, paths);
  std::ofstream lf(o.out + "/labels.tsv");
  if (!lf) throw InputError("cannot write " + o.out + "/labels.tsv");
  for (std::size_t i = 0; i < r.communities.size(); ++i)
    lf << i << '\t' << r.communities[i] << '\n';
  write_manifest("generate", o,
                 json{{"nodes", spec.num_nodes},
                      {"views", spec.num_views},
                      {"communities", spec.num_communities},
                      {"p_intra", spec.p_intra},
                      {"p_inter", spec.p_inter},
                      {"cross_copy", spec.cross_copy},
                      {"noise", spec.noise},
                      {"folds", spec.label_folds}});
  return 0;
}

int cmd_analyze(const CommonOpts& o) {
  auto g = load_views(o);
  ensure_out_dir(o.out);
  auto m = ratio_matrix(g);  // throws InputError on a single view
  write_ratio_csv(m, o.out + "/ratio.csv");
  write_ratio_summary_json(m, o.out + "/ratio_summary.json");
  write_manifest("analyze", o, json::object());
  return 0;
}

int cmd_train(const CommonOpts& o, TrainOpts t) {
  apply_ablation(t);
  auto g = load_views(o);
  ensure_out_dir(o.out);
  auto corpus = build_corpus(g, make_walk_config(o, t));
  auto cfg = make_train_config(o, t);
  TrainResult<double> r = t.mode == "exact" ? train_exact<double>(g, corpus, cfg)
                                            : train<double>(g, corpus, cfg);
  auto emb = aggregate(r.tables, g.node_names);
  write_embeddings_text(emb, o.out + "/embeddings.txt");
  write_loss_trace(r.trace, o.out + "/loss.csv");
  write_manifest("train", o, train_params(t));
  return 0;
}

int cmd_train_plus(const CommonOpts& o, TrainOpts t) {
  apply_ablation(t);
  if (o.labels.empty()) throw InputError("train-plus requires --labels");
  auto g = load_views(o);
  ensure_out_dir(o.out);
  auto kind = t.task == "pair" ? TaskKind::PairClass : TaskKind::NodeClass;
  auto labels = load_labels(o.labels, kind, g, t.folds, o.seed);
  auto corpus = build_corpus(g, make_walk_config(o, t));
  auto cfg = make_train_config(o, t);
  auto r = train_plus<double>(g, corpus, labels, cfg, t.gamma);
  write_embeddings_text(r.attention_embeddings, o.out + "/embeddings.txt");
  write_loss_trace(r.trace, o.out + "/loss.csv");
  {
    std::ofstream f(o.out + "/att_loss.csv");
    if (!f) throw InputError("cannot write " + o.out + "/att_loss.csv");
    f << "epoch,att_loss\n";
    for (std::size_t e = 0; e < r.att_trace.size(); ++e)
      f << e << ',' << r.att_trace[e] << '\n';
  }
  write_attention_report(g.node_names, r.weights, g.num_views(),
                         o.out + "/attention.csv");
  json params = train_params(t);
  params["gamma"] = t.gamma;
  params["task"] = t.task;
  params["folds"] = t.folds;
  write_manifest("train-plus", o, params);
  return 0;
}

int cmd_eval(const CommonOpts& o, TrainOpts t, const std::string& emb_path) {
  apply_ablation(t);
  if (o.labels.empty()) throw InputError("eval requires --labels");
  ensure_out_dir(o.out);

  FinalEmbeddings emb;
  LabelSet labels;
  auto kind = t.task == "pair" ? TaskKind::PairClass : TaskKind::NodeClass;
  if (!emb_path.empty()) {
    emb = read_embeddings_text(emb_path);
    MultiViewGraph name_only;
    name_only.num_nodes = emb.num_nodes;
    name_only.node_names = emb.node_names;
    for (NodeId i = 0; i < emb.num_nodes; ++i)
      name_only.node_index[emb.node_names[i]] = i;
    labels = load_labels(o.labels, kind, name_only, t.folds, o.seed);
  } else {
    if (o.views.empty())
      throw InputError("eval needs --embeddings or --views to train from");
    auto g = load_views(o);
    labels = load_labels(o.labels, kind, g, t.folds, o.seed);
    auto corpus = build_corpus(g, make_walk_config(o, t));
    auto r = train<double>(g, corpus, make_train_config(o, t));
    emb = aggregate(r.tables, g.node_names);
  }

  auto combiner = t.combiner == "concat" ? PairCombiner::Concat
                                         : PairCombiner::Hadamard;
  auto features = label_features(emb, labels, combiner);
  auto report = logistic_fit(features, labels.classes, labels.folds, t.folds);
  report.task = t.task == "pair" ? "pair-class" : "node-class";
  write_report_json(report, o.out + "/report.json");
  write_report_csv_row(report, o.out + "/report.csv");
  json params = train_params(t);
  params["task"] = t.task;
  params["combiner"] = t.combiner;
  params["folds"] = t.folds;
  if (!emb_path.empty()) params["embeddings"] = file_hash_hex(emb_path);
  write_manifest("eval", o, params);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-view network embedding toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "config file; keys live in a section named after the "
                 "subcommand, e.g. [train]");

  CommonOpts go, ao, to, po, eo;
  TrainOpts tt, pt, et;
  SynthSpec spec;
  std::string emb_path;

  auto* gen = app.add_subcommand("generate", "write a synthetic multi-view graph");
  add_common_flags(gen, go, false);
  gen->add_option("--nodes", spec.num_nodes, "node count");
  gen->add_option("--num-views", spec.num_views, "view count");
  gen->add_option("--communities", spec.num_communities, "community count");
  gen->add_option("--p-intra", spec.p_intra, "base intra-community edge prob");
  gen->add_option("--p-inter", spec.p_inter, "base inter-community edge prob");
  gen->add_option("--cross-copy", spec.cross_copy, "base-edge copy prob");
  gen->add_option("--noise", spec.noise, "independent edge prob in later views");
  gen->add_option("--folds", spec.label_folds, "label fold count");

  auto* ana = app.add_subcommand("analyze", "pairwise view co-occurrence ratios");
  add_common_flags(ana, ao, true);

  auto* tr = app.add_subcommand("train", "learn multi-view embeddings");
  add_common_flags(tr, to, true);
  add_train_flags(tr, tt);

  auto* tp = app.add_subcommand("train-plus", "joint embedding + attention");
  add_common_flags(tp, po, true);
  add_train_flags(tp, pt);
  tp->add_option("--gamma", pt.gamma, "supervision weight");
  tp->add_option("--task", pt.task, "node or pair labels")
      ->check(CLI::IsMember({"node", "pair"}));
  tp->add_option("--folds", pt.folds, "cross-validation folds");

  auto* ev = app.add_subcommand("eval", "cross-validated downstream evaluation");
  add_common_flags(ev, eo, false);
  add_train_flags(ev, et);
  ev->add_option("--embeddings", emb_path, "precomputed embedding file");
  ev->add_option("--task", et.task, "node or pair labels")
      ->check(CLI::IsMember({"node", "pair"}));
  ev->add_option("--combiner", et.combiner, "pair feature combiner")
      ->check(CLI::IsMember({"hadamard", "concat"}));
  ev->add_option("--folds", et.folds, "cross-validation folds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      spec.seed = go.seed;
      return cmd_generate(go, spec);
    }
    if (ana->parsed()) return cmd_analyze(ao);
    if (tr->parsed()) return cmd_train(to, tt);
    if (tp->parsed()) return cmd_train_plus(po, pt);
    if (ev->parsed()) return cmd_eval(eo, et, emb_path);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
