#include "matan/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "matan/corpus.hpp"
#include "matan/error.hpp"
#include "matan/format.hpp"
#include "matan/evaluation.hpp"
#include "matan/glove.hpp"
#include "matan/graph.hpp"
#include "matan/kernels.hpp"
#include "matan/trainer.hpp"

namespace matan::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kSubcommands[] = {"prepare",   "train-glove", "train",
                                        "eval-edges", "eval-nodes",  "score"};

template <typename T>
std::vector<T> parse_list(const std::string& text, const std::string& what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    T v{};
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc{} || res.ptr != item.data() + item.size()) {
      throw CLI::ValidationError("--" + what, "invalid list element '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw CLI::ValidationError("--" + what, "empty list");
  return out;
}

struct Parser {
  CLI::App app{"MATAN: mutual attention link prediction for text-attributed networks", "matan"};
  RunConfig cfg;
  std::string config_path, fractions = "0.5", seeds = "1,2,3,4,5", pooling = "mean",
                           sampling = "uniform-edges";
  bool full_corpus = false;

  Parser() {
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.add_option("subcommand", cfg.subcommand,
                   "prepare | train-glove | train | eval-edges | eval-nodes | score")
        ->required()
        ->check(CLI::IsMember(std::vector<std::string>(std::begin(kSubcommands), std::end(kSubcommands))));
    app.add_option("--config", config_path, "flat key=value file; flags override it");

    app.add_option("--documents", cfg.documents, "documents file: <id>\\t<text> per line");
    app.add_option("--edges", cfg.edges, "edges file: <id>\\t<id> per line");
    app.add_option("--embeddings", cfg.embeddings, "word vectors file; skips GloVe training");
    app.add_option("--model", cfg.model, "model file (score)");
    app.add_option("--out", cfg.out, "output directory")->capture_default_str();

    app.add_option("--dim", cfg.dim, "GloVe / model dimension")->capture_default_str();
    app.add_option("--window", cfg.window, "co-occurrence window")->capture_default_str();
    app.add_option("--x-max", cfg.x_max, "GloVe weighting cutoff")->capture_default_str();
    app.add_option("--glove-epochs", cfg.glove_epochs)->capture_default_str();
    app.add_option("--glove-lr", cfg.glove_lr)->capture_default_str();
    app.add_option("--glove-seed", cfg.glove_seed)->capture_default_str();
    app.add_option("--min-count", cfg.min_count)->capture_default_str();
    app.add_option("--max-doc-len", cfg.max_doc_len)->capture_default_str();

    app.add_option("--k", cfg.k, "negatives per positive")->capture_default_str();
    app.add_option("--n-pairs", cfg.n_pairs, "positive pairs drawn")->capture_default_str();
    app.add_option("--lr", cfg.lr, "Adam learning rate")->capture_default_str();
    app.add_option("--batch-size", cfg.batch_size)->capture_default_str();
    app.add_option("--seed", cfg.seed, "seed for train, or the only seed of an eval")
        ->capture_default_str();
    app.add_option("--train-fraction", fractions, "comma-separated fractions")->capture_default_str();
    app.add_option("--seeds", seeds, "comma-separated evaluation seeds")->capture_default_str();
    app.add_flag("--full-corpus-embeddings", full_corpus,
                 "train word vectors on hidden documents too");
    app.add_option("--pooling", pooling, "mean | sum")->capture_default_str();
    app.add_option("--sampling", sampling, "uniform-edges | m-weighted")->capture_default_str();
    app.add_option("--threads", cfg.threads)->capture_default_str();
    app.add_option("--kernels", cfg.kernels, "auto | scalar | avx2")->capture_default_str();

    app.add_option("--u", cfg.u, "external id of the first document (score)");
    app.add_option("--v", cfg.v, "external id of the second document (score)");
  }
};

std::vector<std::string> with_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::vector<std::string> merged;
  for (auto& [key, value] : read_config_file(path)) {
    if (key == "config") throw InputError("config files cannot include other config files");
    // Echoed configs name the subcommand; the command line decides. Empty means unset.
    if (key == "subcommand" || value.empty()) continue;
    merged.push_back("--" + key + "=" + value);
  }
  merged.insert(merged.end(), args.begin(), args.end());
  return merged;
}

void require(const fs::path& p, const char* flag) {
  if (p.empty()) throw InputError(std::string("missing required flag ") + flag);
  if (!fs::exists(p)) throw InputError(std::string(flag) + ": no such file " + p.string());
}

GloveConfig glove_config(const RunConfig& c) {
  return {c.dim, c.glove_epochs, c.glove_lr, c.x_max, 0.75, c.glove_seed};
}

TrainConfig train_config(const RunConfig& c) {
  TrainConfig t;
  t.k = c.k;
  t.n_pairs = c.n_pairs;
  t.lr = c.lr;
  t.batch_size = c.batch_size;
  t.seed = c.seed;
  t.pooling = c.pooling;
  t.sampling = c.sampling;
  t.threads = c.threads;
  return t;
}

Corpus load_corpus(const RunConfig& c) {
  require(c.documents, "--documents");
  return load_documents(c.documents, c.min_count, c.max_doc_len);
}

Graph load_graph(const RunConfig& c, const Corpus& corpus, std::ostream& err) {
  require(c.edges, "--edges");
  EdgeLoadStats stats;
  Graph g = load_edges(c.edges, corpus, &stats);
  if (stats.unknown_ids > 0) {
    err << "warning: skipped " << stats.unknown_ids << " edge lines with unknown document ids\n";
  }
  return g;
}

EmbeddingTable load_vectors(const RunConfig& c, const Corpus& corpus, std::ostream& err) {
  require(c.embeddings, "--embeddings");
  EmbeddingLoadStats stats;
  EmbeddingTable t = load_embeddings(c.embeddings, corpus.vocab, &stats);
  if (stats.unknown_tokens > 0) {
    err << "warning: skipped " << stats.unknown_tokens << " embedding rows for unknown tokens\n";
  }
  return t;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

int cmd_prepare(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const Corpus corpus = load_corpus(c);
  EdgeLoadStats stats;
  require(c.edges, "--edges");
  const Graph graph = load_edges(c.edges, corpus, &stats);
  save_documents(corpus, c.out / "docs.tsv");
  {
    std::ofstream v(c.out / "vocab.tsv");
    v << "token_id\ttoken\tcount\n";
    for (std::size_t i = 0; i < corpus.vocab.size(); ++i) {
      v << i << '\t' << corpus.vocab.string_of(static_cast<TokenId>(i)) << '\t'
        << corpus.vocab.count(static_cast<TokenId>(i)) << '\n';
    }
  }
  {
    std::ofstream e(c.out / "edges.tsv");
    for (const auto& [a, b] : graph.edges()) {
      e << corpus.external_ids[a] << '\t' << corpus.external_ids[b] << '\n';
    }
  }
  std::size_t empty_docs = 0;
  for (const auto& d : corpus.docs) empty_docs += (d.size() == 1 && d[0] == kEmptyToken);
  if (stats.unknown_ids > 0) err << "warning: skipped " << stats.unknown_ids << " edge lines\n";
  out << "nodes=" << corpus.n_nodes() << " edges=" << graph.edges().size()
      << " vocab=" << corpus.vocab.size() << " empty_docs=" << empty_docs
      << " skipped_edge_lines=" << stats.unknown_ids << " self_loops=" << stats.self_loops
      << " duplicate_edges=" << stats.duplicates << '\n';
  return 0;
}

int cmd_train_glove(const RunConfig& c, std::ostream& out) {
  const Corpus corpus = load_corpus(c);
  GloveTrace trace;
  const EmbeddingTable table =
      train_glove(count_cooccurrences(corpus, c.window), glove_config(c), &trace);
  save_embeddings(table, corpus.vocab, c.out / "embeddings.txt");
  std::ofstream t(c.out / "glove_loss.tsv");
  t << "epoch\tmean_loss\n";
  for (std::size_t i = 0; i < trace.epoch_loss.size(); ++i) {
    t << i << '\t' << format_double(trace.epoch_loss[i]) << '\n';
  }
  out << "embeddings=" << (c.out / "embeddings.txt").string() << " vocab=" << table.vocab_size()
      << " dim=" << table.dim
      << " final_loss=" << (trace.epoch_loss.empty() ? 0.0 : trace.epoch_loss.back()) << '\n';
  return 0;
}

int cmd_train(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const Corpus corpus = load_corpus(c);
  const Graph graph = load_graph(c, corpus, err);
  EmbeddingTable emb;
  if (!c.embeddings.empty()) {
    emb = load_vectors(c, corpus, err);
  } else {
    emb = train_glove(count_cooccurrences(corpus, c.window), glove_config(c));
    save_embeddings(emb, corpus.vocab, c.out / "embeddings.txt");
  }
  const TrainResult r = train(corpus, graph, emb, train_config(c));
  save_model(r.params, c.out / "model.txt");
  save_trace(r.trace, c.out / "loss.tsv");
  out << "model=" << (c.out / "model.txt").string() << " batches=" << r.trace.losses.size()
      << " final_loss=" << (r.trace.losses.empty() ? 0.0 : r.trace.losses.back()) << '\n';
  return 0;
}

int cmd_eval(const RunConfig& c, Task task, std::ostream& out, std::ostream& err) {
  const Corpus corpus = load_corpus(c);
  const Graph graph = load_graph(c, corpus, err);
  ExperimentConfig ec;
  ec.window = c.window;
  ec.glove = glove_config(c);
  ec.train = train_config(c);
  ec.full_corpus_embeddings = c.full_corpus_embeddings;
  if (!c.embeddings.empty()) ec.embeddings = load_vectors(c, corpus, err);

  const auto rows = run_experiment(task, corpus, graph, c.train_fractions, c.seeds, ec);
  const auto summary = summarize(rows);
  write_results_tsv(rows, c.out / "results.tsv");
  write_means_tsv(summary, c.out / "means.tsv");
  if (summary.size() == 1) {
    out << "auc=" << fmt(summary[0].mean) << " std=" << fmt(summary[0].stddev)
        << " task=" << task_name(task) << " train_fraction=" << summary[0].train_fraction
        << " seeds=" << summary[0].n << '\n';
  } else {
    for (std::size_t i = 0; i < summary.size(); ++i) {
      out << (i ? " " : "") << "auc@" << summary[i].train_fraction << "=" << fmt(summary[i].mean);
    }
    out << " task=" << task_name(task) << '\n';
  }
  return 0;
}

int cmd_score(const RunConfig& c, std::ostream& out, std::ostream& err) {
  require(c.model, "--model");
  if (c.u.empty() || c.v.empty()) throw InputError("score needs --u and --v");
  const Corpus corpus = load_corpus(c);
  const EmbeddingTable emb = load_vectors(c, corpus, err);
  const ModelParams params = load_model(c.model);
  const DocMatrix du = DocMatrix::lookup(emb, corpus.docs[corpus.node(c.u)]);
  const DocMatrix dv = DocMatrix::lookup(emb, corpus.docs[corpus.node(c.v)]);
  out << format_double(pair_score(du, dv, params, c.pooling)) << '\n';
  return 0;
}

}  // namespace

RunConfig parse_args(const std::vector<std::string>& args) {
  Parser p;
  std::vector<std::string> merged = with_config(args);
  // CLI11 consumes a reversed argument vector.
  std::vector<std::string> rev(merged.rbegin(), merged.rend());
  p.app.parse(rev);

  RunConfig cfg = p.cfg;
  cfg.train_fractions = parse_list<double>(p.fractions, "train-fraction");
  if (p.app.count("--seed") > 0 && p.app.count("--seeds") == 0) {
    cfg.seeds = {cfg.seed};
  } else {
    cfg.seeds = parse_list<std::uint64_t>(p.seeds, "seeds");
  }
  cfg.full_corpus_embeddings = p.full_corpus;
  try {
    cfg.pooling = parse_pooling(p.pooling);
    cfg.sampling = parse_sampling(p.sampling);
  } catch (const InputError& e) {
    throw CLI::ValidationError(e.what());
  }
  return cfg;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_args(args);
  } catch (const CLI::CallForHelp&) {
    out << Parser().app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << Parser().app.help();
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    kernels::select_backend_by_name(cfg.kernels);
    fs::create_directories(cfg.out);
    {
      std::ofstream echo(cfg.out / "config.txt");
      echo << format_config(cfg);
      if (!echo) throw InputError("cannot write " + (cfg.out / "config.txt").string());
    }
    if (cfg.subcommand == "prepare") return cmd_prepare(cfg, out, err);
    if (cfg.subcommand == "train-glove") return cmd_train_glove(cfg, out);
    if (cfg.subcommand == "train") return cmd_train(cfg, out, err);
    if (cfg.subcommand == "eval-edges") return cmd_eval(cfg, Task::kEdgesHidden, out, err);
    if (cfg.subcommand == "eval-nodes") return cmd_eval(cfg, Task::kNodesHidden, out, err);
    return cmd_score(cfg, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace matan::cli
