// Cora reproduction checks. Needs documents.tsv and edges.tsv converted from the
// LINQS distribution (see tools/convert_cora.py). Exits 77 when they are absent.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>

#include "matan/evaluation.hpp"
#include "matan/format.hpp"

namespace {

using namespace matan;

constexpr int kSkip = 77;
constexpr std::size_t kCoraNodes = 2708;
constexpr std::size_t kCoraEdges = 5278;
constexpr double kEdges50 = 0.85, kEdges10 = 0.75;
constexpr double kNodes50 = 0.70, kNodes10 = 0.60;
constexpr double kTrendSlack = 0.02;

void line(bool pass, const std::string& id, const std::string& text) {
  std::printf("%s [%s] %s\n", pass ? "PASS" : "FAIL", id.c_str(), text.c_str());
  std::fflush(stdout);
}

std::map<double, double> means(Task task, const Corpus& corpus, const Graph& graph,
                               const std::vector<double>& fractions, const ExperimentConfig& cfg) {
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = run_experiment(task, corpus, graph, fractions, seeds, cfg);
  std::map<double, double> out;
  for (const auto& s : summarize(rows)) {
    out[s.train_fraction] = s.mean;
    std::printf("  %s train_fraction=%s mean_auc=%s std=%s\n", task_name(task).c_str(),
                format_double(s.train_fraction).c_str(), format_double(s.mean).c_str(),
                format_double(s.stddev).c_str());
  }
  std::printf("  (%.0fs)\n",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cora reproduction acceptance checks"};
  std::string dir;
  unsigned threads = 1;
  app.add_option("--cora-dir", dir, "directory holding documents.tsv and edges.tsv");
  app.add_option("--threads", threads, "worker threads for training and scoring");
  CLI11_PARSE(app, argc, argv);

  const std::filesystem::path docs = std::filesystem::path(dir) / "documents.tsv";
  const std::filesystem::path edges = std::filesystem::path(dir) / "edges.tsv";
  if (dir.empty() || !std::filesystem::exists(docs) || !std::filesystem::exists(edges)) {
    const std::string why = dir.empty() ? "no --cora-dir given" : "no converted Cora files in " + dir;
    for (const char* id : {"data", "6", "7", "8"}) std::printf("SKIP [%s] %s\n", id, why.c_str());
    return kSkip;
  }

  bool ok = true;
  const Corpus corpus = load_documents(docs);
  const Graph graph = load_edges(edges, corpus);
  {
    const bool pass = corpus.n_nodes() == kCoraNodes && graph.edges().size() == kCoraEdges;
    line(pass, "data", "nodes=" + std::to_string(corpus.n_nodes()) + " (expect 2708), edges=" +
                           std::to_string(graph.edges().size()) + " (expect 5278)");
    ok = ok && pass;
  }

  ExperimentConfig cfg;  // library defaults throughout
  cfg.train.threads = threads;

  const auto e = means(Task::kEdgesHidden, corpus, graph, {0.1, 0.2, 0.3, 0.4, 0.5}, cfg);
  {
    const bool pass = e.at(0.5) >= kEdges50 && e.at(0.1) >= kEdges10;
    line(pass, "6", "edges-hidden mean AUC 50%=" + format_double(e.at(0.5)) + " (>= 0.85), 10%=" +
                        format_double(e.at(0.1)) + " (>= 0.75)");
    ok = ok && pass;
  }

  ExperimentConfig leak = cfg;
  leak.full_corpus_embeddings = true;
  const auto n = means(Task::kNodesHidden, corpus, graph, {0.1, 0.5}, leak);
  {
    const bool pass = n.at(0.5) >= kNodes50 && n.at(0.1) >= kNodes10;
    line(pass, "7", "nodes-hidden mean AUC 50%=" + format_double(n.at(0.5)) + " (>= 0.70), 10%=" +
                        format_double(n.at(0.1)) + " (>= 0.60)");
    ok = ok && pass;
  }

  {
    bool pass = true;
    double prev = -1.0;
    std::string trend;
    for (const auto& [f, m] : e) {
      pass = pass && m >= prev - kTrendSlack;
      prev = m;
      trend += " " + format_double(m);
    }
    line(pass, "8", "edges-hidden means over 10..50%:" + trend + " (non-decreasing, slack 0.02)");
    ok = ok && pass;
  }
  return ok ? 0 : 1;
}
