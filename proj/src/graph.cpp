#include "matan/graph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <string>
#include <unordered_set>

#include "matan/error.hpp"

namespace matan {
namespace {

std::uint64_t edge_key(NodeId a, NodeId b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

std::vector<Edge> canonical_edges(const std::vector<Edge>& edges, std::size_t* self_loops,
                                  std::size_t* duplicates) {
  std::vector<Edge> out;
  out.reserve(edges.size());
  std::unordered_set<std::uint64_t> seen;
  for (auto [a, b] : edges) {
    if (a == b) {
      if (self_loops) ++*self_loops;
      continue;
    }
    if (a > b) std::swap(a, b);
    if (!seen.insert(edge_key(a, b)).second) {
      if (duplicates) ++*duplicates;
      continue;
    }
    out.emplace_back(a, b);
  }
  return out;
}

}  // namespace

double SparseMatrix::at(std::size_t r, NodeId c) const {
  const auto cols = row_cols(r);
  const auto it = std::lower_bound(cols.begin(), cols.end(), c);
  if (it == cols.end() || *it != c) return 0.0;
  return val[row_ptr[r] + static_cast<std::size_t>(it - cols.begin())];
}

SparseMatrix normalized_adjacency(const SparseMatrix& adjacency) {
  SparseMatrix m = adjacency;
  for (std::size_t r = 0; r < m.n; ++r) {
    double sum = 0.0;
    for (std::size_t i = m.row_ptr[r]; i < m.row_ptr[r + 1]; ++i) sum += m.val[i];
    if (sum == 0.0) continue;
    for (std::size_t i = m.row_ptr[r]; i < m.row_ptr[r + 1]; ++i) m.val[i] /= sum;
  }
  return m;
}

Graph Graph::from_edges(std::size_t n_nodes, const std::vector<Edge>& edges) {
  std::vector<NodeId> all(n_nodes);
  std::iota(all.begin(), all.end(), NodeId{0});
  return from_edges(n_nodes, edges, std::move(all));
}

Graph Graph::from_edges(std::size_t n_nodes, const std::vector<Edge>& edges,
                        std::vector<NodeId> nodes) {
  Graph g;
  g.n_nodes_ = n_nodes;
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  g.member_.assign(n_nodes, 0);
  for (NodeId u : nodes) {
    if (u >= n_nodes) throw InputError("graph node id out of range");
    g.member_[u] = 1;
  }
  g.nodes_ = std::move(nodes);
  g.edges_ = canonical_edges(edges, nullptr, nullptr);
  for (const auto& [a, b] : g.edges_) {
    if (b >= n_nodes) throw InputError("edge endpoint out of range");
    if (!g.member_[a] || !g.member_[b]) throw InputError("edge endpoint is not a graph member");
  }

  SparseMatrix& adj = g.adjacency_;
  adj.n = n_nodes;
  adj.row_ptr.assign(n_nodes + 1, 0);
  for (const auto& [a, b] : g.edges_) {
    ++adj.row_ptr[a + 1];
    ++adj.row_ptr[b + 1];
  }
  std::partial_sum(adj.row_ptr.begin(), adj.row_ptr.end(), adj.row_ptr.begin());
  adj.col.resize(adj.row_ptr.back());
  adj.val.assign(adj.row_ptr.back(), 1.0);
  std::vector<std::size_t> fill(adj.row_ptr.begin(), adj.row_ptr.end() - 1);
  for (const auto& [a, b] : g.edges_) {
    adj.col[fill[a]++] = b;
    adj.col[fill[b]++] = a;
  }
  for (std::size_t r = 0; r < n_nodes; ++r) {
    std::sort(adj.col.begin() + static_cast<std::ptrdiff_t>(adj.row_ptr[r]),
              adj.col.begin() + static_cast<std::ptrdiff_t>(adj.row_ptr[r + 1]));
  }
  g.norm_adjacency_ = normalized_adjacency(adj);
  return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  if (u >= n_nodes_ || v >= n_nodes_) return false;
  const auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

bool Graph::contains(NodeId u) const { return u < n_nodes_ && member_[u]; }

Graph load_edges(const std::filesystem::path& path, const Corpus& corpus, EdgeLoadStats* stats) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open edges file " + path.string());
  EdgeLoadStats local;
  std::vector<Edge> raw;
  std::string line;
  while (std::getline(in, line)) {
    ++local.lines;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(path.string(), local.lines, "expected <id>\\t<id>");
    }
    const auto a = corpus.node_of.find(line.substr(0, tab));
    const auto b = corpus.node_of.find(line.substr(tab + 1));
    if (a == corpus.node_of.end() || b == corpus.node_of.end()) {
      ++local.unknown_ids;
      continue;
    }
    raw.emplace_back(a->second, b->second);
  }
  const auto edges = canonical_edges(raw, &local.self_loops, &local.duplicates);
  if (stats) *stats = local;
  if (edges.empty()) {
    throw InputError("no usable edges in " + path.string() +
                     " (nothing to train on; " + std::to_string(local.unknown_ids) +
                     " lines had unknown ids, " + std::to_string(local.self_loops) +
                     " were self-loops)");
  }
  return Graph::from_edges(corpus.n_nodes(), edges);
}

}  // namespace matan
