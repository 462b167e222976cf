#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "matan/corpus.hpp"

namespace matan {

/// Undirected edge stored with first < second.
using Edge = std::pair<NodeId, NodeId>;

/// Compressed sparse row matrix over an n x n node space.
struct SparseMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr;  // n + 1 entries
  std::vector<NodeId> col;           // sorted within each row
  std::vector<double> val;

  std::span<const NodeId> row_cols(std::size_t r) const {
    return {col.data() + row_ptr[r], row_ptr[r + 1] - row_ptr[r]};
  }
  std::span<const double> row_vals(std::size_t r) const {
    return {val.data() + row_ptr[r], row_ptr[r + 1] - row_ptr[r]};
  }
  double at(std::size_t r, NodeId c) const;
  std::size_t nnz() const noexcept { return col.size(); }
};

/// Row-stochastic D^-1 A. Rows of isolated nodes stay empty.
SparseMatrix normalized_adjacency(const SparseMatrix& adjacency);

/// Simple undirected graph over the node-id space [0, n_nodes). `nodes` lists
/// the members (all ids for a full graph, a subset for an induced subgraph);
/// every edge endpoint is a member.
class Graph {
 public:
  Graph() = default;

  /// Canonicalizes edges to (min,max), drops self-loops and duplicates while
  /// keeping first-occurrence order. Throws InputError on out-of-range or
  /// non-member endpoints.
  static Graph from_edges(std::size_t n_nodes, const std::vector<Edge>& edges);
  static Graph from_edges(std::size_t n_nodes, const std::vector<Edge>& edges,
                          std::vector<NodeId> nodes);

  std::size_t n_nodes() const noexcept { return n_nodes_; }
  const std::vector<NodeId>& nodes() const noexcept { return nodes_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const SparseMatrix& adjacency() const noexcept { return adjacency_; }
  const SparseMatrix& norm_adjacency() const noexcept { return norm_adjacency_; }

  std::size_t degree(NodeId u) const { return adjacency_.row_ptr[u + 1] - adjacency_.row_ptr[u]; }
  std::span<const NodeId> neighbors(NodeId u) const { return adjacency_.row_cols(u); }
  bool has_edge(NodeId u, NodeId v) const;
  bool contains(NodeId u) const;

 private:
  std::size_t n_nodes_ = 0;
  std::vector<NodeId> nodes_;
  std::vector<char> member_;
  std::vector<Edge> edges_;
  SparseMatrix adjacency_;
  SparseMatrix norm_adjacency_;
};

struct EdgeLoadStats {
  std::size_t lines = 0;
  std::size_t unknown_ids = 0;  // lines skipped because an id is not in the corpus
  std::size_t self_loops = 0;
  std::size_t duplicates = 0;
};

/// Reads `<external-id>\t<external-id>` lines into an undirected graph over
/// the corpus nodes. Throws InputError when no edge survives.
Graph load_edges(const std::filesystem::path& path, const Corpus& corpus,
                 EdgeLoadStats* stats = nullptr);

}  // namespace matan
