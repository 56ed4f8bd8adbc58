#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "ovalcert/geometry.hpp"

namespace ovalcert {

// Simple undirected graph with a color class per vertex.
class ColoredGraph {
 public:
  ColoredGraph() = default;
  explicit ColoredGraph(int vertex_count);

  int vertex_count() const { return n_; }
  std::size_t edge_count() const { return edges_; }

  // Ignores duplicate edges; rejects self-loops.
  void add_edge(int u, int v);
  bool has_edge(int u, int v) const;
  const std::vector<int>& neighbors(int v) const { return adj_[v]; }

  void set_color(int v, int color);
  int color(int v) const { return colors_[v]; }
  const std::vector<int>& colors() const { return colors_; }

  // Graph with vertex v renamed to perm[v].
  ColoredGraph permuted(const std::vector<int>& perm) const;

 private:
  int n_ = 0;
  std::size_t edges_ = 0;
  int words_ = 0;
  std::vector<std::vector<int>> adj_;
  std::vector<std::uint64_t> matrix_;
  std::vector<int> colors_;
};

// Total-order-comparable certificate of a colored graph up to
// color-preserving isomorphism: the color class sizes followed by the
// upper-triangle adjacency bitmap of the canonically relabeled graph.
struct CanonicalForm {
  std::vector<std::uint8_t> bytes;

  std::string hex() const;
  static CanonicalForm from_hex(const std::string& hex);
  auto operator<=>(const CanonicalForm&) const = default;
};

struct CanonOptions {
  int max_vertices = 128;
};

struct CanonResult {
  CanonicalForm form;
  std::uint64_t automorphisms = 1;
  // labeling[v] is the canonical position of vertex v.
  std::vector<int> labeling;
  std::size_t nodes = 0;
};

// Individualization-refinement search (equitable refinement, trace
// invariants, automorphism pruning). Throws std::invalid_argument for graphs
// above the vertex bound and std::overflow_error if the group order does not
// fit in 64 bits.
CanonResult canonicalize(const ColoredGraph& g, const CanonOptions& options = {});

inline CanonicalForm canonical_form(const ColoredGraph& g, const CanonOptions& options = {}) {
  return canonicalize(g, options).form;
}

inline std::uint64_t automorphism_count(const ColoredGraph& g, const CanonOptions& options = {}) {
  return canonicalize(g, options).automorphisms;
}

// Bipartite row/column incidence graph of the frame restricted to the oval
// columns plus `columns`. Row vertices come first (color 0), then the oval
// columns, then `columns` in the given order (all columns color 1). Every
// Unknown cell of a selected column must be assigned; std::invalid_argument
// otherwise.
ColoredGraph incidence_graph(const OvalFrame& frame, const std::vector<int>& columns,
                             const Assignment& assignment);

// Same graph from explicit One rows per selected column (column_ones[i]
// lists the rows of columns[i] holding a One).
ColoredGraph incidence_graph_from_rows(const OvalFrame& frame,
                                       const std::vector<std::vector<int>>& column_ones);

}  // namespace ovalcert
