#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ovalcert/canon.hpp"
#include "ovalcert/geometry.hpp"

namespace ovalcert {

// Perfect matching of K_m on vertices 0..m-1, stored as a mate array.
class OneFactor {
 public:
  OneFactor() = default;
  explicit OneFactor(std::vector<int> mate);
  static OneFactor from_edges(int m, const std::vector<std::pair<int, int>>& edges);

  int vertex_count() const { return static_cast<int>(mate_.size()); }
  int mate(int v) const { return mate_[v]; }
  bool contains(int a, int b) const { return mate_[a] == b; }
  // Edges (a, b) with a < b, sorted.
  std::vector<std::pair<int, int>> edges() const;

  auto operator<=>(const OneFactor&) const = default;

 private:
  std::vector<int> mate_;
};

// Ordered list of m-1 pairwise edge-disjoint perfect matchings covering K_m.
class OneFactorization {
 public:
  OneFactorization() = default;
  // Throws std::invalid_argument if the factors do not partition K_m.
  OneFactorization(int m, std::vector<OneFactor> factors);

  int vertex_count() const { return m_; }
  const std::vector<OneFactor>& factors() const { return factors_; }
  const OneFactor& factor(int i) const { return factors_[i]; }

  // Same factor set with factor i moved to the position of the factor that
  // contains the edge {0, i+1}.
  OneFactorization sorted_by_vertex_zero() const;

 private:
  int m_ = 0;
  std::vector<OneFactor> factors_;
};

// Multiset of cycle lengths of the union of two disjoint perfect matchings.
using CycleType = std::vector<int>;

// Throws std::invalid_argument for matchings with a common edge or of
// different size.
CycleType cycle_type(const OneFactor& f1, const OneFactor& f2);
bool is_hamiltonian_pair(const OneFactor& f1, const OneFactor& f2);

// All perfect matchings of K_m (2 <= m <= 12), lexicographic by mate array.
std::vector<OneFactor> enumerate_perfect_matchings(int m);

// The normalized first factor {0,1},{2,3},...,{m-2,m-1}.
OneFactor normalized_first_factor(int m);

// Points-edges-factors incidence graph used for isomorphism testing of
// partial or complete factorizations. Factors may be fewer than m-1.
ColoredGraph factorization_graph(int m, const std::vector<OneFactor>& factors);
CanonicalForm factorization_form(int m, const std::vector<OneFactor>& factors);

// Incidence graph of the oval columns plus the factorization placed as a
// block: rows are the lines of K_{m+2}, the block's line is {m, m+1}.
ColoredGraph block_incidence_graph(const OneFactorization& fz);

struct EnumerationStats {
  std::size_t completions = 0;       // labeled extensions examined
  std::vector<std::size_t> level_classes;  // classes per partial-factor level
};

// One representative per isomorphism class of 1-factorizations of K_m
// (2 <= m <= 10), each with the normalized first factor and its factors
// sorted by the mate of vertex 0. Output is sorted by canonical form.
std::vector<OneFactorization> enumerate_nonisomorphic_factorizations(
    int m, EnumerationStats* stats = nullptr);

// Representatives of the isomorphism classes of (first, second) factor
// pairs with the first factor normalized.
std::vector<std::pair<OneFactor, OneFactor>> second_factor_classes(int m);

// Number of labeled 1-factorizations of K_m containing the normalized first
// factor (brute force).
std::uint64_t count_labeled_extensions(int m);

// Cycle pattern: canonical form of the graph on the factors where two
// factors are adjacent when their union is a Hamiltonian cycle.
struct CyclePattern {
  CanonicalForm form;
  auto operator<=>(const CyclePattern&) const = default;
};

ColoredGraph cycle_pattern_graph(const OneFactorization& fz);
CyclePattern cycle_pattern(const OneFactorization& fz);

struct LabelEntry {
  int label = 0;
  std::uint64_t automorphisms = 0;
  CyclePattern pattern;
  CanonicalForm form;
  OneFactorization factorization;
};

// Symmetry-breaking labels: ascending stabilizer order, patterns contiguous
// among equal orders, canonical form as final tie-break.
class LabelTable {
 public:
  LabelTable() = default;
  explicit LabelTable(std::vector<LabelEntry> entries);

  int size() const { return static_cast<int>(entries_.size()); }
  int vertex_count() const { return m_; }
  const std::vector<LabelEntry>& entries() const { return entries_; }
  const LabelEntry& entry(int label) const { return entries_.at(label - 1); }

  // Largest label carrying the pattern, or 0 if no class has it.
  int pessimistic(const CyclePattern& pattern) const;
  const std::map<CyclePattern, int>& pessimistic_map() const { return pessimistic_; }
  // Label of the class isomorphic to fz, or 0.
  int label_of(const OneFactorization& fz) const;

  void write(std::ostream& out) const;
  static LabelTable read(std::istream& in);

 private:
  int m_ = 0;
  std::vector<LabelEntry> entries_;
  std::map<CyclePattern, int> pessimistic_;
  std::map<CanonicalForm, int> by_form_;
};

// Throws std::invalid_argument on duplicate isomorphism classes.
LabelTable build_label_table(const std::vector<OneFactorization>& fzs);

// Factorization formed by block j of a completed assignment, with the block
// line dropped and points renamed to internal vertices.
OneFactorization block_factorization(const OvalFrame& frame, int block,
                                     const Assignment& assignment);

// Pessimistic label of a completed block. Throws std::invalid_argument for
// incomplete or malformed blocks and std::out_of_range for patterns absent
// from the table.
int label_of_assigned_block(const OvalFrame& frame, int block, const Assignment& assignment,
                            const LabelTable& table);

std::string format_factorization(const OneFactorization& fz);
OneFactorization parse_factorization(int m, const std::string& text);

}  // namespace ovalcert
