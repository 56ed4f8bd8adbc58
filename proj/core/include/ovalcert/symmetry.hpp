#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "ovalcert/cnf.hpp"
#include "ovalcert/geometry.hpp"
#include "ovalcert/onefact.hpp"
#include "ovalcert/solver.hpp"

namespace ovalcert {

// Watches completed blocks and blocks every completion whose pessimistic
// label is below the label of the fixed block. Blocking clauses negate the
// block's true cells. Shares only immutable data between instances; one
// breaker per solver.
class SymmetryBreaker {
 public:
  // `checked` lists the blocks to watch (all must be in the instance);
  // `own_label` is the label of the fixed block.
  SymmetryBreaker(const OvalFrame& frame, const LabelTable& table, const CnfInstance& instance,
                  std::vector<int> checked, int own_label);

  // Variable sets of the watched blocks, in `checked` order.
  const std::vector<std::vector<int>>& blocks() const { return block_vars_; }
  const std::vector<int>& checked() const { return checked_; }
  Callback callback();
  void attach(Solver& solver);

  // Pessimistic label of watched block `index` under a variable lookup; 0
  // when the block is not a 1-factorization or its pattern is unknown.
  template <typename Value>
  int label_of(int index, Value&& value) const;

  struct Stats {
    std::uint64_t checks = 0;
    std::uint64_t blocked = 0;
    std::uint64_t invalid = 0;
    std::uint64_t cache_misses = 0;
  };
  const Stats& stats() const { return stats_; }

 private:
  struct Column {
    std::vector<std::pair<int, int>> fixed_edges;  // internal vertex pairs
    std::vector<std::pair<int, std::pair<int, int>>> var_edges;  // var, pair
  };
  struct Block {
    int m = 0;
    std::vector<Column> columns;
  };

  int label_from_mates(const std::vector<std::vector<int>>& mates) const;
  void run(CallbackContext& ctx);

  const LabelTable& table_;
  int own_label_;
  std::vector<int> checked_;
  std::vector<Block> layout_;
  std::vector<std::vector<int>> block_vars_;
  mutable std::unordered_map<std::uint64_t, int> cache_;
  mutable Stats stats_;
};

template <typename Value>
int SymmetryBreaker::label_of(int index, Value&& value) const {
  const Block& b = layout_.at(index);
  std::vector<std::vector<int>> mates(b.columns.size(), std::vector<int>(b.m, -1));
  for (std::size_t k = 0; k < b.columns.size(); ++k) {
    auto& mate = mates[k];
    auto put = [&](int a, int c) {
      if (mate[a] != -1 || mate[c] != -1) return false;
      mate[a] = c;
      mate[c] = a;
      return true;
    };
    for (auto [a, c] : b.columns[k].fixed_edges) {
      if (!put(a, c)) return 0;
    }
    for (const auto& [var, edge] : b.columns[k].var_edges) {
      if (value(var) > 0 && !put(edge.first, edge.second)) return 0;
    }
    for (int v : mate) {
      if (v < 0) return 0;
    }
  }
  return label_from_mates(mates);
}

}  // namespace ovalcert
