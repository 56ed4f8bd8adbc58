#include "ovalcert/symmetry.hpp"

#include <stdexcept>

namespace ovalcert {

SymmetryBreaker::SymmetryBreaker(const OvalFrame& frame, const LabelTable& table,
                                 const CnfInstance& instance, std::vector<int> checked,
                                 int own_label)
    : table_(table), own_label_(own_label), checked_(std::move(checked)) {
  if (table.vertex_count() != frame.block_size() + 1) {
    throw std::invalid_argument("label table does not match the frame order");
  }
  for (int j : checked_) {
    const auto points = frame.block_points(j);
    std::vector<int> index(frame.oval_size() + 1, -1);
    for (std::size_t t = 0; t < points.size(); ++t) index[points[t]] = static_cast<int>(t);
    Block b;
    b.m = static_cast<int>(points.size());
    std::vector<int> vars;
    for (int col : frame.block_columns(j)) {
      Column c;
      for (int r = 1; r <= frame.num_rows(); ++r) {
        if (r == j) continue;
        const auto [x, y] = frame.row_pair(r);
        const Cell s = frame.cell(r, col);
        if (s == Cell::Zero) continue;
        if (index[x] < 0 || index[y] < 0) {
          throw std::invalid_argument("block column has a free cell on a line through the block line");
        }
        if (s == Cell::One) {
          c.fixed_edges.emplace_back(index[x], index[y]);
          continue;
        }
        const int v = instance.varmap.var_of({r, col});
        if (v == 0) throw std::invalid_argument("watched block has a cell without a variable");
        c.var_edges.push_back({v, {index[x], index[y]}});
        vars.push_back(v);
      }
      b.columns.push_back(std::move(c));
    }
    layout_.push_back(std::move(b));
    block_vars_.push_back(std::move(vars));
  }
}

int SymmetryBreaker::label_from_mates(const std::vector<std::vector<int>>& mates) const {
  const int k = static_cast<int>(mates.size());
  const int m = k == 0 ? 0 : static_cast<int>(mates[0].size());
  std::uint64_t mask = 0;
  int bit = 0;
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b, ++bit) {
      // Edge-disjointness is guaranteed by the at-most-once clauses for
      // assignments that survive propagation; a shared edge closes a 2-cycle
      // and reads as non-Hamiltonian.
      int len = 0;
      int u = 0;
      do {
        u = mates[b][mates[a][u]];
        len += 2;
      } while (u != 0 && len <= m);
      if (len == m && u == 0) mask |= std::uint64_t{1} << bit;
    }
  }
  if (auto it = cache_.find(mask); it != cache_.end()) return it->second;
  ++stats_.cache_misses;
  ColoredGraph g(k);
  bit = 0;
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b, ++bit) {
      if (mask >> bit & 1U) g.add_edge(a, b);
    }
  }
  const int label = table_.pessimistic(CyclePattern{canonical_form(g)});
  cache_.emplace(mask, label);
  return label;
}

void SymmetryBreaker::run(CallbackContext& ctx) {
  for (int i = 0; i < ctx.block_count(); ++i) {
    if (!ctx.block_assigned(i)) continue;
    ++stats_.checks;
    const int label = label_of(i, [&](int v) { return ctx.value(v); });
    if (label == 0) ++stats_.invalid;
    if (label >= own_label_) continue;
    std::vector<Lit> clause;
    for (int v : ctx.block(i)) {
      if (ctx.value(v) > 0) clause.push_back(-v);
    }
    ++stats_.blocked;
    ctx.emit(std::move(clause));
  }
}

Callback SymmetryBreaker::callback() {
  return [this](CallbackContext& ctx) { run(ctx); };
}

void SymmetryBreaker::attach(Solver& solver) { solver.set_callback(block_vars_, callback()); }

}  // namespace ovalcert
