#include "ovalcert/encoder.hpp"

#include <algorithm>
#include <iterator>
#include <stdexcept>
#include <string>

namespace ovalcert {

namespace {

std::uint64_t choose2(std::uint64_t x) { return x * (x - 1) / 2; }

// Per-cell view used while emitting: 0 false, 1 true, otherwise a variable.
struct CellTable {
  static constexpr int kFalse = 0;
  static constexpr int kTrue = -1;

  int rows = 0;
  int cols = 0;
  std::vector<int> value;  // zero-based row-major over all frame columns
  int at(int r, int c) const { return value[static_cast<std::size_t>(r - 1) * cols + (c - 1)]; }
  int& at(int r, int c) { return value[static_cast<std::size_t>(r - 1) * cols + (c - 1)]; }
};

std::string cell_name(CellRef c) {
  return "(" + std::to_string(c.row) + ", " + std::to_string(c.col) + ")";
}

}  // namespace

CnfInstance encode(const OvalFrame& frame, std::vector<int> columns, const EncodeOptions& options) {
  if (columns.empty()) throw std::invalid_argument("encode needs at least one column");
  std::sort(columns.begin(), columns.end());
  columns.erase(std::unique(columns.begin(), columns.end()), columns.end());
  for (int c : columns) {
    if (c < 1 || c > frame.num_points() || frame.is_oval_column(c)) {
      throw std::invalid_argument("column " + std::to_string(c) + " is not a non-oval column");
    }
  }
  const int rows = frame.num_rows();
  const int p = frame.oval_size();
  std::vector<char> selected(frame.num_points() + 1, 0);
  for (int c : columns) selected[c] = 1;
  for (const auto& [cell, value] : options.fixed) {
    if (frame.cell(cell) != Cell::Unknown) {
      throw std::invalid_argument("fixed cell " + cell_name(cell) + " is not Unknown in the frame");
    }
    if (!selected[cell.col]) throw std::invalid_argument("fixed cell outside the selected columns");
  }

  CnfInstance inst;
  inst.provenance.order = frame.order();
  inst.provenance.columns = columns;
  inst.provenance.simplify = options.simplify;

  CellTable t;
  t.rows = rows;
  t.cols = frame.num_points();
  t.value.assign(static_cast<std::size_t>(rows) * t.cols, CellTable::kFalse);
  auto constant = [&](CellRef cell) {
    auto it = options.fixed.find(cell);
    if (it != options.fixed.end()) return it->second ? CellTable::kTrue : CellTable::kFalse;
    const Cell s = frame.cell(cell);
    if (s == Cell::Unknown) return 1;  // placeholder for "variable"
    return s == Cell::One ? CellTable::kTrue : CellTable::kFalse;
  };
  for (int r = 1; r <= rows; ++r) {
    for (int c = 1; c <= p; ++c) t.at(r, c) = constant({r, c});
  }
  // Row-major numbering over the selected columns.
  for (int r = 1; r <= rows; ++r) {
    for (int c : columns) {
      const int k = constant({r, c});
      if (options.simplify) {
        t.at(r, c) = k == 1 ? inst.varmap.add({r, c}) : k;
      } else {
        t.at(r, c) = inst.varmap.add({r, c});
      }
    }
  }
  inst.var_count = inst.varmap.size();

  std::vector<Lit> clause;
  auto emit = [&](std::uint64_t& family) {
    if (clause.empty()) ++inst.empty_clauses;
    inst.clauses.add(clause);
    ++family;
  };

  if (!options.simplify) {
    for (int r = 1; r <= rows; ++r) {
      for (int c : columns) {
        const int v = t.at(r, c);
        const Cell s = frame.cell(r, c);
        if (s != Cell::Unknown) {
          clause = {s == Cell::One ? v : -v};
          emit(inst.counts.unit_fixes);
        } else if (auto it = options.fixed.find({r, c}); it != options.fixed.end()) {
          clause = {it->second ? v : -v};
          emit(inst.counts.block_fix);
        }
      }
    }
    inst.raw_counts.unit_fixes = inst.counts.unit_fixes;
    inst.raw_counts.block_fix = inst.counts.block_fix;
  }

  // Columns never share two rows. Only rows that can hold a One in both
  // columns produce a clause after substitution.
  std::vector<int> all(p);
  for (int c = 1; c <= p; ++c) all[c - 1] = c;
  all.insert(all.end(), columns.begin(), columns.end());
  std::vector<std::vector<int>> live(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (int r = 1; r <= rows; ++r) {
      if (t.at(r, all[i]) != CellTable::kFalse) live[i].push_back(r);
    }
  }
  std::vector<int> common;
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      common.clear();
      std::set_intersection(live[i].begin(), live[i].end(), live[j].begin(), live[j].end(),
                            std::back_inserter(common));
      for (std::size_t a = 0; a < common.size(); ++a) {
        for (std::size_t b = a + 1; b < common.size(); ++b) {
          clause.clear();
          for (int cell : {t.at(common[a], all[i]), t.at(common[b], all[i]),
                           t.at(common[a], all[j]), t.at(common[b], all[j])}) {
            if (cell > 0) clause.push_back(-cell);
          }
          emit(inst.counts.intersect_at_most_once);
        }
      }
    }
  }
  inst.raw_counts.intersect_at_most_once = choose2(all.size()) * choose2(rows);

  // Every selected column meets every oval column.
  for (int o = 1; o <= p; ++o) {
    for (int c : columns) {
      clause.clear();
      bool satisfied = false;
      for (int r = 1; r <= rows; ++r) {
        const auto [a, b] = frame.row_pair(r);
        if (a != o && b != o) continue;
        const int cell = t.at(r, c);
        if (cell == CellTable::kTrue) satisfied = true;
        if (cell > 0) clause.push_back(cell);
      }
      if (!satisfied) emit(inst.counts.oval_intersection);
    }
  }
  inst.raw_counts.oval_intersection = static_cast<std::uint64_t>(p) * columns.size();

  // Block line {1, i+1} meets each line through two of the points 3..n+2
  // avoiding i+1 in a column of block i.
  for (int i = 2; i <= frame.num_blocks(); ++i) {
    const auto bcols = frame.block_columns(i);
    if (!std::all_of(bcols.begin(), bcols.end(), [&](int c) { return selected[c] != 0; })) continue;
    for (int r = 1; r <= rows; ++r) {
      const auto [a, b] = frame.row_pair(r);
      if (a < 3 || a == i + 1 || b == i + 1) continue;
      ++inst.raw_counts.known_row_intersection;
      clause.clear();
      bool satisfied = false;
      for (int c : bcols) {
        const int cell = t.at(r, c);
        if (cell == CellTable::kTrue) satisfied = true;
        if (cell > 0) clause.push_back(cell);
      }
      if (!satisfied) emit(inst.counts.known_row_intersection);
    }
  }
  return inst;
}

Assignment block_cells(const OvalFrame& frame, int block, const OneFactorization& fz) {
  const auto points = frame.block_points(block);
  const auto cols = frame.block_columns(block);
  const int m = static_cast<int>(points.size());
  if (fz.vertex_count() != m) {
    throw std::invalid_argument("factorization has " + std::to_string(fz.vertex_count()) +
                                " vertices, block needs " + std::to_string(m));
  }
  std::vector<int> index(frame.oval_size() + 1, -1);
  for (int t = 0; t < m; ++t) index[points[t]] = t;
  Assignment out;
  for (int i = 0; i < static_cast<int>(cols.size()); ++i) {
    const OneFactor& f = fz.factor(i);
    if (f.mate(0) != i + 1) {
      throw std::invalid_argument("factor " + std::to_string(i + 1) + " does not contain the edge (" +
                                  std::to_string(points[0]) + "," + std::to_string(points[i + 1]) +
                                  ")");
    }
    for (int r = 1; r <= frame.num_rows(); ++r) {
      const auto [a, b] = frame.row_pair(r);
      bool one = r == block;
      if (index[a] >= 0 && index[b] >= 0) one = f.contains(index[a], index[b]);
      const Cell s = frame.cell(r, cols[i]);
      if (s == Cell::Unknown) {
        out[{r, cols[i]}] = one;
      } else if ((s == Cell::One) != one) {
        throw std::invalid_argument("factorization disagrees with fixed cell " +
                                    cell_name({r, cols[i]}));
      }
    }
  }
  return out;
}

CnfInstance fix_block(const OvalFrame& frame, const CnfInstance& instance, int block,
                      const OneFactorization& fz, int label) {
  const auto& prov = instance.provenance;
  if (prov.fixed_block != 0) throw std::invalid_argument("instance already has a fixed block");
  for (int c : frame.block_columns(block)) {
    if (!std::binary_search(prov.columns.begin(), prov.columns.end(), c)) {
      throw std::invalid_argument("block " + std::to_string(block) + " outside the instance");
    }
  }
  const Assignment cells = block_cells(frame, block, fz);
  CnfInstance out;
  if (prov.simplify) {
    out = encode(frame, prov.columns, EncodeOptions{true, cells});
  } else {
    out = instance;
    for (const auto& [cell, value] : cells) {
      const int v = out.varmap.var_of(cell);
      const Lit unit[] = {value ? v : -v};
      out.clauses.add(unit);
      ++out.counts.block_fix;
      ++out.raw_counts.block_fix;
    }
  }
  out.provenance.fixed_block = block;
  out.provenance.fixed_label = label;
  out.provenance.fixed_variables = static_cast<int>(cells.size());
  return out;
}

ExtensionInstance extension_instance(const OvalFrame& frame, const Assignment& completion,
                                     int first_block, int last_block, int extra_block,
                                     bool with_block_one) {
  if (first_block > last_block || last_block >= extra_block) {
    throw std::invalid_argument("extension needs first <= last < extra block");
  }
  const auto done = frame.block_range_columns(first_block, last_block);
  for (int c : done) {
    if (!column_fully_assigned(frame, completion, c)) {
      throw std::invalid_argument("completion leaves column " + std::to_string(c) + " unassigned");
    }
  }
  for (const auto& [cell, value] : completion) {
    if (!std::binary_search(done.begin(), done.end(), cell.col)) {
      throw std::invalid_argument("completion assigns cell " + cell_name(cell) +
                                  " outside the completed blocks");
    }
  }
  const FrameVerdict verdict = validate_partial(frame, completion);
  if (!verdict.ok()) {
    const auto& v = verdict.violations.front();
    throw std::invalid_argument(std::string("invalid completion: ") + to_string(v.kind) +
                                " at column " + std::to_string(v.col_a));
  }
  ExtensionInstance ext;
  auto columns = frame.block_range_columns(first_block, extra_block);
  if (with_block_one && first_block > 1) {
    const auto one = frame.block_columns(1);
    columns.insert(columns.begin(), one.begin(), one.end());
  }
  ext.instance = encode(frame, columns);
  for (const auto& [cell, value] : completion) {
    if (value) ext.cube.push_back(ext.instance.varmap.var_of(cell));
  }
  std::sort(ext.cube.begin(), ext.cube.end());
  return ext;
}

Assignment model_assignment(const OvalFrame& frame, const CnfInstance& instance,
                            const std::vector<bool>& model) {
  Assignment out;
  for (int v = 1; v <= instance.var_count; ++v) {
    const CellRef cell = instance.varmap.cell_of(v);
    if (frame.cell(cell) != Cell::Unknown) continue;
    out[cell] = v < static_cast<int>(model.size()) && model[v];
  }
  return out;
}

}  // namespace ovalcert
