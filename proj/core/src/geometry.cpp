#include "ovalcert/geometry.hpp"

#include <algorithm>
#include <iterator>
#include <stdexcept>
#include <string>

namespace ovalcert {

OvalFrame OvalFrame::build(int order, FrameOptions options) {
  if (order < 2 || order % 2 != 0) {
    throw std::invalid_argument("frame order must be even and at least 2, got " +
                                std::to_string(order));
  }
  OvalFrame f;
  f.order_ = order;
  f.options_ = options;
  const int p = f.oval_size();
  f.row_index_.assign(p + 1, std::vector<int>(p + 1, 0));
  for (int a = 1; a <= p; ++a) {
    for (int b = a + 1; b <= p; ++b) {
      f.pairs_.emplace_back(a, b);
      f.row_index_[a][b] = f.row_index_[b][a] = static_cast<int>(f.pairs_.size());
    }
  }
  const int rows = f.num_rows();
  const int cols = f.num_points();
  f.cells_.assign(static_cast<std::size_t>(rows) * cols, Cell::Unknown);
  auto at = [&](int r, int c) -> Cell& {
    return f.cells_[static_cast<std::size_t>(r - 1) * cols + (c - 1)];
  };

  for (int r = 1; r <= rows; ++r) {
    const auto [a, b] = f.pairs_[r - 1];
    for (int c = 1; c <= p; ++c) at(r, c) = (c == a || c == b) ? Cell::One : Cell::Zero;
  }

  // Fixed Ones of each non-oval column: the block line and the line through
  // the block's first remaining point and its i-th one.
  std::vector<std::vector<int>> ones(cols + 1);
  for (int j = 1; j <= f.num_blocks(); ++j) {
    const auto q = f.block_points(j);
    const auto bcols = f.block_columns(j);
    for (int i = 0; i < static_cast<int>(bcols.size()); ++i) {
      ones[bcols[i]] = {j, f.row_of(q[0], q[i + 1])};
    }
  }
  if (options.pin_first_factor && f.num_blocks() >= 2) {
    const auto q = f.block_points(2);
    const int c = f.block_columns(2).front();
    for (std::size_t t = 2; t + 1 < q.size(); t += 2) ones[c].push_back(f.row_of(q[t], q[t + 1]));
  }
  for (int c = p + 1; c <= cols; ++c) {
    std::sort(ones[c].begin(), ones[c].end());
    for (int r : ones[c]) at(r, c) = Cell::One;
  }

  // A One on {a,b} excludes every other line through a or b in that column.
  for (int c = p + 1; c <= cols; ++c) {
    std::vector<bool> covered(p + 1, false);
    for (int r : ones[c]) {
      covered[f.pairs_[r - 1].first] = covered[f.pairs_[r - 1].second] = true;
    }
    for (int r = 1; r <= rows; ++r) {
      if (at(r, c) == Cell::One) continue;
      const auto [a, b] = f.pairs_[r - 1];
      if (covered[a] || covered[b]) at(r, c) = Cell::Zero;
    }
  }
  // Two columns sharing a fixed One cannot share any other line.
  for (int c1 = p + 1; c1 <= cols; ++c1) {
    for (int c2 = p + 1; c2 <= cols; ++c2) {
      if (c1 == c2) continue;
      bool share = false;
      for (int r : ones[c1]) share = share || at(r, c2) == Cell::One;
      if (!share) continue;
      for (int r : ones[c1]) {
        if (at(r, c2) == Cell::Unknown) at(r, c2) = Cell::Zero;
      }
    }
  }
  return f;
}

void OvalFrame::check_cell(int row, int col) const {
  if (row < 1 || row > num_rows() || col < 1 || col > num_points()) {
    throw std::out_of_range("cell (" + std::to_string(row) + ", " + std::to_string(col) +
                            ") outside frame");
  }
}

Cell OvalFrame::cell(int row, int col) const {
  check_cell(row, col);
  return cells_[static_cast<std::size_t>(row - 1) * num_points() + (col - 1)];
}

std::pair<int, int> OvalFrame::row_pair(int row) const {
  if (row < 1 || row > num_rows()) throw std::out_of_range("row outside frame");
  return pairs_[row - 1];
}

int OvalFrame::row_of(int a, int b) const {
  if (a < 1 || b < 1 || a > oval_size() || b > oval_size() || a == b) {
    throw std::out_of_range("invalid oval point pair");
  }
  return row_index_[a][b];
}

int OvalFrame::block_of_column(int col) const {
  if (col < 1 || col > num_points()) throw std::out_of_range("column outside frame");
  if (is_oval_column(col)) return 0;
  return (col - oval_size() - 1) / block_size() + 1;
}

std::vector<int> OvalFrame::block_columns(int j) const {
  if (j < 1 || j > num_blocks()) {
    throw std::out_of_range("block index " + std::to_string(j) + " outside 1.." +
                            std::to_string(num_blocks()));
  }
  std::vector<int> out;
  const int first = oval_size() + (j - 1) * block_size() + 1;
  for (int i = 0; i < block_size(); ++i) out.push_back(first + i);
  return out;
}

std::vector<int> OvalFrame::block_range_columns(int lo, int hi) const {
  std::vector<int> out;
  for (int j = lo; j <= hi; ++j) {
    const auto b = block_columns(j);
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

std::vector<int> OvalFrame::all_columns() const { return block_range_columns(1, num_blocks()); }

std::vector<int> OvalFrame::fixed_ones(int col) const {
  std::vector<int> out;
  for (int r = 1; r <= num_rows(); ++r) {
    if (cell(r, col) == Cell::One) out.push_back(r);
  }
  return out;
}

std::vector<int> OvalFrame::unknown_rows(int col) const {
  std::vector<int> out;
  for (int r = 1; r <= num_rows(); ++r) {
    if (cell(r, col) == Cell::Unknown) out.push_back(r);
  }
  return out;
}

int OvalFrame::unknown_count(const std::vector<int>& cols) const {
  int total = 0;
  for (int c : cols) total += static_cast<int>(unknown_rows(c).size());
  return total;
}

std::vector<int> OvalFrame::block_points(int j) const {
  if (j < 1 || j > num_blocks()) throw std::out_of_range("block index outside frame");
  std::vector<int> q;
  for (int x = 2; x <= oval_size(); ++x) {
    if (x != j + 1) q.push_back(x);
  }
  return q;
}

std::string OvalFrame::render(int rows, int cols) const {
  rows = std::min(rows, num_rows());
  cols = std::min(cols, num_points());
  std::string out;
  out.reserve(static_cast<std::size_t>(rows) * (cols + 1));
  for (int r = 1; r <= rows; ++r) {
    for (int c = 1; c <= cols; ++c) {
      switch (cell(r, c)) {
        case Cell::Zero: out += '0'; break;
        case Cell::One: out += '1'; break;
        case Cell::Unknown: out += '?'; break;
      }
    }
    out += '\n';
  }
  return out;
}

bool column_fully_assigned(const OvalFrame& frame, const Assignment& assignment, int col) {
  for (int r : frame.unknown_rows(col)) {
    if (!assignment.contains(CellRef{r, col})) return false;
  }
  return true;
}

FrameVerdict validate_partial(const OvalFrame& frame, const Assignment& assignment) {
  const int cols = frame.num_points();
  std::vector<std::vector<int>> ones(cols + 1);
  for (int c = 1; c <= cols; ++c) ones[c] = frame.fixed_ones(c);
  for (const auto& [ref, value] : assignment) {
    if (frame.cell(ref) != Cell::Unknown) {
      throw std::invalid_argument("assignment touches fixed cell (" + std::to_string(ref.row) +
                                  ", " + std::to_string(ref.col) + ")");
    }
    if (value) ones[ref.col].push_back(ref.row);
  }
  for (auto& o : ones) std::sort(o.begin(), o.end());

  FrameVerdict verdict;
  for (int a = 1; a <= cols; ++a) {
    for (int b = a + 1; b <= cols; ++b) {
      std::vector<int> common;
      std::set_intersection(ones[a].begin(), ones[a].end(), ones[b].begin(), ones[b].end(),
                            std::back_inserter(common));
      if (common.size() >= 2) {
        verdict.violations.push_back({ViolationKind::DoubleIntersection, a, b, common});
      }
    }
  }
  for (int c = frame.oval_size() + 1; c <= cols; ++c) {
    if (static_cast<int>(ones[c].size()) > frame.column_weight()) {
      verdict.violations.push_back({ViolationKind::ColumnOverweight, c, 0, ones[c]});
    }
  }
  for (int c = frame.oval_size() + 1; c <= cols; ++c) {
    if (!column_fully_assigned(frame, assignment, c)) continue;
    for (int o = 1; o <= frame.oval_size(); ++o) {
      const bool meets = std::any_of(ones[c].begin(), ones[c].end(), [&](int r) {
        const auto [x, y] = frame.row_pair(r);
        return x == o || y == o;
      });
      if (!meets) verdict.violations.push_back({ViolationKind::MissingOvalIntersection, o, c, {}});
    }
  }
  return verdict;
}

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::DoubleIntersection: return "double-intersection";
    case ViolationKind::ColumnOverweight: return "column-overweight";
    case ViolationKind::MissingOvalIntersection: return "missing-oval-intersection";
  }
  return "unknown";
}

}  // namespace ovalcert
