#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace ovalcert {

// State of one entry of the oval frame.
enum class Cell : std::uint8_t { Zero, One, Unknown };

// 1-based (line, point) coordinate of a frame entry.
struct CellRef {
  int row = 0;
  int col = 0;
  auto operator<=>(const CellRef&) const = default;
};

// Values for a subset of the Unknown cells of a frame.
using Assignment = std::map<CellRef, bool>;

struct FrameOptions {
  // Fix the first column of block 2 to the normalized first 1-factor
  // {1,3},{2,4},{5,6},{7,8},... and propagate the zeros it implies.
  bool pin_first_factor = true;
};

// The C(n+2,2) lines through pairs of points of a hypothetical oval of an
// even-order projective plane, as a partially fixed incidence matrix.
//
// Rows are the point pairs {a,b} of the oval in lexicographic order. Columns
// 1..n+2 are the oval points; the remaining n^2-1 columns are grouped in
// n+1 blocks of n-1 columns, block j holding the columns whose first One is
// on row j (the line {1, j+1}). Immutable after construction.
class OvalFrame {
 public:
  static OvalFrame build(int order, FrameOptions options = {});

  int order() const { return order_; }
  int num_points() const { return order_ * order_ + order_ + 1; }
  int oval_size() const { return order_ + 2; }
  int num_rows() const { return static_cast<int>(pairs_.size()); }
  int num_blocks() const { return order_ + 1; }
  int block_size() const { return order_ - 1; }
  // Number of Ones every non-oval column carries once completed.
  int column_weight() const { return (order_ + 2) / 2; }
  const FrameOptions& options() const { return options_; }

  Cell cell(int row, int col) const;
  Cell cell(CellRef ref) const { return cell(ref.row, ref.col); }

  std::pair<int, int> row_pair(int row) const;
  int row_of(int a, int b) const;

  bool is_oval_column(int col) const { return col >= 1 && col <= oval_size(); }
  // Block index of a non-oval column, 0 for oval columns.
  int block_of_column(int col) const;
  // Columns of block j in ascending order.
  std::vector<int> block_columns(int j) const;
  // Columns of blocks lo..hi in ascending order.
  std::vector<int> block_range_columns(int lo, int hi) const;
  std::vector<int> all_columns() const;

  // Rows holding a fixed One in the given column, ascending.
  std::vector<int> fixed_ones(int col) const;
  // Rows holding an Unknown entry in the given column, ascending.
  std::vector<int> unknown_rows(int col) const;
  int unknown_count(const std::vector<int>& cols) const;

  // Oval points spanned by block j's 1-factorization, ascending; position t
  // is the block's internal vertex t. Column i of the block (0-based) is the
  // factor containing the internal edge {0, i+1}.
  std::vector<int> block_points(int j) const;

  // Plain-text grid, one line per row, characters '0', '1' and '?'.
  std::string render(int rows, int cols) const;
  std::string render() const { return render(num_rows(), num_points()); }

 private:
  OvalFrame() = default;
  void check_cell(int row, int col) const;

  int order_ = 0;
  FrameOptions options_{};
  std::vector<std::pair<int, int>> pairs_;
  std::vector<std::vector<int>> row_index_;
  std::vector<Cell> cells_;  // row-major, zero-based
};

inline OvalFrame build_frame(int order, FrameOptions options = {}) {
  return OvalFrame::build(order, options);
}

enum class ViolationKind {
  DoubleIntersection,  // two columns share Ones on two rows
  ColumnOverweight,    // non-oval column with more than (n+2)/2 Ones
  MissingOvalIntersection,
};

struct Violation {
  ViolationKind kind;
  int col_a = 0;
  int col_b = 0;  // unused for ColumnOverweight
  std::vector<int> rows;
};

struct FrameVerdict {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Checks the frame's fixed entries together with the assignment. Throws
// std::invalid_argument if the assignment touches a cell that is not Unknown.
FrameVerdict validate_partial(const OvalFrame& frame, const Assignment& assignment);

// True when every Unknown cell of the column is assigned.
bool column_fully_assigned(const OvalFrame& frame, const Assignment& assignment, int col);

const char* to_string(ViolationKind kind);

}  // namespace ovalcert
