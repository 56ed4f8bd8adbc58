#include <gtest/gtest.h>

#include <sstream>
#include <stdexcept>

#include "ovalcert/cnf.hpp"
#include "ovalcert/encoder.hpp"
#include "ovalcert/geometry.hpp"
#include "ovalcert/solver.hpp"

using namespace ovalcert;

namespace {

int binom2(int x) { return x * (x - 1) / 2; }

Assignment solved_frame(int n) {
  const OvalFrame frame = build_frame(n);
  const CnfInstance inst = encode(frame, frame.all_columns());
  const SolveResult r = solve(inst);
  EXPECT_EQ(r.status, Status::Satisfiable);
  return model_assignment(frame, inst, r.model);
}

}  // namespace

TEST(Geometry, SizesForEvenOrders) {
  for (int n : {2, 4, 6, 8, 10}) {
    const OvalFrame f = build_frame(n);
    EXPECT_EQ(f.num_rows(), binom2(n + 2)) << n;
    EXPECT_EQ(f.num_points(), n * n + n + 1) << n;
    EXPECT_EQ(f.num_blocks(), n + 1);
    EXPECT_EQ(f.block_size(), n - 1);
    EXPECT_EQ(static_cast<int>(f.all_columns().size()), (n + 1) * (n - 1));
    EXPECT_EQ(f.column_weight(), (n + 2) / 2);
  }
}

TEST(Geometry, RejectsOddAndTinyOrders) {
  EXPECT_THROW(build_frame(3), std::invalid_argument);
  EXPECT_THROW(build_frame(0), std::invalid_argument);
  EXPECT_THROW(build_frame(-4), std::invalid_argument);
}

TEST(Geometry, BlockColumnRanges) {
  const OvalFrame f = build_frame(10);
  const auto b2 = f.block_columns(2);
  ASSERT_EQ(b2.size(), 9u);
  EXPECT_EQ(b2.front(), 22);
  EXPECT_EQ(b2.back(), 30);
  const auto b6 = f.block_columns(6);
  EXPECT_EQ(b6.front(), 58);
  EXPECT_EQ(b6.back(), 66);
  const auto range = f.block_range_columns(2, 6);
  EXPECT_EQ(range.size(), 45u);
  EXPECT_EQ(range.front(), 22);
  EXPECT_EQ(range.back(), 66);
  EXPECT_EQ(f.block_of_column(13), 1);
  EXPECT_EQ(f.block_of_column(111), 11);
  EXPECT_EQ(f.block_of_column(12), 0);

  const OvalFrame small = build_frame(2);
  ASSERT_EQ(small.block_columns(1).size(), 1u);
  EXPECT_EQ(small.block_columns(1).front(), 5);
  EXPECT_EQ(small.block_columns(3).front(), 7);
}

TEST(Geometry, RowPairsAreLexicographic) {
  const OvalFrame f = build_frame(10);
  EXPECT_EQ(f.row_pair(1), std::make_pair(1, 2));
  EXPECT_EQ(f.row_pair(11), std::make_pair(1, 12));
  EXPECT_EQ(f.row_pair(12), std::make_pair(2, 3));
  EXPECT_EQ(f.row_pair(66), std::make_pair(11, 12));
  for (int r = 1; r <= f.num_rows(); ++r) {
    auto [a, b] = f.row_pair(r);
    EXPECT_EQ(f.row_of(a, b), r);
    EXPECT_EQ(f.row_of(b, a), r);
  }
}

TEST(Geometry, OvalColumnsAreFullyFixed) {
  const OvalFrame f = build_frame(6);
  for (int r = 1; r <= f.num_rows(); ++r) {
    auto [a, b] = f.row_pair(r);
    for (int c = 1; c <= f.oval_size(); ++c) {
      EXPECT_EQ(f.cell(r, c), (c == a || c == b) ? Cell::One : Cell::Zero);
    }
  }
}

TEST(Geometry, FirstBlockFixedOnes) {
  const OvalFrame f = build_frame(10);
  const auto cols = f.block_columns(1);
  for (int i = 1; i <= 9; ++i) {
    const auto ones = f.fixed_ones(cols[i - 1]);
    ASSERT_EQ(ones.size(), 2u) << i;
    EXPECT_EQ(ones[0], f.row_of(1, 2));
    EXPECT_EQ(ones[1], f.row_of(3, 3 + i));
  }
}

TEST(Geometry, EveryColumnStartsOnItsBlockLine) {
  const OvalFrame f = build_frame(8);
  for (int j = 1; j <= f.num_blocks(); ++j) {
    const auto pts = f.block_points(j);
    ASSERT_EQ(static_cast<int>(pts.size()), f.order());
    for (int i = 0; i < f.block_size(); ++i) {
      const int col = f.block_columns(j)[i];
      const auto ones = f.fixed_ones(col);
      ASSERT_GE(ones.size(), 2u);
      EXPECT_EQ(ones[0], f.row_of(1, j + 1));
      bool has_second = false;
      for (int r : ones) has_second |= r == f.row_of(pts[0], pts[i + 1]);
      EXPECT_TRUE(has_second) << "block " << j << " col " << i;
      // Rows through point 1 other than the block line cannot hold a One.
      for (int k = 2; k <= f.oval_size(); ++k) {
        if (k == j + 1) continue;
        EXPECT_EQ(f.cell(f.row_of(1, k), col), Cell::Zero);
      }
    }
  }
}

TEST(Geometry, PinnedColumnHasNoUnknowns) {
  const OvalFrame pinned = build_frame(10);
  const int col = pinned.block_columns(2)[0];
  EXPECT_TRUE(pinned.unknown_rows(col).empty());
  EXPECT_EQ(static_cast<int>(pinned.fixed_ones(col).size()), pinned.column_weight());

  const OvalFrame free = build_frame(10, {.pin_first_factor = false});
  EXPECT_FALSE(free.unknown_rows(free.block_columns(2)[0]).empty());
  EXPECT_LT(pinned.unknown_count(pinned.block_columns(2)),
            free.unknown_count(free.block_columns(2)));
}

TEST(Geometry, UnknownCountsAtOrderTen) {
  const OvalFrame f = build_frame(10);
  EXPECT_EQ(f.unknown_count(f.block_columns(1)), 252);
  EXPECT_EQ(f.unknown_count(f.block_columns(2)), 200);
  EXPECT_EQ(f.unknown_count(f.block_columns(3)), 252);
  for (int j = 4; j <= 11; ++j) EXPECT_EQ(f.unknown_count(f.block_columns(j)), 249) << j;
  EXPECT_EQ(f.unknown_count(f.block_range_columns(2, 6)), 1199);
  EXPECT_EQ(f.unknown_count(f.all_columns()), 2696);
}

// The upper-left 30x66 corner: the oval part is the pair incidence, each
// block column starts on row {1, j+1}, and rows through point 1 elsewhere are
// empty.
TEST(Geometry, RenderedCornerFollowsTheFixingRules) {
  const OvalFrame f = build_frame(10);
  const std::string text = f.render(30, 66);
  std::istringstream in(text);
  std::string line;
  int r = 0;
  while (std::getline(in, line)) {
    ++r;
    ASSERT_EQ(line.size(), 66u);
    auto [a, b] = f.row_pair(r);
    for (int c = 1; c <= 66; ++c) {
      const char ch = line[c - 1];
      const Cell cell = f.cell(r, c);
      EXPECT_EQ(ch, cell == Cell::One ? '1' : cell == Cell::Zero ? '0' : '?');
      if (c <= 12) {
        EXPECT_EQ(ch, (c == a || c == b) ? '1' : '0');
      } else if (a == 1) {
        EXPECT_EQ(ch, f.block_of_column(c) == b - 1 ? '1' : '0') << r << "," << c;
      }
    }
  }
  EXPECT_EQ(r, 30);
  // Rows 22..30 are the lines {3, 4..12}: block 1 column i holds its second
  // One on row 21 + i.
  for (int i = 1; i <= 9; ++i) {
    std::istringstream again(text);
    for (int k = 0; k < 21 + i; ++k) std::getline(again, line);
    EXPECT_EQ(line[12 + i - 1], '1');
  }
}

TEST(Geometry, RenderClampsToTheFrame) {
  const OvalFrame f = build_frame(4);
  EXPECT_EQ(f.render(100, 100), f.render());
  EXPECT_EQ(f.render().size(), static_cast<std::size_t>(f.num_rows() * (f.num_points() + 1)));
}

TEST(Geometry, ValidateAcceptsSolvedFrame) {
  for (int n : {2, 4}) {
    const OvalFrame f = build_frame(n);
    const Assignment a = solved_frame(n);
    EXPECT_TRUE(validate_partial(f, a).ok()) << n;
    for (int c : f.all_columns()) EXPECT_TRUE(column_fully_assigned(f, a, c));
  }
}

TEST(Geometry, ValidateFlagsOverweightColumns) {
  // At order 4 propagation leaves a single unknown per column, so use 6.
  const OvalFrame f = build_frame(6);
  const int col = f.block_columns(3)[1];
  const auto rows = f.unknown_rows(col);
  ASSERT_GE(rows.size(), 3u);
  Assignment a;
  for (int i = 0; i < 3; ++i) a[{rows[i], col}] = true;
  const FrameVerdict v = validate_partial(f, a);
  bool overweight = false;
  for (const auto& x : v.violations) overweight |= x.kind == ViolationKind::ColumnOverweight;
  EXPECT_TRUE(overweight);
}

TEST(Geometry, ValidateFlagsMissingOvalIntersection) {
  const OvalFrame f = build_frame(4);
  Assignment missing = solved_frame(4);
  for (auto& [cell, v] : missing) {
    if (v) {
      v = false;
      break;
    }
  }
  const FrameVerdict miss = validate_partial(f, missing);
  bool unmet = false;
  for (const auto& v : miss.violations) unmet |= v.kind == ViolationKind::MissingOvalIntersection;
  EXPECT_TRUE(unmet);
}

TEST(Geometry, ValidateFlagsDoubleIntersection) {
  const OvalFrame f = build_frame(6);
  // Two columns of one block already meet on the block line; a second
  // shared row is a double intersection.
  const auto cols = f.block_columns(3);
  const auto u0 = f.unknown_rows(cols[0]);
  const auto u1 = f.unknown_rows(cols[1]);
  int shared = 0;
  for (int r : u0) {
    for (int s : u1) {
      if (r == s) shared = r;
    }
  }
  ASSERT_NE(shared, 0);
  Assignment a{{{shared, cols[0]}, true}, {{shared, cols[1]}, true}};
  const FrameVerdict v = validate_partial(f, a);
  ASSERT_FALSE(v.ok());
  EXPECT_EQ(v.violations.front().kind, ViolationKind::DoubleIntersection);
}

TEST(Geometry, ValidateRejectsFixedCells) {
  const OvalFrame f = build_frame(4);
  Assignment a{{{1, 1}, true}};
  EXPECT_THROW(validate_partial(f, a), std::invalid_argument);
}
