#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "ovalcert/cnf.hpp"
#include "ovalcert/encoder.hpp"
#include "ovalcert/geometry.hpp"

using namespace ovalcert;

namespace {

std::string dimacs_text(const CnfInstance& inst) {
  std::ostringstream out;
  write_dimacs(inst, out);
  return out.str();
}

CnfInstance parse(const std::string& text) {
  std::istringstream in(text);
  return read_dimacs(in);
}

}  // namespace

TEST(Cnf, ClauseListStoresSpans) {
  ClauseList cl;
  cl.add({1, -2, 3});
  cl.add({});
  cl.add({-4});
  ASSERT_EQ(cl.size(), 3u);
  EXPECT_EQ(cl.literal_count(), 4u);
  EXPECT_EQ(cl[0].size(), 3u);
  EXPECT_EQ(cl[1].size(), 0u);
  EXPECT_EQ(cl[2][0], -4);
}

TEST(Cnf, VarMapRoundTrip) {
  VarMap vm;
  EXPECT_EQ(vm.add({3, 7}), 1);
  EXPECT_EQ(vm.add({1, 9}), 2);
  EXPECT_THROW(vm.add({3, 7}), std::invalid_argument);
  EXPECT_EQ(vm.var_of({1, 9}), 2);
  EXPECT_EQ(vm.var_of({2, 2}), 0);
  std::stringstream ss;
  vm.write(ss);
  const VarMap back = VarMap::read(ss);
  EXPECT_EQ(back, vm);
  EXPECT_EQ(back.content_hash(), vm.content_hash());
  std::istringstream gap("1 3 7\n3 1 9\n");
  EXPECT_THROW(VarMap::read(gap), std::runtime_error);
}

TEST(Cnf, DimacsRoundTripKeepsProvenance) {
  const OvalFrame f = build_frame(6);
  const CnfInstance inst = encode(f, f.block_range_columns(2, 4));
  const std::string text = dimacs_text(inst);
  CnfInstance back = parse(text);
  EXPECT_EQ(back.var_count, inst.var_count);
  EXPECT_EQ(back.clauses, inst.clauses);
  EXPECT_EQ(back.counts, inst.counts);
  EXPECT_EQ(back.raw_counts, inst.raw_counts);
  EXPECT_EQ(back.provenance, inst.provenance);
  // The cell map lives in the sibling .varmap file, not in the DIMACS text.
  back.varmap = inst.varmap;
  EXPECT_EQ(dimacs_text(back), text);
}

TEST(Cnf, ReadsPlainDimacs) {
  const CnfInstance inst = parse("c hello\np cnf 3 2\n1 -2 0\n2 3\n-1 0\n");
  EXPECT_EQ(inst.var_count, 3);
  ASSERT_EQ(inst.clauses.size(), 2u);
  EXPECT_EQ(inst.clauses[1].size(), 3u);
}

TEST(Cnf, RejectsMalformedInput) {
  EXPECT_THROW(parse("1 2 0\n"), std::runtime_error);
  EXPECT_THROW(parse("p cnf 3\n1 0\n"), std::runtime_error);
  EXPECT_THROW(parse("p cnf 3 1 9\n1 0\n"), std::runtime_error);
  EXPECT_THROW(parse("p dnf 3 1\n1 0\n"), std::runtime_error);
  EXPECT_THROW(parse("p cnf 3 1\n1 4 0\n"), std::runtime_error);
  EXPECT_THROW(parse("p cnf 3 1\n1 x 0\n"), std::runtime_error);
  EXPECT_THROW(parse("p cnf 3 1\n1 2\n"), std::runtime_error);
  EXPECT_THROW(parse("p cnf 3 2\n1 2 0\n"), std::runtime_error);
}

// Frozen encoding of the whole order-4 frame; any change to variable
// numbering or clause order shows up here.
TEST(Cnf, OrderFourGolden) {
  const OvalFrame f = build_frame(4);
  const std::string text = dimacs_text(encode(f, f.all_columns()));
  std::ifstream in(std::string(OVALCERT_TEST_DATA) + "/frame4.cnf");
  ASSERT_TRUE(in) << "missing golden file";
  std::stringstream golden;
  golden << in.rdbuf();
  EXPECT_EQ(text, golden.str());
}
