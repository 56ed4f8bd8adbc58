#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "ovalcert/encoder.hpp"
#include "ovalcert/hash.hpp"
#include "ovalcert/manifest.hpp"
#include "ovalcert/pipeline.hpp"

using namespace ovalcert;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("ovalcert-pipeline-" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

oracle::Frame01 frame01(const OvalFrame& f, const Assignment& a) {
  oracle::Frame01 out;
  out.oval = f.oval_size();
  out.columns = f.num_points();
  for (int r = 1; r <= f.num_rows(); ++r) {
    std::vector<int> row;
    for (int c = 1; c <= f.num_points(); ++c) {
      const Cell s = f.cell(r, c);
      const bool one = s == Cell::One || (s == Cell::Unknown && a.at({r, c}));
      if (one) row.push_back(c - 1);
    }
    out.rows.push_back(row);
  }
  return out;
}

struct EndToEnd {
  ConquerResult conquer;
  std::vector<ExtendOutcome> extend;
  fs::path dir;
};

EndToEnd run_small(int n, const std::string& tag) {
  EndToEnd e;
  e.dir = fresh_dir(tag);
  const OvalFrame frame = build_frame(n);
  run_enum(n, e.dir / "classes");
  GenOptions g;
  g.order = n;
  g.first_block = 2;
  g.last_block = frame.num_blocks() - 1;
  g.classes_dir = e.dir / "classes";
  g.out_dir = e.dir / "inst";
  const auto insts = run_gen_instances(g);
  EXPECT_EQ(insts.size(), 1u);
  const fs::path icnf = e.dir / "inst" / "top.icnf";
  run_cube({.instance = insts.front().cnf, .out = icnf, .cutoff = 2});
  ConquerOptions c;
  c.instance = insts.front().cnf;
  c.cubes = icnf;
  c.label_table = e.dir / "classes" / "labels.txt";
  c.proof_dir = e.dir / "run";
  c.check = true;
  e.conquer = run_conquer(c);
  e.extend = run_extend({.completions = e.dir / "run" / "completions.txt",
                         .to_block = frame.num_blocks(),
                         .proof_dir = e.dir / "ext"});
  return e;
}

void expect_hyperoval_frame(int n, const EndToEnd& e) {
  EXPECT_EQ(e.conquer.verdict, "EXHAUSTED");
  EXPECT_TRUE(e.conquer.proofs_ok());
  ASSERT_FALSE(e.conquer.completions.empty());
  for (const auto& c : e.conquer.completions) EXPECT_TRUE(c.valid);
  ASSERT_EQ(e.extend.size(), e.conquer.completions.size());
  const OvalFrame frame = build_frame(n);
  const auto reference = oracle::frame_of_plane(oracle::projective_plane(n));
  int sat = 0;
  for (const auto& x : e.extend) {
    if (x.status != Status::Satisfiable) {
      EXPECT_EQ(x.status, Status::Unsatisfiable);
      ASSERT_TRUE(x.check.has_value());
      EXPECT_EQ(x.check->verdict, Verdict::VerifiedUnsat);
      continue;
    }
    ++sat;
    EXPECT_TRUE(x.valid);
    EXPECT_TRUE(oracle::frames_isomorphic(frame01(frame, x.model), reference));
  }
  EXPECT_GT(sat, 0);
  EXPECT_TRUE(verify_manifest(e.dir / "run" / "manifest.jsonl").empty());
}

}  // namespace

TEST(Pipeline, OracleHyperovalsAreValid) {
  for (int q : {2, 4}) {
    const auto plane = oracle::projective_plane(q);
    EXPECT_TRUE(oracle::is_projective_plane(q, plane.lines));
    EXPECT_EQ(static_cast<int>(plane.hyperoval.size()), q + 2);
  }
}

TEST(Pipeline, OrderTwoEndToEnd) { expect_hyperoval_frame(2, run_small(2, "n2")); }

TEST(Pipeline, OrderFourEndToEnd) { expect_hyperoval_frame(4, run_small(4, "n4")); }

TEST(Pipeline, RunsAreDeterministic) {
  const auto a = run_small(4, "det-a");
  const auto b = run_small(4, "det-b");
  for (const char* f : {"inst/inst-001.cnf", "inst/top.icnf", "run/part-0.drup", "run/completions.txt"}) {
    EXPECT_EQ(sha256_file(a.dir / f), sha256_file(b.dir / f)) << f;
  }
}

TEST(Pipeline, VerifyCountsAtOrderFour) {
  for (const auto& c : verify_counts({.order = 4})) EXPECT_TRUE(c.ok()) << c.name;
}

TEST(Pipeline, VerifyCountsCatchesAShiftedSlice) {
  const OvalFrame f = build_frame(6);
  auto slice = f.block_range_columns(2, 6);
  slice.erase(slice.begin());
  slice.push_back(f.block_columns(7).front());
  bool failed = false;
  for (const auto& c : verify_counts({.order = 6, .slice_columns = slice, .enumerate = false})) {
    if (c.name.find("unknown variables, blocks") != std::string::npos) failed |= !c.ok();
  }
  EXPECT_TRUE(failed);
}

TEST(Pipeline, CompletionFileRoundTripAndErrors) {
  const fs::path d = fresh_dir("completions");
  const OvalFrame f = build_frame(4);
  CompletionFile cf;
  cf.order = 4;
  cf.first_block = 2;
  cf.last_block = 3;
  Assignment a;
  for (int col : f.block_range_columns(2, 3)) {
    for (int r : f.unknown_rows(col)) a[{r, col}] = (r + col) % 2 == 0;
  }
  cf.completions = {a, a};
  write_completions(d / "c.txt", cf);
  const CompletionFile back = read_completions(d / "c.txt");
  EXPECT_EQ(back.completions, cf.completions);
  EXPECT_EQ(back.first_block, 2);

  auto write = [&](const std::string& text) {
    std::ofstream(d / "bad.txt") << text;
    return d / "bad.txt";
  };
  EXPECT_THROW(read_completions(write("")), std::runtime_error);
  EXPECT_THROW(read_completions(write("# nonsense\n")), std::runtime_error);
  EXPECT_THROW(read_completions(write("# ovalcert completions n 4 blocks 2 9\n")), std::runtime_error);
  EXPECT_THROW(read_completions(write("# ovalcert completions n 4 blocks 2 3\n1-5\n")), std::runtime_error);
  EXPECT_THROW(read_completions(write("# ovalcert completions n 4 blocks 2 3\n1:1\n")), std::runtime_error);
  EXPECT_THROW(run_extend({.completions = d / "c.txt", .to_block = 3}), std::invalid_argument);
}

TEST(Pipeline, LoadInstanceChecksTheVarmap) {
  const fs::path d = fresh_dir("varmap");
  const OvalFrame f = build_frame(4);
  save_instance(d / "x.cnf", encode(f, f.block_range_columns(2, 3)));
  EXPECT_NO_THROW(load_instance(d / "x.cnf"));
  {
    std::ofstream out(d / "x.varmap", std::ios::app);
    out << "99 1 1\n";
  }
  EXPECT_THROW(load_instance(d / "x.cnf"), std::runtime_error);
}

TEST(Pipeline, ConquerRejectsForeignCubes) {
  const auto e = run_small(4, "foreign");
  const OvalFrame f = build_frame(4);
  const fs::path other = e.dir / "other.cnf";
  save_instance(other, encode(f, f.block_range_columns(3, 4)));
  ConquerOptions c;
  c.instance = other;
  c.cubes = e.dir / "inst" / "top.icnf";
  c.label_table = e.dir / "classes" / "labels.txt";
  c.proof_dir = e.dir / "foreign-run";
  EXPECT_THROW(run_conquer(c), std::invalid_argument);
}

TEST(Pipeline, SliceVerdict) {
  const fs::path d = fresh_dir("slice");
  // Order 6 propagates down to a handful of refuted branches; 8 gives cubes.
  run_enum(8, d / "classes");
  GenOptions g{.order = 8, .first_block = 2, .last_block = 4, .classes_dir = d / "classes",
               .out_dir = d / "inst", .labels = {6}};
  const auto insts = run_gen_instances(g);
  const CubeSet cs = run_cube({.instance = insts.front().cnf, .out = d / "c.icnf", .cutoff = 10});
  ASSERT_GT(cs.cubes.size(), 3u);
  ConquerOptions c;
  c.instance = insts.front().cnf;
  c.cubes = d / "c.icnf";
  c.label_table = d / "classes" / "labels.txt";
  c.proof_dir = d / "run";
  c.max_cubes = 3;
  c.check = true;
  const ConquerResult r = run_conquer(c);
  EXPECT_EQ(r.verdict, "SLICE");
  EXPECT_EQ(r.cubes.size(), 3u);
  EXPECT_TRUE(r.proofs_ok());
  for (const auto& p : r.parts) {
    ASSERT_TRUE(p.check.has_value());
    EXPECT_EQ(p.check->verdict, Verdict::VerifiedLemmas);
  }
}

TEST(Pipeline, ParallelMapKeepsOrderAndRethrows) {
  const auto v = parallel_map<int>(50, 4, [](std::size_t i) { return static_cast<int>(i * i); });
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], static_cast<int>(i * i));
  EXPECT_THROW(parallel_map<int>(10, 3,
                                 [](std::size_t i) -> int {
                                   if (i == 7) throw std::runtime_error("boom");
                                   return 0;
                                 }),
               std::runtime_error);
}

TEST(Pipeline, CliExitCodes) {
  const std::string cli = OVALCERT_CLI;
  if (cli.empty()) GTEST_SKIP() << "command-line tool not built";
  const fs::path d = fresh_dir("cli");
  auto run = [&](const std::string& args) {
    const int rc = std::system((cli + " " + args + " > " + (d / "log.txt").string() + " 2>&1").c_str());
    return WEXITSTATUS(rc);
  };
  EXPECT_EQ(run("enum-1f --m 4 --out " + (d / "classes").string()), 0);
  EXPECT_EQ(run("gen-instances --n 4 --blocks 2..4 --classes " + (d / "classes").string() + " --out " +
                (d / "inst").string()),
            0);
  const std::string inst = (d / "inst" / "inst-001.cnf").string();
  EXPECT_EQ(run("cube --instance " + inst + " --cutoff 2 --out " + (d / "c.icnf").string()), 0);
  EXPECT_EQ(run("conquer --instance " + inst + " --cubes " + (d / "c.icnf").string() + " --label-table " +
                (d / "classes" / "labels.txt").string() + " --proof-dir " + (d / "run").string() + " --check"),
            0);
  EXPECT_EQ(run("check --instance " + inst + " --proof " + (d / "run" / "part-0.drup").string() +
                " --assume " + (d / "run" / "part-0.assume").string()),
            20);
  EXPECT_EQ(run("check --instance " + inst + " --proof " + (d / "run" / "part-0.drup").string() +
                " --demote-trusted"),
            1);
  EXPECT_EQ(run("verify-counts --n 4"), 0);
  EXPECT_EQ(run("no-such-command"), 2);
  EXPECT_EQ(run("cube --instance /nonexistent.cnf --cutoff 2 --out " + (d / "x.icnf").string()), 2);
}
