#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "ovalcert/proofcheck.hpp"
#include "ovalcert/solver.hpp"

using namespace ovalcert;
using oracle::Clause;

namespace {

struct Refutation {
  int vars = 0;
  std::vector<Clause> clauses;
  CnfInstance instance;
  std::vector<ProofLine> proof;
};

std::vector<Refutation> refutations(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::vector<Refutation> out;
  while (static_cast<int>(out.size()) < count) {
    Refutation r;
    r.vars = 10 + static_cast<int>(rng() % 8);
    r.clauses = oracle::random_kcnf(rng, r.vars, 5 * r.vars);
    r.instance = oracle::instance_of(r.vars, r.clauses);
    ProofRecorder rec;
    if (solve(r.instance, {}, {}, {}, &rec).status != Status::Unsatisfiable) continue;
    r.proof = std::move(rec.lines);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ProofLine> without_deletions(const std::vector<ProofLine>& proof) {
  std::vector<ProofLine> out;
  for (const auto& l : proof) {
    if (l.kind != ProofKind::Delete) out.push_back(l);
  }
  return out;
}

// Forward replay with the naive RUP oracle, no deletions.
bool naive_accepts(int vars, std::vector<Clause> db, const std::vector<ProofLine>& proof) {
  for (const auto& line : proof) {
    Clause c(line.lits.begin(), line.lits.end());
    if (line.kind == ProofKind::Add && !oracle::naive_rup(vars, db, c)) return false;
    if (c.empty()) return true;
    db.push_back(c);
  }
  return false;
}

}  // namespace

TEST(ProofCheck, SolverProofsVerify) {
  for (const auto& r : refutations(1, 200)) {
    const CheckReport rep = check_unsat(r.instance, {}, r.proof);
    ASSERT_EQ(rep.verdict, Verdict::VerifiedUnsat) << rep.reason;
    EXPECT_EQ(rep.lines, r.proof.size());
  }
}

// Single-line mutations: the checker must agree with the naive oracle on
// every mutant, and in particular reject every mutant the oracle rejects.
TEST(ProofCheck, MutantsAgreeWithNaiveOracle) {
  std::size_t rejected = 0;
  std::size_t mutants = 0;
  for (const auto& r : refutations(2, 60)) {
    const auto base = without_deletions(r.proof);
    auto judge = [&](const std::vector<ProofLine>& p) {
      const bool expected = naive_accepts(r.vars, r.clauses, p);
      const bool got = check_unsat(r.instance, {}, p).verdict == Verdict::VerifiedUnsat;
      ++mutants;
      rejected += !expected;
      ASSERT_EQ(got, expected) << "mutant " << mutants;
    };
    for (std::size_t i = 0; i < base.size(); ++i) {
      for (std::size_t k = 0; k < base[i].lits.size(); ++k) {
        auto flip = base;
        flip[i].lits[k] = -flip[i].lits[k];
        judge(flip);
        auto drop = base;
        drop[i].lits.erase(drop[i].lits.begin() + static_cast<long>(k));
        judge(drop);
      }
      auto removed = base;
      removed.erase(removed.begin() + static_cast<long>(i));
      judge(removed);
    }
  }
  EXPECT_GT(rejected, 100u);
  EXPECT_GT(mutants, rejected);
}

TEST(ProofCheck, StrippingDeletionsKeepsProofsValid) {
  for (const auto& r : refutations(3, 100)) {
    ASSERT_EQ(check_unsat(r.instance, {}, r.proof).verdict, Verdict::VerifiedUnsat);
    EXPECT_EQ(check_unsat(r.instance, {}, without_deletions(r.proof)).verdict,
              Verdict::VerifiedUnsat);
  }
}

TEST(ProofCheck, DeletingAnAbsentClauseFails) {
  const CnfInstance inst = oracle::instance_of(2, {{1, 2}, {-1, 2}, {1, -2}, {-1, -2}});
  const std::vector<ProofLine> proof{{ProofKind::Delete, {2, 1, 3}}, {ProofKind::Add, {}}};
  CheckReport rep = check_unsat(inst, {}, proof);
  EXPECT_EQ(rep.verdict, Verdict::Failed);
  EXPECT_EQ(rep.failed_step, 1u);
  const std::vector<ProofLine> ok{{ProofKind::Add, {1}}, {ProofKind::Delete, {2, 1}}, {ProofKind::Add, {}}};
  rep = check_unsat(inst, {}, ok);
  EXPECT_EQ(rep.deleted, 1u);
  EXPECT_EQ(rep.verdict, Verdict::VerifiedUnsat);
}

TEST(ProofCheck, RootReasonDeletionsAreIgnored) {
  // 1 and then 2 are forced at the root; erasing the reason of 2 must not
  // make the refutation disappear.
  const CnfInstance inst = oracle::instance_of(3, {{1}, {-1, 2}, {-2, 3}, {-2, -3}});
  const std::vector<ProofLine> proof{{ProofKind::Delete, {-1, 2}}, {ProofKind::Add, {}}};
  const CheckReport rep = check_unsat(inst, {}, proof);
  EXPECT_EQ(rep.verdict, Verdict::VerifiedUnsat);
  EXPECT_EQ(rep.ignored_deletions, 1u);
}

TEST(ProofCheck, TruncatedProofFails) {
  const auto rs = refutations(4, 20);
  for (const auto& r : rs) {
    if (naive_accepts(r.vars, r.clauses, {{ProofKind::Add, {}}})) continue;  // root conflict
    auto cut = r.proof;
    while (!cut.empty() && !cut.back().lits.empty()) cut.pop_back();
    ASSERT_FALSE(cut.empty());
    cut.pop_back();
    const CheckReport rep = check_unsat(r.instance, {}, cut);
    EXPECT_EQ(rep.verdict, Verdict::Failed);
    EXPECT_NE(rep.reason.find("empty clause"), std::string::npos);
  }
}

TEST(ProofCheck, TargetsGiveVerifiedLemmas) {
  const CnfInstance inst = oracle::instance_of(3, {{1, 2}, {1, -2}, {-1, 3}});
  CheckOptions opt;
  opt.targets = {{1}, {3}};
  EXPECT_EQ(check_unsat(inst, {}, std::vector<ProofLine>{}, opt).verdict, Verdict::VerifiedLemmas);
  opt.targets = {{-3}};
  EXPECT_EQ(check_unsat(inst, {}, std::vector<ProofLine>{}, opt).verdict, Verdict::Failed);
}

TEST(ProofCheck, AssumptionsJoinTheDatabase) {
  const CnfInstance inst = oracle::instance_of(2, {{-1, 2}, {-1, -2}});
  const std::vector<ProofLine> proof{{ProofKind::Add, {}}};
  EXPECT_EQ(check_unsat(inst, {1}, proof).verdict, Verdict::VerifiedUnsat);
  EXPECT_EQ(check_unsat(inst, {}, proof).verdict, Verdict::Failed);
  EXPECT_EQ(check_unsat(inst, {5}, proof).verdict, Verdict::Failed);
}

TEST(ProofCheck, TrustedLinesAndDemotion) {
  const CnfInstance inst = oracle::instance_of(2, {{1, 2}});
  const std::vector<ProofLine> proof{{ProofKind::TrustedAdd, {-1}}, {ProofKind::TrustedAdd, {-2}}, {ProofKind::Add, {}}};
  const CheckReport trusted = check_unsat(inst, {}, proof);
  EXPECT_EQ(trusted.verdict, Verdict::VerifiedUnsat);
  EXPECT_EQ(trusted.trusted, 2u);
  CheckOptions opt;
  opt.demote_trusted = true;
  const CheckReport demoted = check_unsat(inst, {}, proof, opt);
  EXPECT_EQ(demoted.verdict, Verdict::Failed);
  EXPECT_EQ(demoted.failed_step, 1u);
}

TEST(ProofCheck, StreamInput) {
  const CnfInstance inst = oracle::instance_of(1, {{1}, {-1}});
  std::istringstream good("c comment\n\n0\n");
  EXPECT_EQ(check_unsat(inst, {}, good).verdict, Verdict::VerifiedUnsat);
  std::istringstream bad("1 2\n0\n");
  const CheckReport rep = check_unsat(inst, {}, bad);
  EXPECT_EQ(rep.verdict, Verdict::Failed);
  EXPECT_EQ(rep.failed_step, 1u);
  std::istringstream range("7 0\n0\n");
  EXPECT_EQ(check_unsat(inst, {}, range).verdict, Verdict::Failed);
}

TEST(ProofCheck, MemoryLimit) {
  const auto rs = refutations(5, 20);
  const auto it = std::find_if(rs.begin(), rs.end(), [](const Refutation& x) { return x.proof.size() > 2; });
  ASSERT_NE(it, rs.end());
  const Refutation& r = *it;
  CheckOptions opt;
  opt.memory_limit = 16;
  const CheckReport rep = check_unsat(r.instance, {}, r.proof, opt);
  EXPECT_EQ(rep.verdict, Verdict::Failed);
  EXPECT_NE(rep.reason.find("memory"), std::string::npos);
}

TEST(ProofCheck, ModelChecking) {
  const CnfInstance inst = oracle::instance_of(3, {{1, 2}, {-1, 3}});
  EXPECT_EQ(check_model(inst, {}, {false, true, false, true}).verdict, Verdict::VerifiedModel);
  EXPECT_EQ(check_model(inst, {}, {false, true, false, false}).verdict, Verdict::Failed);
  EXPECT_EQ(check_model(inst, {-2}, {false, true, true, true}).verdict, Verdict::Failed);
  EXPECT_EQ(check_model(inst, {}, {false, true}).verdict, Verdict::Failed);
}

TEST(ProofCheck, VerdictNames) {
  EXPECT_STREQ(to_string(Verdict::VerifiedUnsat), "VERIFIED_UNSAT");
  EXPECT_STREQ(to_string(Verdict::VerifiedLemmas), "VERIFIED_LEMMAS");
  EXPECT_STREQ(to_string(Verdict::Failed), "FAILED");
}
