#include "ovalcert/proofcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <istream>
#include <set>
#include <unordered_map>

namespace ovalcert {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::VerifiedUnsat: return "VERIFIED_UNSAT";
    case Verdict::VerifiedModel: return "VERIFIED_MODEL";
    case Verdict::VerifiedLemmas: return "VERIFIED_LEMMAS";
    case Verdict::Failed: return "FAILED";
  }
  return "?";
}

const char* to_string(TrustedKind k) {
  switch (k) {
    case TrustedKind::Symmetry: return "symmetry";
    case TrustedKind::SolutionBlock: return "solution-block";
    case TrustedKind::Unjustified: return "unjustified";
  }
  return "?";
}

namespace {

using CRef = std::uint32_t;
constexpr CRef kNone = ~CRef{0};

inline int ivar(int x) { return x >> 1; }
inline int inot(int x) { return x ^ 1; }
inline int internal(Lit l) { return 2 * (std::abs(l) - 1) + (l < 0 ? 1 : 0); }

// Clause database with a root-level trail and watched-literal propagation.
class Checker {
 public:
  explicit Checker(int vars)
      : nvars_(vars), watches_(2 * static_cast<std::size_t>(vars)), assign_(vars, 0),
        reason_(vars, kNone) {}

  bool inconsistent() const { return inconsistent_; }
  std::size_t bytes() const { return arena_.size() * sizeof(int) + watch_entries_ * sizeof(CRef) * 2; }

  bool in_range(std::span<const Lit> lits) const {
    return std::all_of(lits.begin(), lits.end(),
                       [&](Lit l) { return l != 0 && std::abs(l) <= nvars_; });
  }

  void add(std::span<const Lit> clause) {
    std::vector<int> lits = normalize(clause);
    const CRef c = static_cast<CRef>(arena_.size());
    arena_.push_back(static_cast<int>(lits.size()));
    arena_.push_back(0);
    arena_.insert(arena_.end(), lits.begin(), lits.end());
    index_[hash(lits)].push_back(c);
    if (inconsistent_) return;
    for (std::size_t i = 1; i < lits.size(); ++i) {
      if (lits[i] == inot(lits[i - 1])) return;  // tautology: never propagates
    }
    int* l = lits_of(c);
    const int n = size_of(c);
    // Non-false literals first.
    int free = 0;
    for (int i = 0; i < n; ++i) {
      if (value(l[i]) != -1) std::swap(l[i], l[free++]);
    }
    if (n == 0 || free == 0) {
      inconsistent_ = true;
      return;
    }
    if (n >= 2) {
      watch(c, l[0]);
      watch(c, l[1]);
    }
    if (free == 1 && value(l[0]) == 0) {
      assign(l[0], c);
      if (propagate() != kNone) inconsistent_ = true;
      root_size_ = trail_.size();
    }
  }

  // Returns false if the clause is absent; `ignored` is set when it is the
  // reason of a root assignment and is kept.
  bool remove(std::span<const Lit> clause, bool& ignored) {
    ignored = false;
    const std::vector<int> lits = normalize(clause);
    auto it = index_.find(hash(lits));
    if (it == index_.end()) return false;
    auto& bucket = it->second;
    for (std::size_t k = 0; k < bucket.size(); ++k) {
      const CRef c = bucket[k];
      if (!same(c, lits)) continue;
      const int* l = lits_of(c);
      for (int i = 0; i < size_of(c); ++i) {
        if (reason_[ivar(l[i])] == c) {
          ignored = true;
          return true;
        }
      }
      arena_[c + 1] = 1;
      bucket.erase(bucket.begin() + static_cast<std::ptrdiff_t>(k));
      return true;
    }
    return false;
  }

  bool rup(std::span<const Lit> clause) {
    if (inconsistent_) return true;
    const std::size_t saved = trail_.size();
    bool conflict = false;
    for (Lit lit : clause) {
      const int x = internal(lit);
      const int v = value(x);
      if (v == 1) {
        conflict = true;
        break;
      }
      if (v == 0) assign(inot(x), kNone);
    }
    if (!conflict) conflict = propagate() != kNone;
    undo(saved);
    return conflict;
  }

 private:
  static std::uint64_t hash(const std::vector<int>& lits) {
    std::uint64_t h = 1469598103934665603ULL;
    for (int x : lits) {
      h ^= static_cast<std::uint64_t>(x) + 1;
      h *= 1099511628211ULL;
    }
    return h;
  }
  static std::vector<int> normalize(std::span<const Lit> clause) {
    std::vector<int> lits;
    lits.reserve(clause.size());
    for (Lit l : clause) lits.push_back(internal(l));
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    return lits;
  }
  bool same(CRef c, const std::vector<int>& lits) const {
    if (arena_[c + 1] != 0 || arena_[c] != static_cast<int>(lits.size())) return false;
    std::vector<int> mine(arena_.begin() + c + 2, arena_.begin() + c + 2 + arena_[c]);
    std::sort(mine.begin(), mine.end());
    return mine == lits;
  }
  int size_of(CRef c) const { return arena_[c]; }
  int* lits_of(CRef c) { return arena_.data() + c + 2; }
  bool deleted(CRef c) const { return arena_[c + 1] != 0; }
  int value(int x) const {
    const int a = assign_[ivar(x)];
    return (x & 1) ? -a : a;
  }
  void watch(CRef c, int lit) {
    watches_[inot(lit)].push_back(c);
    ++watch_entries_;
  }
  void assign(int x, CRef r) {
    assign_[ivar(x)] = (x & 1) ? -1 : 1;
    reason_[ivar(x)] = r;
    trail_.push_back(x);
  }
  void undo(std::size_t to) {
    for (std::size_t i = to; i < trail_.size(); ++i) {
      assign_[ivar(trail_[i])] = 0;
      reason_[ivar(trail_[i])] = kNone;
    }
    trail_.resize(to);
    head_ = std::min(head_, to);
  }

  CRef propagate() {
    while (head_ < trail_.size()) {
      const int p = trail_[head_++];
      const int false_lit = inot(p);
      auto& ws = watches_[p];
      std::size_t i = 0;
      std::size_t j = 0;
      const std::size_t end = ws.size();
      while (i < end) {
        const CRef c = ws[i++];
        if (deleted(c)) {
          --watch_entries_;
          continue;
        }
        int* l = lits_of(c);
        if (l[0] == false_lit) std::swap(l[0], l[1]);
        if (value(l[0]) == 1) {
          ws[j++] = c;
          continue;
        }
        const int n = size_of(c);
        bool moved = false;
        for (int k = 2; k < n; ++k) {
          if (value(l[k]) != -1) {
            std::swap(l[1], l[k]);
            watches_[inot(l[1])].push_back(c);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = c;
        if (value(l[0]) == -1) {
          while (i < end) ws[j++] = ws[i++];
          ws.resize(j);
          head_ = trail_.size();
          return c;
        }
        assign(l[0], c);
      }
      ws.resize(j);
    }
    return kNone;
  }

  int nvars_;
  std::vector<int> arena_;  // size, deleted flag, literals
  std::unordered_map<std::uint64_t, std::vector<CRef>> index_;
  std::vector<std::vector<CRef>> watches_;
  std::size_t watch_entries_ = 0;
  std::vector<std::int8_t> assign_;
  std::vector<CRef> reason_;
  std::vector<int> trail_;
  std::size_t head_ = 0;
  std::size_t root_size_ = 0;
  bool inconsistent_ = false;
};

class UnsatRun {
 public:
  UnsatRun(const CnfInstance& instance, const std::vector<Lit>& assumptions,
           const CheckOptions& options)
      : checker_(instance.var_count), options_(options), start_(std::chrono::steady_clock::now()) {
    for (std::size_t i = 0; i < instance.clauses.size(); ++i) checker_.add(instance.clauses[i]);
    for (Lit a : assumptions) {
      const Lit unit[] = {a};
      if (!checker_.in_range(unit)) {
        fail(0, "assumption literal out of range");
        return;
      }
      checker_.add(unit);
    }
    report_.peak_bytes = checker_.bytes();
  }

  bool done() const { return finished_; }

  void step(const ProofLine& line) {
    if (finished_) return;
    const std::size_t idx = ++report_.lines;
    if (!checker_.in_range(line.lits)) {
      fail(idx, "literal out of range");
      return;
    }
    switch (line.kind) {
      case ProofKind::Delete: {
        bool ignored = false;
        if (!checker_.remove(line.lits, ignored)) {
          fail(idx, "deletion of a clause not in the database");
          return;
        }
        ++(ignored ? report_.ignored_deletions : report_.deleted);
        return;
      }
      case ProofKind::TrustedAdd:
        if (!options_.demote_trusted) {
          ++report_.trusted;
          checker_.add(line.lits);
          break;
        }
        [[fallthrough]];
      case ProofKind::Add:
        if (!checker_.rup(line.lits)) {
          fail(idx, "addition is not RUP");
          return;
        }
        ++report_.checked;
        if (line.lits.empty()) {
          finish(Verdict::VerifiedUnsat);
          return;
        }
        checker_.add(line.lits);
        break;
    }
    report_.peak_bytes = std::max(report_.peak_bytes, checker_.bytes());
    if (options_.memory_limit && report_.peak_bytes > options_.memory_limit) {
      fail(idx, "memory limit exceeded");
    }
  }

  void fail(std::size_t idx, std::string reason) {
    report_.verdict = Verdict::Failed;
    report_.failed_step = idx;
    report_.reason = std::move(reason);
    finished_ = true;
  }

  CheckReport result() {
    if (!finished_) {
      if (options_.targets.empty()) {
        fail(report_.lines, "proof ends without the empty clause");
      } else {
        for (std::size_t t = 0; t < options_.targets.size(); ++t) {
          if (!checker_.in_range(options_.targets[t]) || !checker_.rup(options_.targets[t])) {
            fail(report_.lines, "target lemma " + std::to_string(t + 1) + " is not derivable");
            break;
          }
        }
        if (!finished_) finish(Verdict::VerifiedLemmas);
      }
    }
    report_.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return report_;
  }

 private:
  void finish(Verdict v) {
    report_.verdict = v;
    finished_ = true;
  }

  Checker checker_;
  const CheckOptions& options_;
  CheckReport report_;
  bool finished_ = false;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

CheckReport check_unsat(const CnfInstance& instance, const std::vector<Lit>& assumptions,
                        const std::vector<ProofLine>& proof, const CheckOptions& options) {
  UnsatRun run(instance, assumptions, options);
  for (const auto& line : proof) {
    if (run.done()) break;
    run.step(line);
  }
  return run.result();
}

CheckReport check_unsat(const CnfInstance& instance, const std::vector<Lit>& assumptions,
                        std::istream& proof, const CheckOptions& options) {
  UnsatRun run(instance, assumptions, options);
  std::string text;
  ProofLine line;
  std::size_t lineno = 0;
  while (!run.done() && std::getline(proof, text)) {
    ++lineno;
    try {
      if (!parse_proof_line(text, line)) continue;
    } catch (const ProofError& e) {
      CheckReport r = run.result();
      r.verdict = Verdict::Failed;
      r.failed_step = lineno;
      r.reason = std::string("unreadable proof line: ") + e.what();
      return r;
    }
    run.step(line);
  }
  return run.result();
}

CheckReport check_model(const CnfInstance& instance, const std::vector<Lit>& assumptions,
                        const std::vector<bool>& model) {
  CheckReport r;
  auto fail = [&](std::size_t idx, std::string reason) {
    r.verdict = Verdict::Failed;
    r.failed_step = idx;
    r.reason = std::move(reason);
    return r;
  };
  if (model.size() != static_cast<std::size_t>(instance.var_count) + 1) {
    return fail(0, "model does not assign every variable");
  }
  auto sat = [&](Lit l) {
    return std::abs(l) <= instance.var_count && (l > 0 ? model[l] : !model[-l]);
  };
  for (std::size_t i = 0; i < instance.clauses.size(); ++i) {
    const auto c = instance.clauses[i];
    if (!std::any_of(c.begin(), c.end(), sat)) return fail(i + 1, "clause " + std::to_string(i + 1) + " is falsified");
    ++r.checked;
  }
  for (std::size_t i = 0; i < assumptions.size(); ++i) {
    if (!sat(assumptions[i])) return fail(i + 1, "assumption " + std::to_string(assumptions[i]) + " is falsified");
  }
  r.verdict = Verdict::VerifiedModel;
  return r;
}

AuditReport audit_trusted(const std::vector<ProofLine>& proof, const AuditContext& ctx) {
  if (!ctx.frame || !ctx.table || !ctx.varmap) throw std::invalid_argument("incomplete audit context");
  const OvalFrame& frame = *ctx.frame;

  std::vector<std::set<CellRef>> completions;
  for (const auto& c : ctx.completions) {
    std::set<CellRef> cells;
    for (const auto& [cell, value] : c) {
      if (value && ctx.varmap->var_of(cell) != 0) cells.insert(cell);
    }
    completions.push_back(std::move(cells));
  }

  AuditReport report;
  for (std::size_t step = 0; step < proof.size(); ++step) {
    const ProofLine& line = proof[step];
    if (line.kind != ProofKind::TrustedAdd) continue;
    TrustedEntry e;
    e.step = step + 1;
    auto finish = [&](TrustedKind kind, std::string detail) {
      e.kind = kind;
      e.detail = std::move(detail);
      ++(kind == TrustedKind::Unjustified ? report.unjustified : report.justified);
      report.entries.push_back(e);
    };
    std::set<CellRef> cells;
    std::set<int> blocks;
    bool well_formed = true;
    for (Lit l : line.lits) {
      if (l >= 0 || -l > ctx.varmap->size()) {
        well_formed = false;
        break;
      }
      const CellRef cell = ctx.varmap->cell_of(-l);
      cells.insert(cell);
      blocks.insert(frame.block_of_column(cell.col));
    }
    if (!well_formed) {
      finish(TrustedKind::Unjustified, "literals do not negate frame cells");
      continue;
    }
    if (std::find(completions.begin(), completions.end(), cells) != completions.end()) {
      finish(TrustedKind::SolutionBlock, "blocks a recorded completion");
      continue;
    }
    if (blocks.size() != 1) {
      finish(TrustedKind::Unjustified, "does not lie in one block and matches no recorded completion");
      continue;
    }
    e.block = *blocks.begin();
    if (std::find(ctx.checked_blocks.begin(), ctx.checked_blocks.end(), e.block) ==
        ctx.checked_blocks.end()) {
      finish(TrustedKind::Unjustified, "block " + std::to_string(e.block) + " is not watched");
      continue;
    }
    Assignment a;
    for (int col : frame.block_columns(e.block)) {
      for (int r : frame.unknown_rows(col)) a[{r, col}] = cells.contains({r, col});
    }
    try {
      e.label = label_of_assigned_block(frame, e.block, a, *ctx.table);
    } catch (const std::exception& ex) {
      finish(TrustedKind::Unjustified, std::string("not a complete block: ") + ex.what());
      continue;
    }
    if (e.label < ctx.own_label) {
      finish(TrustedKind::Symmetry, "label " + std::to_string(e.label) + " < " +
                                        std::to_string(ctx.own_label));
    } else {
      finish(TrustedKind::Unjustified, "label " + std::to_string(e.label) + " >= " +
                                           std::to_string(ctx.own_label));
    }
  }
  return report;
}

}  // namespace ovalcert
