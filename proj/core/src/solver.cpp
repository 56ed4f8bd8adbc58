#include "ovalcert/solver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace ovalcert {

const char* to_string(Status status) {
  switch (status) {
    case Status::Satisfiable: return "SAT";
    case Status::Unsatisfiable: return "UNSAT";
    case Status::Unknown: return "UNKNOWN";
  }
  return "?";
}

namespace {

using CRef = std::uint32_t;
constexpr CRef kNone = std::numeric_limits<CRef>::max();
constexpr int kUndefLit = -1;

// Internal literals: 2*var + sign, var zero-based.
inline int var_of(int x) { return x >> 1; }
inline int negate(int x) { return x ^ 1; }
inline int to_internal(Lit l) { return 2 * (std::abs(l) - 1) + (l < 0 ? 1 : 0); }
inline Lit to_external(int x) { return (x & 1) ? -(var_of(x) + 1) : var_of(x) + 1; }

struct Watcher {
  CRef cref;
  int blocker;
};

// Clause header layout in the arena: size, flags | lbd << 8, activity.
constexpr int kHeader = 3;
constexpr std::int32_t kLearnt = 1;
constexpr std::int32_t kPermanent = 2;
constexpr std::int32_t kDeleted = 4;

double luby(double y, int x) {
  int size = 1;
  int seq = 0;
  while (size < x + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x = x % size;
  }
  return std::pow(y, seq);
}

class VarHeap {
 public:
  explicit VarHeap(const std::vector<double>& act) : act_(act) {}
  void resize(int n) { index_.resize(n, -1); }
  bool contains(int v) const { return index_[v] >= 0; }
  bool empty() const { return heap_.empty(); }
  void insert(int v) {
    if (contains(v)) return;
    index_[v] = static_cast<int>(heap_.size());
    heap_.push_back(v);
    up(index_[v]);
  }
  void increased(int v) {
    if (contains(v)) up(index_[v]);
  }
  int pop() {
    const int top = heap_[0];
    heap_[0] = heap_.back();
    index_[heap_[0]] = 0;
    heap_.pop_back();
    index_[top] = -1;
    if (!heap_.empty()) down(0);
    return top;
  }

 private:
  bool better(int a, int b) const { return act_[a] > act_[b] || (act_[a] == act_[b] && a < b); }
  void up(int i) {
    const int v = heap_[i];
    while (i > 0) {
      const int parent = (i - 1) >> 1;
      if (!better(v, heap_[parent])) break;
      heap_[i] = heap_[parent];
      index_[heap_[i]] = i;
      i = parent;
    }
    heap_[i] = v;
    index_[v] = i;
  }
  void down(int i) {
    const int v = heap_[i];
    const int n = static_cast<int>(heap_.size());
    while (2 * i + 1 < n) {
      int child = 2 * i + 1;
      if (child + 1 < n && better(heap_[child + 1], heap_[child])) ++child;
      if (!better(heap_[child], v)) break;
      heap_[i] = heap_[child];
      index_[heap_[i]] = i;
      i = child;
    }
    heap_[i] = v;
    index_[v] = i;
  }

  const std::vector<double>& act_;
  std::vector<int> heap_;
  std::vector<int> index_;
};

}  // namespace

struct Solver::Impl final : CallbackContext {
  Impl() : heap(activity) {}

  // ---- state ----
  int nvars = 0;
  bool ok = true;
  bool empty_logged = false;
  std::vector<std::int32_t> arena;
  std::size_t wasted = 0;
  std::vector<CRef> originals;
  std::vector<CRef> learnts;
  std::vector<std::vector<Watcher>> watches;  // by literal that falsifies the watch
  std::vector<std::int8_t> assigns;           // per var: 1 true, -1 false, 0 undef
  std::vector<int> level;
  std::vector<CRef> reason;
  std::vector<char> polarity;  // saved phase: 1 means negative
  std::vector<double> activity;
  VarHeap heap;
  double var_inc = 1.0;
  double var_decay = 0.95;
  double cla_inc = 1.0;
  double cla_decay = 0.999;
  std::vector<int> trail;
  std::vector<int> trail_lim;
  std::size_t qhead = 0;
  std::vector<char> seen;
  std::vector<int> analyze_stack;
  std::vector<int> analyze_toclear;
  std::vector<unsigned> lbd_stamp;
  unsigned lbd_counter = 0;
  std::uint64_t seed = 0x2545f4914f6cdd1dULL;

  std::vector<int> assumptions;
  std::uint64_t next_reduce = 2000;
  std::uint64_t reduce_increment = 300;

  ProofSink* proof = nullptr;
  std::vector<Lit> proof_buf;

  Callback callback;
  std::vector<std::vector<int>> blocks;
  std::vector<int> block_of_var;
  std::vector<int> block_assigned_count;
  bool block_event = false;
  std::vector<std::vector<Lit>> emitted;

  SolverStats stats;
  std::chrono::steady_clock::time_point deadline;
  bool has_deadline = false;
  std::uint64_t conflict_limit = 0;

  // ---- arena ----
  std::int32_t& csize(CRef c) { return arena[c]; }
  std::int32_t& cflags(CRef c) { return arena[c + 1]; }
  int clbd(CRef c) const { return arena[c + 1] >> 8; }
  void set_lbd(CRef c, int lbd) { arena[c + 1] = (arena[c + 1] & 0xff) | (lbd << 8); }
  float cact(CRef c) const { return std::bit_cast<float>(arena[c + 2]); }
  void set_cact(CRef c, float a) { arena[c + 2] = std::bit_cast<std::int32_t>(a); }
  std::int32_t* clits(CRef c) { return arena.data() + c + kHeader; }
  bool deleted(CRef c) const { return (arena[c + 1] & kDeleted) != 0; }

  CRef alloc(const std::vector<int>& lits, std::int32_t flags) {
    if (arena.size() + lits.size() + kHeader >= kNone) throw std::length_error("clause arena full");
    const CRef c = static_cast<CRef>(arena.size());
    arena.push_back(static_cast<std::int32_t>(lits.size()));
    arena.push_back(flags);
    arena.push_back(std::bit_cast<std::int32_t>(0.0f));
    arena.insert(arena.end(), lits.begin(), lits.end());
    return c;
  }

  void attach(CRef c) {
    std::int32_t* l = clits(c);
    watches[negate(l[0])].push_back({c, l[1]});
    watches[negate(l[1])].push_back({c, l[0]});
  }

  // ---- assignment ----
  int value_lit(int x) const {
    const int a = assigns[var_of(x)];
    return (x & 1) ? -a : a;
  }
  int decision_level() const { return static_cast<int>(trail_lim.size()); }

  void enqueue(int x, CRef from) {
    const int v = var_of(x);
    assigns[v] = (x & 1) ? -1 : 1;
    level[v] = decision_level();
    reason[v] = from;
    trail.push_back(x);
    const int b = block_of_var[v];
    if (b >= 0 && ++block_assigned_count[b] == static_cast<int>(blocks[b].size())) block_event = true;
  }

  void cancel_until(int lvl) {
    if (decision_level() <= lvl) return;
    for (std::size_t i = trail.size(); i-- > static_cast<std::size_t>(trail_lim[lvl]);) {
      const int x = trail[i];
      const int v = var_of(x);
      assigns[v] = 0;
      reason[v] = kNone;
      polarity[v] = static_cast<char>(x & 1);
      const int b = block_of_var[v];
      if (b >= 0) --block_assigned_count[b];
      heap.insert(v);
    }
    trail.resize(trail_lim[lvl]);
    trail_lim.resize(lvl);
    qhead = trail.size();
  }

  void grow(int n) {
    if (n <= nvars) return;
    nvars = n;
    watches.resize(2 * static_cast<std::size_t>(n));
    assigns.resize(n, 0);
    level.resize(n, 0);
    reason.resize(n, kNone);
    polarity.resize(n, 1);
    activity.resize(n, 0.0);
    seen.resize(n, 0);
    lbd_stamp.resize(n + 1, 0);
    block_of_var.resize(n, -1);
    heap.resize(n);
    for (int v = 0; v < n; ++v) {
      if (!assigns[v]) heap.insert(v);
    }
  }

  // ---- proof ----
  void log(ProofKind kind, const int* lits, std::size_t n) {
    if (!proof) return;
    proof_buf.clear();
    for (std::size_t i = 0; i < n; ++i) proof_buf.push_back(to_external(lits[i]));
    proof->line(kind, proof_buf);
  }
  void log_empty() {
    if (empty_logged) return;
    empty_logged = true;
    if (proof) proof->add({});
  }

  // ---- propagation ----
  CRef propagate() {
    CRef confl = kNone;
    std::size_t start = qhead;
    while (qhead < trail.size()) {
      const int p = trail[qhead++];
      const int false_lit = negate(p);
      auto& ws = watches[p];
      std::size_t i = 0;
      std::size_t j = 0;
      const std::size_t end = ws.size();
      while (i < end) {
        const Watcher w = ws[i];
        if (value_lit(w.blocker) == 1) {
          ws[j++] = ws[i++];
          continue;
        }
        const CRef cr = w.cref;
        if (deleted(cr)) {
          ++i;
          continue;
        }
        std::int32_t* c = clits(cr);
        if (c[0] == false_lit) std::swap(c[0], c[1]);
        ++i;
        const int first = c[0];
        const Watcher nw{cr, first};
        if (first != w.blocker && value_lit(first) == 1) {
          ws[j++] = nw;
          continue;
        }
        const int sz = csize(cr);
        bool moved = false;
        for (int k = 2; k < sz; ++k) {
          if (value_lit(c[k]) != -1) {
            c[1] = c[k];
            c[k] = false_lit;
            watches[negate(c[1])].push_back(nw);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = nw;
        if (value_lit(first) == -1) {
          confl = cr;
          qhead = trail.size();
          while (i < end) ws[j++] = ws[i++];
        } else {
          enqueue(first, cr);
        }
      }
      ws.resize(j);
      if (confl != kNone) break;
    }
    stats.propagations += trail.size() - start;
    return confl;
  }

  // ---- activity ----
  void bump_var(int v) {
    if ((activity[v] += var_inc) > 1e100) {
      for (auto& a : activity) a *= 1e-100;
      var_inc *= 1e-100;
    }
    heap.increased(v);
  }
  void bump_clause(CRef c) {
    float a = cact(c) + static_cast<float>(cla_inc);
    set_cact(c, a);
    if (a > 1e20f) {
      for (CRef l : learnts) set_cact(l, cact(l) * 1e-20f);
      cla_inc *= 1e-20;
    }
  }

  // ---- conflict analysis ----
  unsigned abstract_level(int v) const { return 1U << (level[v] & 31); }

  bool redundant(int p, unsigned levels) {
    analyze_stack.clear();
    analyze_stack.push_back(p);
    const std::size_t top = analyze_toclear.size();
    while (!analyze_stack.empty()) {
      const int q = analyze_stack.back();
      analyze_stack.pop_back();
      const CRef r = reason[var_of(q)];
      std::int32_t* c = clits(r);
      const int sz = csize(r);
      for (int i = 1; i < sz; ++i) {
        const int x = c[i];
        const int v = var_of(x);
        if (seen[v] || level[v] == 0) continue;
        if (reason[v] != kNone && (abstract_level(v) & levels) != 0) {
          seen[v] = 1;
          analyze_stack.push_back(x);
          analyze_toclear.push_back(x);
        } else {
          for (std::size_t k = top; k < analyze_toclear.size(); ++k) seen[var_of(analyze_toclear[k])] = 0;
          analyze_toclear.resize(top);
          return false;
        }
      }
    }
    return true;
  }

  void analyze(CRef confl, std::vector<int>& out, int& bt_level, int& lbd) {
    out.clear();
    out.push_back(kUndefLit);
    int path = 0;
    int p = kUndefLit;
    std::size_t index = trail.size();
    do {
      if (cflags(confl) & kLearnt) bump_clause(confl);
      std::int32_t* c = clits(confl);
      const int sz = csize(confl);
      for (int j = (p == kUndefLit) ? 0 : 1; j < sz; ++j) {
        const int q = c[j];
        const int v = var_of(q);
        if (seen[v] || level[v] == 0) continue;
        bump_var(v);
        seen[v] = 1;
        if (level[v] >= decision_level()) {
          ++path;
        } else {
          out.push_back(q);
        }
      }
      while (!seen[var_of(trail[--index])]) {
      }
      p = trail[index];
      confl = reason[var_of(p)];
      seen[var_of(p)] = 0;
      --path;
    } while (path > 0);
    out[0] = negate(p);

    analyze_toclear.assign(out.begin(), out.end());
    unsigned levels = 0;
    for (std::size_t i = 1; i < out.size(); ++i) levels |= abstract_level(var_of(out[i]));
    std::size_t j = 1;
    for (std::size_t i = 1; i < out.size(); ++i) {
      if (reason[var_of(out[i])] == kNone || !redundant(out[i], levels)) out[j++] = out[i];
    }
    out.resize(j);

    bt_level = 0;
    if (out.size() > 1) {
      std::size_t best = 1;
      for (std::size_t i = 2; i < out.size(); ++i) {
        if (level[var_of(out[i])] > level[var_of(out[best])]) best = i;
      }
      std::swap(out[1], out[best]);
      bt_level = level[var_of(out[1])];
    }
    ++lbd_counter;
    lbd = 0;
    for (int x : out) {
      const int l = level[var_of(x)];
      if (lbd_stamp[l] != lbd_counter) {
        lbd_stamp[l] = lbd_counter;
        ++lbd;
      }
    }
    for (int x : analyze_toclear) seen[var_of(x)] = 0;
  }

  // Negations of the assumptions responsible for `p` (a true literal
  // contradicting an assumption) plus p itself.
  void analyze_final(int p, std::vector<int>& out) {
    out.clear();
    out.push_back(p);
    if (decision_level() == 0) return;
    seen[var_of(p)] = 1;
    for (std::size_t i = trail.size(); i-- > static_cast<std::size_t>(trail_lim[0]);) {
      const int v = var_of(trail[i]);
      if (!seen[v]) continue;
      if (reason[v] == kNone) {
        out.push_back(negate(trail[i]));
      } else {
        std::int32_t* c = clits(reason[v]);
        const int sz = csize(reason[v]);
        for (int k = 1; k < sz; ++k) {
          if (level[var_of(c[k])] > 0) seen[var_of(c[k])] = 1;
        }
      }
      seen[v] = 0;
    }
    seen[var_of(p)] = 0;
  }

  // Learns from a conflict at a positive level. Returns false on a root
  // conflict.
  bool resolve_conflict(CRef confl, std::vector<int>& learnt) {
    ++stats.conflicts;
    if (decision_level() == 0) {
      ok = false;
      log_empty();
      return false;
    }
    int bt = 0;
    int lbd = 0;
    analyze(confl, learnt, bt, lbd);
    cancel_until(bt);
    log(ProofKind::Add, learnt.data(), learnt.size());
    ++stats.learned;
    if (learnt.size() == 1) {
      enqueue(learnt[0], kNone);
    } else {
      const CRef c = alloc(learnt, kLearnt);
      set_lbd(c, lbd);
      learnts.push_back(c);
      attach(c);
      bump_clause(c);
      enqueue(learnt[0], c);
    }
    var_inc /= var_decay;
    cla_inc /= cla_decay;
    return true;
  }

  // Adds a clause at any decision level, backtracking as needed. Returns a
  // conflicting clause to analyse, or kNone.
  CRef inject(std::vector<int> lits, std::int32_t flags) {
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    for (std::size_t i = 1; i < lits.size(); ++i) {
      if (lits[i] == negate(lits[i - 1])) return kNone;  // tautology
    }
    auto key = [&](int x) {
      const int val = value_lit(x);
      if (val == 1) return std::numeric_limits<int>::max();
      if (val == 0) return std::numeric_limits<int>::max() - 1;
      return level[var_of(x)];
    };
    std::stable_sort(lits.begin(), lits.end(), [&](int a, int b) { return key(a) > key(b); });
    if (lits.empty()) {
      ok = false;
      log_empty();
      return kNone;
    }
    if (lits.size() == 1) {
      cancel_until(0);
      const int val = value_lit(lits[0]);
      if (val == -1) {
        ok = false;
        log_empty();
      } else if (val == 0) {
        enqueue(lits[0], kNone);
      }
      return kNone;
    }
    const int v0 = value_lit(lits[0]);
    const int v1 = value_lit(lits[1]);
    CRef c = kNone;
    auto store = [&] {
      c = alloc(lits, flags);
      if (flags & kLearnt) learnts.push_back(c);
      else originals.push_back(c);
      attach(c);
    };
    if (v0 == 1 || (v0 == 0 && v1 != -1)) {
      store();
      return kNone;
    }
    if (v0 == 0) {  // unit under the current assignment
      cancel_until(level[var_of(lits[1])]);
      store();
      enqueue(lits[0], c);
      return kNone;
    }
    const int l0 = level[var_of(lits[0])];
    const int l1 = level[var_of(lits[1])];
    if (l0 == 0) {
      ok = false;
      log_empty();
      return kNone;
    }
    if (l0 > l1) {
      cancel_until(l1);
      store();
      enqueue(lits[0], c);
      return kNone;
    }
    cancel_until(l0);
    store();
    return c;
  }

  // Propagates and resolves conflicts until a fixpoint. Returns false on
  // root unsatisfiability.
  bool settle(CRef confl, std::vector<int>& learnt) {
    while (true) {
      if (!ok) return false;
      if (confl == kNone) confl = propagate();
      if (confl == kNone) return true;
      if (!resolve_conflict(confl, learnt)) return false;
      confl = kNone;
    }
  }

  // ---- callback context ----
  int value(int var) const override {
    if (var < 1 || var > nvars) throw std::out_of_range("callback variable out of range");
    return assigns[var - 1];
  }
  int block_count() const override { return static_cast<int>(blocks.size()); }
  const std::vector<int>& block(int i) const override { return blocks.at(i); }
  bool block_assigned(int i) const override {
    return block_assigned_count.at(i) == static_cast<int>(blocks.at(i).size());
  }
  void emit(std::vector<Lit> clause) override {
    for (Lit l : clause) {
      if (l == 0 || std::abs(l) > nvars) throw std::invalid_argument("emitted literal out of range");
      if (value_of(l) == 1) throw std::invalid_argument("emitted clause is already satisfied");
    }
    emitted.push_back(std::move(clause));
  }

  // Runs the callback and injects what it emitted. Returns true if any
  // clause was added.
  bool run_callback(std::vector<int>& learnt) {
    block_event = false;
    ++stats.callback_calls;
    emitted.clear();
    callback(*this);
    if (emitted.empty()) return false;
    auto pending = std::move(emitted);
    emitted.clear();
    for (auto& clause : pending) {
      ++stats.injected;
      if (proof) proof->trusted(clause);
      std::vector<int> lits;
      for (Lit l : clause) lits.push_back(to_internal(l));
      const CRef confl = inject(std::move(lits), kPermanent);
      if (!settle(confl, learnt)) return true;
    }
    return true;
  }

  // ---- database reduction ----
  bool locked(CRef c) {
    const int x = clits(c)[0];
    const int v = var_of(x);
    return reason[v] == c && value_lit(x) == 1;
  }

  void reduce_db() {
    std::sort(learnts.begin(), learnts.end(), [&](CRef a, CRef b) {
      if (clbd(a) != clbd(b)) return clbd(a) > clbd(b);
      return cact(a) < cact(b);
    });
    const std::size_t half = learnts.size() / 2;
    std::size_t j = 0;
    for (std::size_t i = 0; i < learnts.size(); ++i) {
      const CRef c = learnts[i];
      if (i < half && clbd(c) > 2 && csize(c) > 2 && !locked(c)) {
        log(ProofKind::Delete, clits(c), static_cast<std::size_t>(csize(c)));
        cflags(c) |= kDeleted;
        wasted += static_cast<std::size_t>(csize(c)) + kHeader;
        ++stats.deleted;
      } else {
        learnts[j++] = c;
      }
    }
    learnts.resize(j);
    if (wasted * 2 > arena.size()) collect_garbage();
  }

  void collect_garbage() {
    std::vector<std::int32_t> fresh;
    fresh.reserve(arena.size() - wasted);
    auto move = [&](CRef c) {
      const CRef n = static_cast<CRef>(fresh.size());
      fresh.insert(fresh.end(), arena.begin() + c, arena.begin() + c + kHeader + csize(c));
      arena[c + 2] = static_cast<std::int32_t>(n);  // forwarding
      return n;
    };
    for (auto& c : originals) c = move(c);
    for (auto& c : learnts) c = move(c);
    for (int v = 0; v < nvars; ++v) {
      if (reason[v] != kNone) reason[v] = static_cast<CRef>(arena[reason[v] + 2]);
    }
    arena.swap(fresh);
    wasted = 0;
    for (auto& ws : watches) ws.clear();
    for (CRef c : originals) attach(c);
    for (CRef c : learnts) attach(c);
  }

  // ---- decisions ----
  int pick_branch() {
    while (!heap.empty()) {
      const int v = heap.pop();
      if (!assigns[v]) return 2 * v + polarity[v];
    }
    return kUndefLit;
  }

  bool out_of_budget() {
    if (conflict_limit && stats.conflicts >= conflict_limit) return true;
    if (has_deadline && (stats.conflicts & 63) == 0 && std::chrono::steady_clock::now() > deadline) {
      return true;
    }
    return false;
  }

  // One restart interval. Returns Unknown at the restart point.
  Status search(std::uint64_t max_conflicts, std::vector<int>& failed, bool& budget_hit) {
    std::uint64_t conflicts_here = 0;
    std::vector<int> learnt;
    while (true) {
      const CRef confl = propagate();
      if (confl != kNone) {
        ++conflicts_here;
        if (!resolve_conflict(confl, learnt)) return Status::Unsatisfiable;
        if (out_of_budget()) {
          budget_hit = true;
          return Status::Unknown;
        }
        continue;
      }
      if (callback && block_event) {
        if (run_callback(learnt)) {
          if (!ok) return Status::Unsatisfiable;
          continue;
        }
      }
      if (conflicts_here >= max_conflicts) {
        cancel_until(0);
        return Status::Unknown;
      }
      if (stats.conflicts >= next_reduce) {
        next_reduce = stats.conflicts + 2000 + reduce_increment * (stats.conflicts / 2000);
        reduce_db();
      }
      int next = kUndefLit;
      while (decision_level() < static_cast<int>(assumptions.size())) {
        const int p = assumptions[decision_level()];
        const int val = value_lit(p);
        if (val == 1) {
          trail_lim.push_back(static_cast<int>(trail.size()));
        } else if (val == -1) {
          analyze_final(negate(p), failed);
          return Status::Unsatisfiable;
        } else {
          next = p;
          break;
        }
      }
      if (next == kUndefLit) {
        next = pick_branch();
        if (next == kUndefLit) {
          if (callback && run_callback(learnt)) {
            if (!ok) return Status::Unsatisfiable;
            continue;
          }
          return Status::Satisfiable;
        }
        ++stats.decisions;
      }
      trail_lim.push_back(static_cast<int>(trail.size()));
      enqueue(next, kNone);
    }
  }

  void set_blocks(std::vector<std::vector<int>> b) {
    blocks = std::move(b);
    std::fill(block_of_var.begin(), block_of_var.end(), -1);
    block_assigned_count.assign(blocks.size(), 0);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      for (int v : blocks[i]) {
        if (v < 1 || v > nvars) throw std::invalid_argument("block variable out of range");
        if (block_of_var[v - 1] != -1) throw std::invalid_argument("blocks overlap");
        block_of_var[v - 1] = static_cast<int>(i);
        if (assigns[v - 1]) ++block_assigned_count[i];
      }
    }
  }

  std::vector<int> internal_clause(std::span<const Lit> clause) const {
    std::vector<int> lits;
    lits.reserve(clause.size());
    for (Lit l : clause) {
      if (l == 0 || std::abs(l) > nvars) {
        throw std::invalid_argument("literal " + std::to_string(l) + " out of range");
      }
      lits.push_back(to_internal(l));
    }
    return lits;
  }

  bool add(std::span<const Lit> clause, std::int32_t flags) {
    auto lits = internal_clause(clause);
    if (!ok) return false;
    cancel_until(0);
    std::vector<int> learnt;
    return settle(inject(std::move(lits), flags), learnt);
  }

  SolveResult solve(std::span<const Lit> assume, const Budget& budget) {
    SolveResult result;
    assumptions = internal_clause(assume);
    conflict_limit = budget.conflicts ? stats.conflicts + budget.conflicts : 0;
    has_deadline = budget.seconds > 0;
    if (has_deadline) {
      deadline = std::chrono::steady_clock::now() +
                 std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                     std::chrono::duration<double>(budget.seconds));
    }
    cancel_until(0);
    std::vector<int> failed;
    std::vector<int> learnt;
    Status status = Status::Unknown;
    if (ok && !settle(kNone, learnt)) status = Status::Unsatisfiable;
    if (!ok) status = Status::Unsatisfiable;
    bool budget_hit = false;
    for (int restart = 0; status == Status::Unknown && !budget_hit; ++restart) {
      status = search(static_cast<std::uint64_t>(luby(2.0, restart) * 100), failed, budget_hit);
      if (status == Status::Unknown && !budget_hit) {
        ++stats.restarts;
        if (budget.seconds > 0 && std::chrono::steady_clock::now() > deadline) budget_hit = true;
      }
    }
    result.status = status;
    if (status == Status::Satisfiable) {
      result.model.assign(nvars + 1, false);
      for (int v = 0; v < nvars; ++v) result.model[v + 1] = assigns[v] == 1;
    } else if (status == Status::Unsatisfiable && ok) {
      log(ProofKind::Add, failed.data(), failed.size());
      for (int x : failed) result.failed.push_back(to_external(x));
    }
    cancel_until(0);
    result.stats = stats;
    return result;
  }
};

Solver::Solver(int var_count) : impl_(std::make_unique<Impl>()) { impl_->grow(var_count); }

Solver::Solver(const CnfInstance& instance) : Solver(instance.var_count) {
  for (std::size_t i = 0; i < instance.clauses.size(); ++i) add_clause(instance.clauses[i]);
}

Solver::~Solver() = default;
Solver::Solver(Solver&&) noexcept = default;
Solver& Solver::operator=(Solver&&) noexcept = default;

int Solver::var_count() const { return impl_->nvars; }
void Solver::set_var_count(int vars) { impl_->grow(vars); }

bool Solver::add_clause(std::span<const Lit> clause) { return impl_->add(clause, 0); }

bool Solver::add_trusted_clause(std::span<const Lit> clause) {
  impl_->internal_clause(clause);
  if (impl_->proof) impl_->proof->trusted(clause);
  ++impl_->stats.injected;
  return impl_->add(clause, kPermanent);
}

void Solver::set_proof(ProofSink* sink) { impl_->proof = sink; }

void Solver::set_callback(std::vector<std::vector<int>> blocks, Callback callback) {
  impl_->set_blocks(std::move(blocks));
  impl_->callback = std::move(callback);
}

void Solver::set_seed(std::uint64_t seed) {
  // Small activity perturbation so different seeds explore differently.
  impl_->seed = seed ? seed : 0x2545f4914f6cdd1dULL;
  std::uint64_t s = impl_->seed;
  for (int v = 0; v < impl_->nvars; ++v) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    impl_->activity[v] = static_cast<double>(s % 1000) * 1e-9;
    impl_->heap.increased(v);
  }
}

SolveResult Solver::solve(std::span<const Lit> assumptions, const Budget& budget) {
  return impl_->solve(assumptions, budget);
}

void Solver::close_proof() {
  if (impl_->proof) impl_->proof->add({});
}

const SolverStats& Solver::stats() const { return impl_->stats; }

SolveResult solve(const CnfInstance& instance, std::span<const Lit> assumptions,
                  const Callback& callback, const std::vector<std::vector<int>>& blocks,
                  ProofSink* proof, const Budget& budget) {
  Solver s(instance.var_count);
  s.set_proof(proof);
  for (std::size_t i = 0; i < instance.clauses.size(); ++i) s.add_clause(instance.clauses[i]);
  if (callback) s.set_callback(blocks, callback);
  SolveResult r = s.solve(assumptions, budget);
  if (r.status == Status::Unsatisfiable && !r.failed.empty()) s.close_proof();
  return r;
}

SolveAllResult solve_all(const CnfInstance& instance, const Blocker& blocker,
                         const Callback& callback, const std::vector<std::vector<int>>& blocks,
                         ProofSink* proof, const Budget& budget, std::size_t max_models) {
  Solver s(instance.var_count);
  s.set_proof(proof);
  for (std::size_t i = 0; i < instance.clauses.size(); ++i) s.add_clause(instance.clauses[i]);
  if (callback) s.set_callback(blocks, callback);
  SolveAllResult out;
  while (true) {
    SolveResult r = s.solve({}, budget);
    out.stats = r.stats;
    if (r.status != Status::Satisfiable) {
      out.status = r.status;
      return out;
    }
    std::vector<Lit> block;
    for (int v : blocker(r.model)) {
      if (r.model.at(v)) block.push_back(-v);
    }
    out.models.push_back(std::move(r.model));
    if (max_models && out.models.size() >= max_models) {
      out.status = Status::Unknown;
      return out;
    }
    s.add_trusted_clause(block);
  }
}

}  // namespace ovalcert
