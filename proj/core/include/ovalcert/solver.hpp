#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "ovalcert/cnf.hpp"
#include "ovalcert/proof.hpp"

namespace ovalcert {

enum class Status { Satisfiable, Unsatisfiable, Unknown };

const char* to_string(Status status);

struct SolverStats {
  std::uint64_t conflicts = 0;
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  std::uint64_t restarts = 0;
  std::uint64_t learned = 0;
  std::uint64_t deleted = 0;
  std::uint64_t callback_calls = 0;
  std::uint64_t injected = 0;
};

// Zero means unlimited.
struct Budget {
  std::uint64_t conflicts = 0;
  double seconds = 0;
};

struct SolveResult {
  Status status = Status::Unknown;
  // Indexed by variable; entry 0 unused. Filled when satisfiable.
  std::vector<bool> model;
  // On unsatisfiability under assumptions: negations of a subset of the
  // assumptions that together are refuted.
  std::vector<Lit> failed;
  SolverStats stats;
};

// View handed to programmatic callbacks.
class CallbackContext {
 public:
  virtual ~CallbackContext() = default;
  // +1 true, -1 false, 0 unassigned.
  virtual int value(int var) const = 0;
  int value_of(Lit lit) const { return lit > 0 ? value(lit) : -value(-lit); }
  virtual int block_count() const = 0;
  virtual const std::vector<int>& block(int i) const = 0;
  virtual bool block_assigned(int i) const = 0;
  // Queues a clause for injection after the callback returns. Throws
  // std::invalid_argument if the clause is already satisfied.
  virtual void emit(std::vector<Lit> clause) = 0;
};

using Callback = std::function<void(CallbackContext&)>;

// CDCL solver: two watched literals, first-UIP learning with minimization,
// activity-based branching with phase saving, Luby restarts and LBD-based
// clause database reduction. One instance is single-threaded; learned
// clauses persist across incremental calls.
class Solver {
 public:
  explicit Solver(int var_count = 0);
  explicit Solver(const CnfInstance& instance);
  ~Solver();
  Solver(Solver&&) noexcept;
  Solver& operator=(Solver&&) noexcept;

  int var_count() const;
  void set_var_count(int vars);

  // Original clause; not logged. Returns false once the database is
  // unsatisfiable at the root.
  bool add_clause(std::span<const Lit> clause);
  // Clause justified outside the proof system; logged as a trusted line and
  // never deleted.
  bool add_trusted_clause(std::span<const Lit> clause);

  void set_proof(ProofSink* sink);
  // The callback runs whenever a block listed here becomes fully assigned
  // after propagation, and at every full assignment.
  void set_callback(std::vector<std::vector<int>> blocks, Callback callback);
  void set_seed(std::uint64_t seed);

  SolveResult solve(std::span<const Lit> assumptions = {}, const Budget& budget = {});

  // Logs the empty clause (closing a proof whose open lemmas refute the
  // root).
  void close_proof();

  const SolverStats& stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-shot solve. On unsatisfiability the proof (if any) ends in the empty
// clause, derivable when the assumptions are added as units.
SolveResult solve(const CnfInstance& instance, std::span<const Lit> assumptions = {},
                  const Callback& callback = {}, const std::vector<std::vector<int>>& blocks = {},
                  ProofSink* proof = nullptr, const Budget& budget = {});

struct SolveAllResult {
  Status status = Status::Unknown;  // Unsatisfiable once every model is blocked
  std::vector<std::vector<bool>> models;
  SolverStats stats;
};

// Maps a model to the variables whose true literals form the blocking
// clause (as negations).
using Blocker = std::function<std::vector<int>(const std::vector<bool>& model)>;

// Enumerates models, blocking each with a trusted clause over the positive
// literals of blocker(model).
SolveAllResult solve_all(const CnfInstance& instance, const Blocker& blocker,
                         const Callback& callback = {},
                         const std::vector<std::vector<int>>& blocks = {},
                         ProofSink* proof = nullptr, const Budget& budget = {},
                         std::size_t max_models = 0);

}  // namespace ovalcert
