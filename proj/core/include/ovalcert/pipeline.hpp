#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ovalcert/cnf.hpp"
#include "ovalcert/cube.hpp"
#include "ovalcert/geometry.hpp"
#include "ovalcert/onefact.hpp"
#include "ovalcert/proofcheck.hpp"
#include "ovalcert/solver.hpp"

namespace ovalcert {

namespace fs = std::filesystem;

// OVALCERT_JOBS if set and positive, otherwise the hardware concurrency.
int default_jobs();

// Runs f(0..count-1) on up to `jobs` threads. Results are stored by index so
// the output order never depends on scheduling. The first exception thrown
// by a task is rethrown after all workers stop.
template <typename T, typename F>
std::vector<T> parallel_map(std::size_t count, int jobs, F&& f) {
  std::vector<std::optional<T>> slots(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      {
        std::lock_guard lock(error_mutex);
        if (error) return;
      }
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(count)));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  std::vector<T> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

// ---- artifact files ----

void write_classes(const fs::path& file, const std::vector<OneFactorization>& classes);
std::vector<OneFactorization> read_classes(const fs::path& file, int m);
void write_label_table(const fs::path& file, const LabelTable& table);
LabelTable read_label_table(const fs::path& file);

// Completions of blocks first..last, listed by their One cells.
struct CompletionFile {
  int order = 0;
  int first_block = 0;
  int last_block = 0;
  std::vector<Assignment> completions;  // every Unknown cell of those blocks
};
void write_completions(const fs::path& file, const CompletionFile& completions);
// Throws std::runtime_error for malformed files and cells outside the blocks.
CompletionFile read_completions(const fs::path& file);

// DIMACS file plus its sibling .varmap, checked against the recorded hash.
struct LoadedInstance {
  CnfInstance instance;
  OvalFrame frame;
};
LoadedInstance load_instance(const fs::path& cnf);
void save_instance(const fs::path& cnf, const CnfInstance& instance);

// Frame blocks holding variables of the instance and their variable sets,
// in block order.
struct BlockGroups {
  std::vector<int> blocks;
  std::vector<std::vector<int>> vars;
};
BlockGroups block_groups(const OvalFrame& frame, const CnfInstance& instance);

// ---- stages ----

struct EnumOutput {
  int m = 0;
  std::vector<OneFactorization> classes;
  LabelTable table;
  EnumerationStats stats;
  double seconds = 0;
};
// Writes classes.txt, labels.txt and a manifest record into `out_dir`.
EnumOutput run_enum(int m, const fs::path& out_dir);

struct GenOptions {
  int order = 10;
  int first_block = 2;
  int last_block = 6;
  fs::path classes_dir;  // holds labels.txt
  fs::path out_dir;
  std::vector<int> labels;  // empty = every class
  bool simplify = true;
  int jobs = 1;
};
struct GeneratedInstance {
  int label = 0;
  fs::path cnf;
  int var_count = 0;
  std::size_t clauses = 0;
  FamilyCounts counts;
  FamilyCounts raw_counts;
};
// One instance per class with block `first_block` fixed to the class.
std::vector<GeneratedInstance> run_gen_instances(const GenOptions& options);
fs::path instance_path(const fs::path& dir, int label);

struct CubeStageOptions {
  fs::path instance;
  fs::path out;  // .icnf; refuted branches go to out + ".refuted"
  int cutoff = -1;
  int parts = 0;
  std::size_t max_cubes = 0;  // per part
};
CubeSet run_cube(const CubeStageOptions& options);

enum class CubeStatus { Unsat, BlockedSat, Unknown };
const char* to_string(CubeStatus status);

struct CubeOutcome {
  CubeStatus status = CubeStatus::Unknown;
  int part = 0;
  std::size_t completions = 0;
  std::uint64_t conflicts = 0;
  double seconds = 0;
};

struct PartOutcome {
  int index = 0;
  Cube root;
  std::size_t cubes = 0;
  bool closed = false;  // proof ends in the empty clause
  fs::path proof;
  std::optional<CheckReport> check;
  std::optional<AuditReport> audit;
};

struct CompletionRecord {
  Assignment cells;  // blocks of the instance plus the fixed block
  std::vector<int> labels;  // pessimistic label per block, fixed block first
  bool valid = false;  // validate_partial clean
  bool label_order = false;  // fixed-block label <= every other label
};

struct ConquerOptions {
  fs::path instance;
  fs::path cubes;  // .icnf
  fs::path label_table;
  fs::path proof_dir;
  int jobs = 1;
  Budget budget;  // per cube
  std::size_t max_cubes = 0;  // first N cubes only (0 = all)
  bool symmetry = true;
  bool check = false;  // verify every part proof and audit its trusted lines
  std::size_t memory_limit = std::size_t{4} << 30;
  std::uint64_t seed = 0;
};

struct ConquerResult {
  std::vector<CubeOutcome> cubes;
  std::vector<PartOutcome> parts;
  std::vector<CompletionRecord> completions;
  // EXHAUSTED: every branch closed, the completion list is complete.
  // SLICE: the processed cubes closed but the tree was not covered.
  // UNKNOWN: some cube ran out of budget.
  std::string verdict;
  double seconds = 0;
  bool proofs_ok() const;
};
ConquerResult run_conquer(const ConquerOptions& options);

struct ExtendOutcome {
  Status status = Status::Unknown;
  bool valid = false;  // SAT models only
  Assignment model;
  double seconds = 0;
  std::optional<CheckReport> check;
};
struct ExtendOptions {
  fs::path completions;
  int to_block = 0;
  fs::path proof_dir;  // empty = no proofs
  Budget budget;
  int jobs = 1;
};
// Extending to the last block also searches block 1, producing whole frames.
std::vector<ExtendOutcome> run_extend(const ExtendOptions& options);

struct CountCheck {
  std::string name;
  std::uint64_t expected = 0;
  std::uint64_t actual = 0;
  bool ok() const { return expected == actual; }
};
struct VerifyOptions {
  int order = 10;
  // Columns standing in for blocks 2..6; empty = the frame's own layout.
  std::vector<int> slice_columns;
  bool enumerate = true;  // include the factorization census
  bool cubes = true;      // include the block-restriction check
};
std::vector<CountCheck> verify_counts(const VerifyOptions& options);

}  // namespace ovalcert
