#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ovalcert/geometry.hpp"

namespace ovalcert {

// Literals use DIMACS conventions: variable v is v, its negation is -v.
using Lit = int;

// Flat clause storage.
class ClauseList {
 public:
  void add(std::span<const Lit> clause);
  void add(std::initializer_list<Lit> clause) { add(std::span<const Lit>(clause.begin(), clause.size())); }

  std::size_t size() const { return offsets_.size() - 1; }
  bool empty() const { return size() == 0; }
  std::span<const Lit> operator[](std::size_t i) const {
    return {lits_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::size_t literal_count() const { return lits_.size(); }
  void reserve(std::size_t clauses, std::size_t literals);

  bool operator==(const ClauseList&) const = default;

 private:
  std::vector<Lit> lits_;
  std::vector<std::size_t> offsets_{0};
};

// Bijection between Unknown frame cells and variables 1..V.
class VarMap {
 public:
  int add(CellRef cell);
  int size() const { return static_cast<int>(cells_.size()); }
  // 0 when the cell has no variable.
  int var_of(CellRef cell) const;
  CellRef cell_of(int var) const { return cells_.at(var - 1); }
  const std::vector<CellRef>& cells() const { return cells_; }

  // Sidecar format: one "v r c" line per variable.
  void write(std::ostream& out) const;
  static VarMap read(std::istream& in);
  std::string content_hash() const;

  bool operator==(const VarMap& o) const { return cells_ == o.cells_; }

 private:
  std::vector<CellRef> cells_;
  std::map<CellRef, int> index_;
};

// Clause tallies per encoding family.
struct FamilyCounts {
  std::uint64_t intersect_at_most_once = 0;
  std::uint64_t oval_intersection = 0;
  std::uint64_t known_row_intersection = 0;
  std::uint64_t unit_fixes = 0;
  std::uint64_t block_fix = 0;

  std::uint64_t total() const {
    return intersect_at_most_once + oval_intersection + known_row_intersection + unit_fixes +
           block_fix;
  }
  bool operator==(const FamilyCounts&) const = default;
};

struct Provenance {
  int order = 0;
  std::vector<int> columns;  // non-oval columns, ascending
  bool simplify = true;
  int fixed_block = 0;       // block fixed to a factorization, 0 if none
  int fixed_label = 0;       // its class label, 0 if unknown
  int fixed_variables = 0;   // variables eliminated by the fix

  bool operator==(const Provenance&) const = default;
};

struct CnfInstance {
  int var_count = 0;
  ClauseList clauses;
  // Clauses actually present, by family; sums to clauses.size().
  FamilyCounts counts;
  // Family sizes before substituting fixed cells.
  FamilyCounts raw_counts;
  // Clauses that became empty after substitution (an encode-time refutation).
  std::uint64_t empty_clauses = 0;
  VarMap varmap;
  Provenance provenance;
};

// DIMACS with comment lines carrying provenance, family counts and the
// varmap hash ahead of the "p cnf" header.
void write_dimacs(const CnfInstance& instance, std::ostream& out);
// Throws std::runtime_error on a malformed header, out-of-range literal,
// missing terminating 0 or clause count mismatch.
CnfInstance read_dimacs(std::istream& in);

}  // namespace ovalcert
