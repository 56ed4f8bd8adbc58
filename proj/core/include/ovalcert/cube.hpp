#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ovalcert/cnf.hpp"

namespace ovalcert {

struct Cube {
  std::vector<Lit> literals;
  bool operator==(const Cube&) const = default;
};

struct CubeSet {
  std::vector<Cube> cubes;
  // Branches closed by unit propagation alone.
  std::vector<Cube> refuted;
  std::string source_hash;  // sha256 of the source DIMACS text
  int cutoff = -1;          // -1 when not cube-split
  int parts = 0;            // 0 when not toplevel-split
  // Toplevel part of each cube (and each refuted branch), empty when parts == 0.
  std::vector<int> cube_part;
  std::vector<int> refuted_part;
  // Part prefixes when toplevel-split.
  std::vector<Cube> part_cubes;
};

// Throws std::invalid_argument for overlapping groups, out of range
// variables or a cube with duplicate or complementary literals.
void validate_groups(int var_count, const std::vector<std::vector<int>>& groups);
void validate_cube(int var_count, const Cube& cube);

struct CubeOptions {
  int cutoff = 0;
  // Stop after this many cubes (0 = unlimited). The result then covers only
  // part of the tree.
  std::size_t max_cubes = 0;
  // Branch below this cube (e.g. a toplevel part).
  Cube prefix;
};

// Binary branching tree over one variable group per cube. A branch stops
// once unit propagation leaves at least `cutoff` fewer free variables than
// at the root, or when its group has no free variable left. Branches that
// propagate to a conflict go to `refuted`. An empty group list means one
// group holding every variable.
CubeSet generate_cubes(const CnfInstance& instance, const std::vector<std::vector<int>>& groups,
                       const CubeOptions& options);

// Splits into exactly `parts` cubes, repeatedly branching the leaf with the
// most free variables. Throws std::invalid_argument when fewer leaves are
// reachable.
CubeSet toplevel_split(const CnfInstance& instance, const std::vector<std::vector<int>>& groups,
                       int parts);

// Toplevel split followed by cube generation inside each part.
CubeSet split_then_cube(const CnfInstance& instance, const std::vector<std::vector<int>>& groups,
                        int parts, int cutoff, std::size_t max_cubes_per_part = 0);

// Cubes the search tree needs closed, in the order lemmas must be derived:
// internal-node prefixes strictly below `root`, deepest first.
std::vector<Cube> closure_prefixes(const std::vector<Cube>& leaves, const Cube& root);

// True when `leaves` are exactly the leaves of a binary tree rooted at
// `root` whose internal nodes branch on one variable in both signs.
bool is_complete_tree(const std::vector<Cube>& leaves, const Cube& root);

// Incremental CNF: "p inccnf", clause lines, then "a l1 .. lk 0" cube lines.
void write_icnf(std::ostream& out, const CnfInstance& instance, const CubeSet& cubes);
struct IcnfFile {
  CnfInstance instance;
  CubeSet cubes;
};
// Throws std::runtime_error on malformed input.
IcnfFile read_icnf(std::istream& in);

// Sidecar list of cube lines.
void write_cube_lines(std::ostream& out, const std::vector<Cube>& cubes);
std::vector<Cube> read_cube_lines(std::istream& in);

}  // namespace ovalcert
