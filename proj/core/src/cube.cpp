#include "ovalcert/cube.hpp"

#include <algorithm>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ovalcert/hash.hpp"

namespace ovalcert {

void validate_groups(int var_count, const std::vector<std::vector<int>>& groups) {
  std::vector<char> seen(var_count + 1, 0);
  for (const auto& g : groups) {
    for (int v : g) {
      if (v < 1 || v > var_count) throw std::invalid_argument("group variable out of range");
      if (seen[v]) throw std::invalid_argument("variable groups overlap");
      seen[v] = 1;
    }
  }
}

void validate_cube(int var_count, const Cube& cube) {
  std::set<int> vars;
  for (Lit l : cube.literals) {
    if (l == 0 || std::abs(l) > var_count) throw std::invalid_argument("cube literal out of range");
    if (!vars.insert(std::abs(l)).second) {
      throw std::invalid_argument("cube repeats a variable");
    }
  }
}

namespace {

// Counter-based unit propagation with an undo trail; cheap enough for tree
// construction and it exposes per-clause free counts for the heuristic.
class Propagator {
 public:
  explicit Propagator(const CnfInstance& instance)
      : clauses_(instance.clauses), value_(instance.var_count + 1, 0),
        occ_(2 * (static_cast<std::size_t>(instance.var_count) + 1)),
        nfalse_(instance.clauses.size(), 0), ntrue_(instance.clauses.size(), 0),
        size_(instance.clauses.size(), 0), free_(instance.var_count) {
    for (std::size_t c = 0; c < clauses_.size(); ++c) {
      const auto cl = clauses_[c];
      std::set<Lit> distinct(cl.begin(), cl.end());
      bool taut = false;
      for (Lit l : distinct) taut |= distinct.contains(-l);
      if (taut) {
        ntrue_[c] = 1;  // never constrains
        continue;
      }
      for (Lit l : distinct) occ_[index(l)].push_back(static_cast<int>(c));
      size_[c] = static_cast<int>(distinct.size());
      if (distinct.empty()) conflict_ = true;
      if (distinct.size() == 1) pending_.push_back(*distinct.begin());
    }
  }

  int free_count() const { return free_; }
  int value(int v) const { return value_[v]; }
  int lit_value(Lit l) const { return l > 0 ? value_[l] : -value_[-l]; }
  std::size_t mark() const { return trail_.size(); }

  // Asserts l and propagates. Returns false on conflict; the caller must
  // undo back to a mark.
  bool assume(Lit l) {
    if (conflict_) return false;
    pending_.push_back(l);
    return propagate();
  }
  bool propagate() {
    while (!pending_.empty() && !conflict_) {
      const Lit l = pending_.back();
      pending_.pop_back();
      const int v = lit_value(l);
      if (v == 1) continue;
      if (v == -1) {
        conflict_ = true;
        break;
      }
      set(l);
    }
    pending_.clear();
    return !conflict_;
  }
  void undo(std::size_t to) {
    while (trail_.size() > to) {
      const Lit l = trail_.back();
      trail_.pop_back();
      for (int c : occ_[index(l)]) --ntrue_[c];
      for (int c : occ_[index(-l)]) --nfalse_[c];
      value_[std::abs(l)] = 0;
      ++free_;
    }
    conflict_ = false;
    pending_.clear();
  }

  // Occurrences in open clauses with at most three free literals.
  int short_score(int v) const {
    int s = 0;
    for (Lit l : {v, -v}) {
      for (int c : occ_[index(l)]) {
        if (ntrue_[c] == 0 && size_[c] - nfalse_[c] <= 3) ++s;
      }
    }
    return s;
  }

 private:
  std::size_t index(Lit l) const { return 2 * static_cast<std::size_t>(std::abs(l)) + (l < 0); }

  void set(Lit l) {
    value_[std::abs(l)] = l > 0 ? 1 : -1;
    --free_;
    trail_.push_back(l);
    for (int c : occ_[index(l)]) ++ntrue_[c];
    for (int c : occ_[index(-l)]) {
      ++nfalse_[c];
      if (ntrue_[c] != 0) continue;
      if (nfalse_[c] == size_[c]) {
        conflict_ = true;
      } else if (nfalse_[c] == size_[c] - 1) {
        for (Lit x : clauses_[c]) {
          if (lit_value(x) == 0) {
            pending_.push_back(x);
            break;
          }
        }
      }
    }
  }

  const ClauseList& clauses_;
  std::vector<int> value_;
  std::vector<std::vector<int>> occ_;
  std::vector<int> nfalse_, ntrue_;
  std::vector<int> size_;
  std::vector<Lit> trail_, pending_;
  int free_;
  bool conflict_ = false;
};

std::vector<std::vector<int>> effective_groups(const CnfInstance& instance,
                                               const std::vector<std::vector<int>>& groups) {
  validate_groups(instance.var_count, groups);
  if (!groups.empty()) return groups;
  std::vector<int> all(instance.var_count);
  for (int v = 1; v <= instance.var_count; ++v) all[v - 1] = v;
  return {all};
}

class Tree {
 public:
  Tree(const CnfInstance& instance, const std::vector<std::vector<int>>& groups)
      : prop_(instance), groups_(effective_groups(instance, groups)),
        group_of_(instance.var_count + 1, -1) {
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      for (int v : groups_[g]) group_of_[v] = static_cast<int>(g);
    }
    root_ok_ = prop_.propagate();
    root_free_ = prop_.free_count();
  }

  Propagator& prop() { return prop_; }
  bool root_ok() const { return root_ok_; }
  int root_free() const { return root_free_; }

  // Group that a cube starting with `first` is confined to; for an empty
  // cube the group with the most assigned variables.
  int group_for(const Cube& cube) {
    for (Lit l : cube.literals) {
      if (group_of_[std::abs(l)] >= 0) return group_of_[std::abs(l)];
    }
    int best = -1;
    int best_assigned = -1;
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      int assigned = 0;
      bool has_free = false;
      for (int v : groups_[g]) {
        if (prop_.value(v) != 0) {
          ++assigned;
        } else {
          has_free = true;
        }
      }
      if (has_free && assigned > best_assigned) {
        best = static_cast<int>(g);
        best_assigned = assigned;
      }
    }
    return best;
  }

  int branch_var(int group) const {
    if (group < 0) return 0;
    int best = 0;
    int best_score = -1;
    for (int v : groups_[group]) {
      if (prop_.value(v) != 0) continue;
      const int s = prop_.short_score(v);
      if (s > best_score) {
        best = v;
        best_score = s;
      }
    }
    return best;
  }

  // Applies a cube; false if it propagates to a conflict.
  bool apply(const Cube& cube) {
    for (Lit l : cube.literals) {
      if (!prop_.assume(l)) return false;
    }
    return true;
  }

 private:
  Propagator prop_;
  std::vector<std::vector<int>> groups_;
  std::vector<int> group_of_;
  bool root_ok_ = true;
  int root_free_ = 0;
};

struct CubeRun {
  Tree& tree;
  int cutoff;
  std::size_t max_cubes;
  int group;
  CubeSet& out;

  bool full() const { return max_cubes != 0 && out.cubes.size() >= max_cubes; }

  void dfs(Cube& cube) {
    if (full()) return;
    Propagator& p = tree.prop();
    const int var = (tree.root_free() - p.free_count() >= cutoff) ? 0 : tree.branch_var(group);
    if (var == 0) {
      out.cubes.push_back(cube);
      return;
    }
    for (Lit l : {var, -var}) {
      if (full()) return;
      const std::size_t mark = p.mark();
      cube.literals.push_back(l);
      if (p.assume(l)) {
        dfs(cube);
      } else {
        out.refuted.push_back(cube);
      }
      cube.literals.pop_back();
      p.undo(mark);
    }
  }
};

}  // namespace

CubeSet generate_cubes(const CnfInstance& instance, const std::vector<std::vector<int>>& groups,
                       const CubeOptions& options) {
  if (options.cutoff < 0) throw std::invalid_argument("cutoff must be non-negative");
  validate_cube(instance.var_count, options.prefix);
  CubeSet out;
  out.cutoff = options.cutoff;
  Tree tree(instance, groups);
  Cube cube = options.prefix;
  if (!tree.root_ok() || !tree.apply(cube)) {
    out.refuted.push_back(cube);
    return out;
  }
  if (options.cutoff > tree.root_free()) {
    out.cubes.push_back(cube);
    return out;
  }
  CubeRun run{tree, options.cutoff, options.max_cubes, tree.group_for(cube), out};
  run.dfs(cube);
  return out;
}

CubeSet toplevel_split(const CnfInstance& instance, const std::vector<std::vector<int>>& groups,
                       int parts) {
  if (parts < 1) throw std::invalid_argument("parts must be at least 1");
  CubeSet out;
  out.parts = parts;
  Tree tree(instance, groups);
  if (!tree.root_ok()) throw std::invalid_argument("instance is refuted by unit propagation");
  Propagator& p = tree.prop();
  const int group = tree.group_for(Cube{});

  struct Leaf {
    Cube cube;
    int free;
  };
  std::vector<Leaf> leaves{{Cube{}, p.free_count()}};
  std::vector<char> exhausted{0};
  while (static_cast<int>(leaves.size()) < parts) {
    int pick = -1;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      if (!exhausted[i] && (pick < 0 || leaves[i].free > leaves[pick].free)) pick = static_cast<int>(i);
    }
    if (pick < 0) {
      throw std::invalid_argument("cannot reach " + std::to_string(parts) + " parts");
    }
    const std::size_t mark = p.mark();
    tree.apply(leaves[pick].cube);
    const int var = tree.branch_var(group);
    if (var == 0) {
      p.undo(mark);
      exhausted[pick] = 1;
      continue;
    }
    std::vector<Leaf> children;
    for (Lit l : {var, -var}) {
      Cube c = leaves[pick].cube;
      c.literals.push_back(l);
      const std::size_t inner = p.mark();
      if (p.assume(l)) {
        children.push_back({c, p.free_count()});
      } else {
        out.refuted.push_back(c);
      }
      p.undo(inner);
    }
    p.undo(mark);
    leaves.erase(leaves.begin() + pick);
    exhausted.erase(exhausted.begin() + pick);
    leaves.insert(leaves.begin() + pick, children.begin(), children.end());
    exhausted.insert(exhausted.begin() + pick, children.size(), 0);
    if (leaves.empty()) throw std::invalid_argument("every branch is refuted before reaching the part count");
  }
  for (auto& l : leaves) out.cubes.push_back(std::move(l.cube));
  out.part_cubes = out.cubes;
  for (int k = 0; k < parts; ++k) out.cube_part.push_back(k);
  // Refuted splits belong to no part; they are closed in the top proof.
  out.refuted_part.assign(out.refuted.size(), -1);
  return out;
}

CubeSet split_then_cube(const CnfInstance& instance, const std::vector<std::vector<int>>& groups,
                        int parts, int cutoff, std::size_t max_cubes_per_part) {
  CubeSet top = toplevel_split(instance, groups, parts);
  CubeSet out;
  out.parts = parts;
  out.cutoff = cutoff;
  out.part_cubes = top.part_cubes;
  out.refuted = top.refuted;
  out.refuted_part = top.refuted_part;
  for (int k = 0; k < parts; ++k) {
    CubeSet inner = generate_cubes(instance, groups, {cutoff, max_cubes_per_part, top.part_cubes[k]});
    for (auto& c : inner.cubes) {
      out.cubes.push_back(std::move(c));
      out.cube_part.push_back(k);
    }
    for (auto& c : inner.refuted) {
      out.refuted.push_back(std::move(c));
      out.refuted_part.push_back(k);
    }
  }
  return out;
}

std::vector<Cube> closure_prefixes(const std::vector<Cube>& leaves, const Cube& root) {
  std::set<std::vector<Lit>> nodes;
  const std::size_t base = root.literals.size();
  for (const auto& leaf : leaves) {
    for (std::size_t len = base + 1; len < leaf.literals.size(); ++len) {
      nodes.insert({leaf.literals.begin(), leaf.literals.begin() + static_cast<std::ptrdiff_t>(len)});
    }
  }
  std::vector<Cube> out;
  for (const auto& n : nodes) out.push_back({n});
  std::stable_sort(out.begin(), out.end(), [](const Cube& a, const Cube& b) {
    return a.literals.size() > b.literals.size();
  });
  return out;
}

bool is_complete_tree(const std::vector<Cube>& leaves, const Cube& root) {
  const std::size_t base = root.literals.size();
  std::set<std::vector<Lit>> leaf_set;
  for (const auto& l : leaves) {
    if (l.literals.size() < base ||
        !std::equal(root.literals.begin(), root.literals.end(), l.literals.begin())) {
      return false;
    }
    if (!leaf_set.insert(l.literals).second) return false;
  }
  if (leaf_set.contains(root.literals)) return leaf_set.size() == 1;
  std::set<std::vector<Lit>> nodes;
  for (const auto& l : leaf_set) {
    for (std::size_t len = base; len <= l.size(); ++len) {
      nodes.insert({l.begin(), l.begin() + static_cast<std::ptrdiff_t>(len)});
    }
  }
  // Every internal node needs both children, differing in the sign of one
  // fresh literal; no leaf may sit above another node.
  for (const auto& n : nodes) {
    if (leaf_set.contains(n)) continue;
    Lit branch = 0;
    int children = 0;
    for (const auto& m : nodes) {
      if (m.size() != n.size() + 1 || !std::equal(n.begin(), n.end(), m.begin())) continue;
      ++children;
      if (branch == 0) {
        branch = m.back();
      } else if (m.back() != -branch) {
        return false;
      }
    }
    if (children != 2) return false;
  }
  for (const auto& l : leaf_set) {
    for (const auto& m : nodes) {
      if (m.size() > l.size() && std::equal(l.begin(), l.end(), m.begin())) return false;
    }
  }
  return true;
}

namespace {

void write_lits(std::ostream& out, const char* prefix, std::span<const Lit> lits) {
  out << prefix;
  for (Lit l : lits) out << l << ' ';
  out << "0\n";
}

std::vector<Lit> parse_lits(std::istringstream& in, const std::string& line) {
  std::vector<Lit> lits;
  long long x = 0;
  while (in >> x) {
    if (x == 0) {
      std::string rest;
      if (in >> rest) throw std::runtime_error("text after terminating 0: " + line);
      return lits;
    }
    if (x > INT32_MAX || x < -INT32_MAX) throw std::runtime_error("literal out of range: " + line);
    lits.push_back(static_cast<Lit>(x));
  }
  if (!in.eof()) throw std::runtime_error("malformed literal: " + line);
  throw std::runtime_error("line is not terminated by 0: " + line);
}

}  // namespace

void write_icnf(std::ostream& out, const CnfInstance& instance, const CubeSet& cubes) {
  out << "c ovalcert icnf\n";
  out << "c vars " << instance.var_count << '\n';
  if (!cubes.source_hash.empty()) out << "c source-sha256 " << cubes.source_hash << '\n';
  if (cubes.cutoff >= 0) out << "c cutoff " << cubes.cutoff << '\n';
  if (cubes.parts > 0) out << "c parts " << cubes.parts << '\n';
  out << "p inccnf\n";
  for (std::size_t i = 0; i < instance.clauses.size(); ++i) write_lits(out, "", instance.clauses[i]);
  const bool split = cubes.parts > 0 && !cubes.part_cubes.empty();
  int next_part = 0;
  // Parts whose cubes were all refuted still get a header, so part indices
  // stay positional.
  auto headers_through = [&](int part) {
    for (; next_part <= part; ++next_part) {
      out << "c part " << next_part << ' ';
      for (Lit l : cubes.part_cubes[next_part].literals) out << l << ' ';
      out << "0\n";
    }
  };
  for (std::size_t i = 0; i < cubes.cubes.size(); ++i) {
    if (split && i < cubes.cube_part.size()) headers_through(cubes.cube_part[i]);
    write_lits(out, "a ", cubes.cubes[i].literals);
  }
  if (split) headers_through(static_cast<int>(cubes.part_cubes.size()) - 1);
}

IcnfFile read_icnf(std::istream& in) {
  IcnfFile f;
  std::string line;
  bool header = false;
  int declared_vars = -1;
  int max_var = 0;
  int part = -1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    if (line[0] == 'c') {
      std::string c, key;
      ss >> c >> key;
      if (key == "vars") {
        ss >> declared_vars;
      } else if (key == "source-sha256") {
        ss >> f.cubes.source_hash;
      } else if (key == "cutoff") {
        ss >> f.cubes.cutoff;
      } else if (key == "parts") {
        ss >> f.cubes.parts;
      } else if (key == "part") {
        ss >> part;
        if (part != static_cast<int>(f.cubes.part_cubes.size())) {
          throw std::runtime_error("parts out of order: " + line);
        }
        f.cubes.part_cubes.push_back({parse_lits(ss, line)});
      }
      continue;
    }
    if (line.rfind("p ", 0) == 0) {
      if (line != "p inccnf") throw std::runtime_error("bad header: " + line);
      header = true;
      continue;
    }
    if (!header) throw std::runtime_error("missing p inccnf header");
    if (line[0] == 'a') {
      ss.ignore(1);
      Cube cube{parse_lits(ss, line)};
      for (Lit l : cube.literals) max_var = std::max(max_var, std::abs(l));
      f.cubes.cubes.push_back(std::move(cube));
      if (part >= 0) f.cubes.cube_part.push_back(part);
      continue;
    }
    auto lits = parse_lits(ss, line);
    for (Lit l : lits) max_var = std::max(max_var, std::abs(l));
    f.instance.clauses.add(lits);
  }
  if (!header) throw std::runtime_error("missing p inccnf header");
  if (declared_vars >= 0 && max_var > declared_vars) throw std::runtime_error("literal exceeds declared variables");
  f.instance.var_count = declared_vars >= 0 ? declared_vars : max_var;
  return f;
}

void write_cube_lines(std::ostream& out, const std::vector<Cube>& cubes) {
  for (const auto& c : cubes) write_lits(out, "a ", c.literals);
}

std::vector<Cube> read_cube_lines(std::istream& in) {
  std::vector<Cube> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == 'c') continue;
    if (line[0] != 'a') throw std::runtime_error("expected a cube line: " + line);
    std::istringstream ss(line.substr(1));
    out.push_back({parse_lits(ss, line)});
  }
  return out;
}

}  // namespace ovalcert
