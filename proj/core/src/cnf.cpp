#include "ovalcert/cnf.hpp"

#include <charconv>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ovalcert/hash.hpp"

namespace ovalcert {

void ClauseList::add(std::span<const Lit> clause) {
  lits_.insert(lits_.end(), clause.begin(), clause.end());
  offsets_.push_back(lits_.size());
}

void ClauseList::reserve(std::size_t clauses, std::size_t literals) {
  offsets_.reserve(clauses + 1);
  lits_.reserve(literals);
}

int VarMap::add(CellRef cell) {
  auto [it, inserted] = index_.emplace(cell, size() + 1);
  if (!inserted) throw std::invalid_argument("cell already has a variable");
  cells_.push_back(cell);
  return it->second;
}

int VarMap::var_of(CellRef cell) const {
  auto it = index_.find(cell);
  return it == index_.end() ? 0 : it->second;
}

void VarMap::write(std::ostream& out) const {
  for (std::size_t v = 0; v < cells_.size(); ++v) {
    out << v + 1 << ' ' << cells_[v].row << ' ' << cells_[v].col << '\n';
  }
}

VarMap VarMap::read(std::istream& in) {
  VarMap map;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == 'c' || line[0] == '#') continue;
    std::istringstream ls(line);
    int v = 0;
    CellRef cell;
    if (!(ls >> v >> cell.row >> cell.col)) throw std::runtime_error("malformed varmap line: " + line);
    if (v != map.size() + 1) throw std::runtime_error("varmap ids must be consecutive from 1");
    map.add(cell);
  }
  return map;
}

std::string VarMap::content_hash() const {
  std::ostringstream out;
  write(out);
  return sha256_hex(out.str());
}

namespace {

std::string format_ranges(const std::vector<int>& cols) {
  std::string out;
  std::size_t i = 0;
  while (i < cols.size()) {
    std::size_t j = i;
    while (j + 1 < cols.size() && cols[j + 1] == cols[j] + 1) ++j;
    if (!out.empty()) out += ',';
    out += std::to_string(cols[i]);
    if (j > i) out += "-" + std::to_string(cols[j]);
    i = j + 1;
  }
  return out;
}

std::vector<int> parse_ranges(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    const auto dash = part.find('-');
    const int lo = std::stoi(part.substr(0, dash));
    const int hi = dash == std::string::npos ? lo : std::stoi(part.substr(dash + 1));
    for (int c = lo; c <= hi; ++c) out.push_back(c);
  }
  return out;
}

struct FamilyField {
  const char* name;
  std::uint64_t FamilyCounts::*field;
};

constexpr FamilyField kFamilies[] = {
    {"intersect-at-most-once", &FamilyCounts::intersect_at_most_once},
    {"oval-intersection", &FamilyCounts::oval_intersection},
    {"known-row-intersection", &FamilyCounts::known_row_intersection},
    {"unit-fixes", &FamilyCounts::unit_fixes},
    {"block-fix", &FamilyCounts::block_fix},
};

}  // namespace

void write_dimacs(const CnfInstance& instance, std::ostream& out) {
  const auto& p = instance.provenance;
  out << "c ovalcert cnf\n";
  if (p.order > 0) {
    out << "c order " << p.order << '\n';
    out << "c columns " << (p.columns.empty() ? "-" : format_ranges(p.columns)) << '\n';
    out << "c simplify " << (p.simplify ? 1 : 0) << '\n';
  }
  if (p.fixed_block > 0) {
    out << "c fixed-block " << p.fixed_block << " label " << p.fixed_label << " variables "
        << p.fixed_variables << '\n';
  }
  for (const auto& f : kFamilies) {
    out << "c family " << f.name << ' ' << instance.counts.*f.field << ' '
        << instance.raw_counts.*f.field << '\n';
  }
  if (instance.empty_clauses > 0) out << "c empty-clauses " << instance.empty_clauses << '\n';
  out << "c varmap-sha256 " << instance.varmap.content_hash() << '\n';
  out << "p cnf " << instance.var_count << ' ' << instance.clauses.size() << '\n';
  std::string line;
  for (std::size_t i = 0; i < instance.clauses.size(); ++i) {
    line.clear();
    for (Lit l : instance.clauses[i]) {
      line += std::to_string(l);
      line += ' ';
    }
    line += "0\n";
    out << line;
  }
}

CnfInstance read_dimacs(std::istream& in) {
  CnfInstance inst;
  std::string line;
  long long declared = -1;
  bool header = false;
  while (!header && std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == 'c') {
      std::istringstream cs(line.substr(1));
      std::string key;
      cs >> key;
      auto& p = inst.provenance;
      if (key == "order") {
        cs >> p.order;
      } else if (key == "columns") {
        std::string r;
        cs >> r;
        if (r != "-") p.columns = parse_ranges(r);
      } else if (key == "simplify") {
        int s = 1;
        cs >> s;
        p.simplify = s != 0;
      } else if (key == "fixed-block") {
        std::string w;
        cs >> p.fixed_block >> w >> p.fixed_label >> w >> p.fixed_variables;
      } else if (key == "family") {
        std::string name;
        std::uint64_t emitted = 0, raw = 0;
        cs >> name >> emitted >> raw;
        for (const auto& f : kFamilies) {
          if (name == f.name) {
            inst.counts.*f.field = emitted;
            inst.raw_counts.*f.field = raw;
          }
        }
      } else if (key == "empty-clauses") {
        cs >> inst.empty_clauses;
      }
      continue;
    }
    std::istringstream hs(line);
    std::string p, fmt;
    long long v = -1;
    if (!(hs >> p >> fmt >> v >> declared) || p != "p" || fmt != "cnf" || v < 0 || declared < 0) {
      throw std::runtime_error("malformed DIMACS header: " + line);
    }
    std::string extra;
    if (hs >> extra) throw std::runtime_error("malformed DIMACS header: " + line);
    inst.var_count = static_cast<int>(v);
    header = true;
  }
  if (!header) throw std::runtime_error("missing DIMACS header");

  std::vector<Lit> clause;
  bool open = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == 'c') continue;
    const char* s = line.data();
    const char* end = s + line.size();
    while (s < end) {
      while (s < end && (*s == ' ' || *s == '\t' || *s == '\r')) ++s;
      if (s >= end) break;
      long long lit = 0;
      auto [ptr, ec] = std::from_chars(s, end, lit);
      if (ec != std::errc() || (ptr < end && *ptr != ' ' && *ptr != '\t' && *ptr != '\r')) {
        throw std::runtime_error("malformed literal in line: " + line);
      }
      s = ptr;
      if (lit == 0) {
        inst.clauses.add(clause);
        clause.clear();
        open = false;
        continue;
      }
      if (std::llabs(lit) > inst.var_count) {
        throw std::runtime_error("literal " + std::to_string(lit) + " exceeds variable count " +
                                 std::to_string(inst.var_count));
      }
      clause.push_back(static_cast<Lit>(lit));
      open = true;
    }
  }
  if (open) throw std::runtime_error("last clause is missing its terminating 0");
  if (static_cast<long long>(inst.clauses.size()) != declared) {
    throw std::runtime_error("header declares " + std::to_string(declared) + " clauses, found " +
                             std::to_string(inst.clauses.size()));
  }
  return inst;
}

}  // namespace ovalcert
