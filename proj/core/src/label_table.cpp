#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "ovalcert/onefact.hpp"

namespace ovalcert {

LabelTable::LabelTable(std::vector<LabelEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.label != static_cast<int>(i) + 1) throw std::invalid_argument("labels must be 1..N in order");
    if (i == 0) m_ = e.factorization.vertex_count();
    if (e.factorization.vertex_count() != m_) throw std::invalid_argument("mixed vertex counts");
    if (!by_form_.emplace(e.form, e.label).second) {
      throw std::invalid_argument("duplicate isomorphism class in label table");
    }
    auto& p = pessimistic_[e.pattern];
    p = std::max(p, e.label);
  }
}

int LabelTable::pessimistic(const CyclePattern& pattern) const {
  auto it = pessimistic_.find(pattern);
  return it == pessimistic_.end() ? 0 : it->second;
}

int LabelTable::label_of(const OneFactorization& fz) const {
  auto it = by_form_.find(factorization_form(fz.vertex_count(), fz.factors()));
  return it == by_form_.end() ? 0 : it->second;
}

void LabelTable::write(std::ostream& out) const {
  out << "# ovalcert label table\n";
  out << "# m " << m_ << " classes " << entries_.size() << " patterns " << pessimistic_.size()
      << "\n";
  out << "# label automorphisms pattern factorization\n";
  for (const auto& e : entries_) {
    out << e.label << ' ' << e.automorphisms << ' ' << e.pattern.form.hex() << ' '
        << format_factorization(e.factorization) << '\n';
  }
}

LabelTable LabelTable::read(std::istream& in) {
  std::vector<LabelEntry> entries;
  int m = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string key;
      if (hs >> key && key == "m") hs >> m;
      continue;
    }
    if (m < 0) throw std::invalid_argument("label table missing '# m' header");
    std::istringstream ls(line);
    LabelEntry e;
    std::string pattern_hex, edges;
    if (!(ls >> e.label >> e.automorphisms >> pattern_hex >> edges)) {
      throw std::invalid_argument("malformed label table line " + std::to_string(lineno));
    }
    e.factorization = parse_factorization(m, edges);
    e.pattern = cycle_pattern(e.factorization);
    if (e.pattern.form.hex() != pattern_hex) {
      throw std::invalid_argument("pattern mismatch on label table line " + std::to_string(lineno));
    }
    e.form = factorization_form(m, e.factorization.factors());
    entries.push_back(std::move(e));
  }
  return LabelTable(std::move(entries));
}

LabelTable build_label_table(const std::vector<OneFactorization>& fzs) {
  std::vector<LabelEntry> entries;
  entries.reserve(fzs.size());
  for (const auto& fz : fzs) {
    LabelEntry e;
    e.factorization = fz;
    e.form = factorization_form(fz.vertex_count(), fz.factors());
    e.pattern = cycle_pattern(fz);
    // The oval-plus-block graph also swaps the two block-line points.
    e.automorphisms = automorphism_count(block_incidence_graph(fz));
    entries.push_back(std::move(e));
  }
  std::sort(entries.begin(), entries.end(), [](const LabelEntry& a, const LabelEntry& b) {
    return std::tie(a.automorphisms, a.pattern, a.form) <
           std::tie(b.automorphisms, b.pattern, b.form);
  });
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].label = static_cast<int>(i) + 1;
  return LabelTable(std::move(entries));
}

}  // namespace ovalcert
