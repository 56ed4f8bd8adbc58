#include "ovalcert/onefact.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ovalcert {

OneFactor::OneFactor(std::vector<int> mate) : mate_(std::move(mate)) {
  const int m = static_cast<int>(mate_.size());
  for (int v = 0; v < m; ++v) {
    const int u = mate_[v];
    if (u < 0 || u >= m || u == v || mate_[u] != v) {
      throw std::invalid_argument("mate array is not a perfect matching");
    }
  }
}

OneFactor OneFactor::from_edges(int m, const std::vector<std::pair<int, int>>& edges) {
  std::vector<int> mate(m, -1);
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= m || b >= m || a == b || mate[a] != -1 || mate[b] != -1) {
      throw std::invalid_argument("edges do not form a matching");
    }
    mate[a] = b;
    mate[b] = a;
  }
  if (std::find(mate.begin(), mate.end(), -1) != mate.end()) {
    throw std::invalid_argument("matching is not perfect");
  }
  return OneFactor(std::move(mate));
}

std::vector<std::pair<int, int>> OneFactor::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int v = 0; v < vertex_count(); ++v) {
    if (v < mate_[v]) out.emplace_back(v, mate_[v]);
  }
  return out;
}

OneFactorization::OneFactorization(int m, std::vector<OneFactor> factors)
    : m_(m), factors_(std::move(factors)) {
  if (m < 2 || m % 2 != 0) throw std::invalid_argument("factorization needs even m >= 2");
  if (static_cast<int>(factors_.size()) != m - 1) {
    throw std::invalid_argument("factorization of K_m needs m-1 factors");
  }
  std::vector<int> used(m * m, 0);
  for (const auto& f : factors_) {
    if (f.vertex_count() != m) throw std::invalid_argument("factor on wrong vertex set");
    for (auto [a, b] : f.edges()) {
      if (used[a * m + b]++) throw std::invalid_argument("factors share an edge");
    }
  }
}

OneFactorization OneFactorization::sorted_by_vertex_zero() const {
  std::vector<OneFactor> sorted(factors_.size());
  for (const auto& f : factors_) sorted[f.mate(0) - 1] = f;
  return OneFactorization(m_, std::move(sorted));
}

CycleType cycle_type(const OneFactor& f1, const OneFactor& f2) {
  const int m = f1.vertex_count();
  if (f2.vertex_count() != m) throw std::invalid_argument("matchings on different vertex sets");
  std::vector<char> seen(m, 0);
  CycleType lengths;
  for (int v = 0; v < m; ++v) {
    if (seen[v]) continue;
    if (f1.mate(v) == f2.mate(v)) throw std::invalid_argument("matchings share an edge");
    int len = 0;
    int u = v;
    do {
      seen[u] = 1;
      const int w = f1.mate(u);
      seen[w] = 1;
      u = f2.mate(w);
      len += 2;
    } while (u != v);
    lengths.push_back(len);
  }
  std::sort(lengths.begin(), lengths.end());
  return lengths;
}

bool is_hamiltonian_pair(const OneFactor& f1, const OneFactor& f2) {
  const CycleType t = cycle_type(f1, f2);
  return t.size() == 1;
}

namespace {

void check_even(int m, int lo, int hi) {
  if (m < lo || m > hi || m % 2 != 0) {
    throw std::invalid_argument("m must be even in " + std::to_string(lo) + ".." +
                                std::to_string(hi) + ", got " + std::to_string(m));
  }
}

// Calls f(mate) for every perfect matching of the graph given by `avail`
// adjacency bitmasks that contains the edge {a, b}.
template <typename F>
void for_each_matching(int m, const std::vector<std::uint32_t>& avail, int a, int b, F&& f) {
  std::vector<int> mate(m, -1);
  std::uint32_t free = (m == 32 ? ~0U : ((1U << m) - 1));
  mate[a] = b;
  mate[b] = a;
  free &= ~((1U << a) | (1U << b));
  auto rec = [&](auto&& self, std::uint32_t left) -> void {
    if (left == 0) {
      f(mate);
      return;
    }
    const int v = std::countr_zero(left);
    std::uint32_t options = avail[v] & left & ~(1U << v);
    while (options) {
      const int u = std::countr_zero(options);
      options &= options - 1;
      mate[v] = u;
      mate[u] = v;
      self(self, left & ~((1U << v) | (1U << u)));
    }
    mate[v] = -1;
  };
  if ((avail[a] >> b & 1U) == 0) return;
  rec(rec, free);
}

std::vector<std::uint32_t> remaining_edges(int m, const std::vector<OneFactor>& factors) {
  std::vector<std::uint32_t> avail(m);
  for (int v = 0; v < m; ++v) avail[v] = ((1U << m) - 1) & ~(1U << v);
  for (const auto& f : factors) {
    for (int v = 0; v < m; ++v) avail[v] &= ~(1U << f.mate(v));
  }
  return avail;
}

// Least vertex not yet matched to vertex 0 by any factor, or -1.
int next_zero_partner(int m, const std::vector<std::uint32_t>& avail) {
  const std::uint32_t options = avail[0];
  if (options == 0) return -1;
  const int x = std::countr_zero(options);
  return x < m ? x : -1;
}

}  // namespace

std::vector<OneFactor> enumerate_perfect_matchings(int m) {
  check_even(m, 2, 12);
  std::vector<OneFactor> out;
  std::vector<std::uint32_t> avail = remaining_edges(m, {});
  for (int b = 1; b < m; ++b) {
    for_each_matching(m, avail, 0, b, [&](const std::vector<int>& mate) { out.emplace_back(mate); });
  }
  return out;
}

OneFactor normalized_first_factor(int m) {
  std::vector<int> mate(m);
  for (int v = 0; v < m; ++v) mate[v] = v ^ 1;
  return OneFactor(std::move(mate));
}

namespace {

std::uint64_t hash_sorted(std::vector<std::uint64_t> values, std::uint64_t seed) {
  std::sort(values.begin(), values.end());
  std::uint64_t h = seed;
  for (auto v : values) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdULL;
  }
  return h ^ (h >> 31);
}

int color_of(int type, std::uint64_t h) {
  return (type << 29) | static_cast<int>(h & ((1U << 29) - 1));
}

}  // namespace

// Vertices are colored by an isomorphism invariant (cycle lengths through
// each edge against every other factor) so that refinement starts close to
// discrete. The type sits in the high bits of every color.
ColoredGraph factorization_graph(int m, const std::vector<OneFactor>& factors) {
  const int k = static_cast<int>(factors.size());
  std::vector<std::vector<int>> cycle_len(k, std::vector<int>(m, 0));
  std::vector<std::uint64_t> edge_hash;
  std::vector<std::vector<std::uint64_t>> at_point(m), at_factor(k);
  for (int f = 0; f < k; ++f) {
    for (auto [a, b] : factors[f].edges()) {
      std::vector<std::uint64_t> lens;
      for (int g = 0; g < k; ++g) {
        if (g == f) continue;
        int len = 0;
        int u = a;
        do {
          u = factors[g].mate(factors[f].mate(u));
          len += 2;
        } while (u != a && len <= m);
        lens.push_back(static_cast<std::uint64_t>(len));
      }
      const std::uint64_t h = hash_sorted(std::move(lens), 2);
      edge_hash.push_back(h);
      at_point[a].push_back(h);
      at_point[b].push_back(h);
      at_factor[f].push_back(h);
    }
  }
  ColoredGraph g(m + k + k * m / 2);
  for (int v = 0; v < m; ++v) g.set_color(v, color_of(0, hash_sorted(at_point[v], 0)));
  int next = m + k;
  for (int f = 0; f < k; ++f) {
    g.set_color(m + f, color_of(1, hash_sorted(at_factor[f], 1)));
    for (auto [a, b] : factors[f].edges()) {
      g.set_color(next, color_of(2, edge_hash[next - m - k]));
      g.add_edge(next, a);
      g.add_edge(next, b);
      g.add_edge(next, m + f);
      ++next;
    }
  }
  return g;
}

CanonicalForm factorization_form(int m, const std::vector<OneFactor>& factors) {
  const ColoredGraph g = factorization_graph(m, factors);
  CanonicalForm form = canonical_form(g);
  // The graph form records class sizes only; append the color values so that
  // equal forms imply color-preserving isomorphism.
  std::vector<int> colors = g.colors();
  std::sort(colors.begin(), colors.end());
  colors.erase(std::unique(colors.begin(), colors.end()), colors.end());
  for (int c : colors) {
    for (int shift = 24; shift >= 0; shift -= 8) {
      form.bytes.push_back(static_cast<std::uint8_t>((c >> shift) & 0xff));
    }
  }
  return form;
}

ColoredGraph block_incidence_graph(const OneFactorization& fz) {
  const int m = fz.vertex_count();
  const int points = m + 2;
  std::vector<std::vector<int>> row(points, std::vector<int>(points, -1));
  int rows = 0;
  for (int a = 0; a < points; ++a) {
    for (int b = a + 1; b < points; ++b) row[a][b] = row[b][a] = rows++;
  }
  ColoredGraph g(rows + points + m - 1);
  for (int v = rows; v < g.vertex_count(); ++v) g.set_color(v, 1);
  for (int a = 0; a < points; ++a) {
    for (int b = a + 1; b < points; ++b) {
      g.add_edge(row[a][b], rows + a);
      g.add_edge(row[a][b], rows + b);
    }
  }
  for (int f = 0; f < m - 1; ++f) {
    const int col = rows + points + f;
    g.add_edge(row[m][m + 1], col);
    for (auto [a, b] : fz.factor(f).edges()) g.add_edge(row[a][b], col);
  }
  return g;
}

std::vector<std::pair<OneFactor, OneFactor>> second_factor_classes(int m) {
  check_even(m, 4, 12);
  const OneFactor first = normalized_first_factor(m);
  const auto avail = remaining_edges(m, {first});
  std::map<CanonicalForm, OneFactor> classes;
  for (int b = 2; b < m; ++b) {
    for_each_matching(m, avail, 0, b, [&](const std::vector<int>& mate) {
      OneFactor second(mate);
      classes.emplace(factorization_form(m, {first, second}), second);
    });
  }
  std::vector<std::pair<OneFactor, OneFactor>> out;
  for (auto& [form, second] : classes) out.emplace_back(first, second);
  return out;
}

std::vector<OneFactorization> enumerate_nonisomorphic_factorizations(int m,
                                                                     EnumerationStats* stats) {
  check_even(m, 2, 10);
  EnumerationStats local;
  EnumerationStats& st = stats ? *stats : local;
  st = {};

  // Isomorph rejection on partial factor sets up to `dedupe_levels` factors;
  // beyond that, plain backtracking to complete factorizations.
  const int total = m - 1;
  const int dedupe_levels = std::min(total, 4);
  std::vector<std::vector<OneFactor>> level{{normalized_first_factor(m)}};
  st.level_classes.push_back(1);
  for (int k = 1; k < dedupe_levels; ++k) {
    std::map<CanonicalForm, std::vector<OneFactor>> next;
    for (const auto& partial : level) {
      const auto avail = remaining_edges(m, partial);
      const int x = next_zero_partner(m, avail);
      if (x < 0) continue;
      for_each_matching(m, avail, 0, x, [&](const std::vector<int>& mate) {
        auto extended = partial;
        extended.emplace_back(mate);
        auto form = factorization_form(m, extended);
        next.try_emplace(std::move(form), std::move(extended));
      });
    }
    level.clear();
    for (auto& [form, partial] : next) level.push_back(std::move(partial));
    st.level_classes.push_back(level.size());
  }

  std::map<CanonicalForm, std::vector<OneFactor>> complete;
  for (const auto& partial : level) {
    std::vector<OneFactor> current = partial;
    auto rec = [&](auto&& self) -> void {
      if (static_cast<int>(current.size()) == total) {
        ++st.completions;
        auto form = factorization_form(m, current);
        complete.try_emplace(std::move(form), current);
        return;
      }
      const auto avail = remaining_edges(m, current);
      const int x = next_zero_partner(m, avail);
      if (x < 0) return;
      for_each_matching(m, avail, 0, x, [&](const std::vector<int>& mate) {
        current.emplace_back(mate);
        self(self);
        current.pop_back();
      });
    };
    rec(rec);
  }

  std::vector<OneFactorization> out;
  for (auto& [form, factors] : complete) {
    out.push_back(OneFactorization(m, factors).sorted_by_vertex_zero());
  }
  return out;
}

std::uint64_t count_labeled_extensions(int m) {
  check_even(m, 2, 12);
  std::uint64_t count = 0;
  std::vector<OneFactor> current{normalized_first_factor(m)};
  auto rec = [&](auto&& self) -> void {
    if (static_cast<int>(current.size()) == m - 1) {
      ++count;
      return;
    }
    const auto avail = remaining_edges(m, current);
    const int x = next_zero_partner(m, avail);
    if (x < 0) return;
    for_each_matching(m, avail, 0, x, [&](const std::vector<int>& mate) {
      current.emplace_back(mate);
      self(self);
      current.pop_back();
    });
  };
  rec(rec);
  return count;
}

ColoredGraph cycle_pattern_graph(const OneFactorization& fz) {
  const int k = static_cast<int>(fz.factors().size());
  ColoredGraph g(k);
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      if (is_hamiltonian_pair(fz.factor(a), fz.factor(b))) g.add_edge(a, b);
    }
  }
  return g;
}

CyclePattern cycle_pattern(const OneFactorization& fz) {
  return CyclePattern{canonical_form(cycle_pattern_graph(fz))};
}

std::string format_factorization(const OneFactorization& fz) {
  std::string out;
  for (std::size_t f = 0; f < fz.factors().size(); ++f) {
    if (f) out += ';';
    bool first = true;
    for (auto [a, b] : fz.factor(static_cast<int>(f)).edges()) {
      if (!first) out += ',';
      first = false;
      out += std::to_string(a + 1) + "-" + std::to_string(b + 1);
    }
  }
  return out;
}

OneFactorization parse_factorization(int m, const std::string& text) {
  std::vector<OneFactor> factors;
  std::stringstream factors_in(text);
  std::string factor_text;
  while (std::getline(factors_in, factor_text, ';')) {
    std::vector<std::pair<int, int>> edges;
    std::stringstream edges_in(factor_text);
    std::string edge;
    while (std::getline(edges_in, edge, ',')) {
      const auto dash = edge.find('-');
      if (dash == std::string::npos) throw std::invalid_argument("malformed edge '" + edge + "'");
      edges.emplace_back(std::stoi(edge.substr(0, dash)) - 1, std::stoi(edge.substr(dash + 1)) - 1);
    }
    factors.push_back(OneFactor::from_edges(m, edges));
  }
  return OneFactorization(m, std::move(factors));
}

OneFactorization block_factorization(const OvalFrame& frame, int block,
                                     const Assignment& assignment) {
  const auto points = frame.block_points(block);
  const int m = static_cast<int>(points.size());
  std::vector<int> index(frame.oval_size() + 1, -1);
  for (int t = 0; t < m; ++t) index[points[t]] = t;
  std::vector<OneFactor> factors;
  for (int col : frame.block_columns(block)) {
    std::vector<std::pair<int, int>> edges;
    for (int r = 1; r <= frame.num_rows(); ++r) {
      bool one = false;
      switch (frame.cell(r, col)) {
        case Cell::One: one = true; break;
        case Cell::Zero: break;
        case Cell::Unknown: {
          auto it = assignment.find(CellRef{r, col});
          if (it == assignment.end()) {
            throw std::invalid_argument("block " + std::to_string(block) + " not fully assigned");
          }
          one = it->second;
          break;
        }
      }
      if (!one || r == block) continue;
      const auto [a, b] = frame.row_pair(r);
      if (index[a] < 0 || index[b] < 0) {
        throw std::invalid_argument("block column meets the block line twice");
      }
      edges.emplace_back(index[a], index[b]);
    }
    factors.push_back(OneFactor::from_edges(m, edges));
  }
  return OneFactorization(m, std::move(factors));
}

int label_of_assigned_block(const OvalFrame& frame, int block, const Assignment& assignment,
                            const LabelTable& table) {
  const auto fz = block_factorization(frame, block, assignment);
  const int label = table.pessimistic(cycle_pattern(fz));
  if (label == 0) throw std::out_of_range("block cycle pattern absent from label table");
  return label;
}

}  // namespace ovalcert
