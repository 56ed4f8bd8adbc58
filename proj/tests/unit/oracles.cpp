#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <cstdlib>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace oracle {

namespace {

// Bit b of word w is the assignment (w << 6) | b, variable v taking bit v-1.
constexpr std::uint64_t kLow[6] = {
    0xAAAAAAAAAAAAAAAAULL, 0xCCCCCCCCCCCCCCCCULL, 0xF0F0F0F0F0F0F0F0ULL,
    0xFF00FF00FF00FF00ULL, 0xFFFF0000FFFF0000ULL, 0xFFFFFFFF00000000ULL};

std::uint64_t lit_mask(int lit, std::uint64_t word) {
  const int v = std::abs(lit) - 1;
  std::uint64_t m = v < 6 ? kLow[v] : ((word >> (v - 6)) & 1 ? ~0ULL : 0ULL);
  return lit > 0 ? m : ~m;
}

}  // namespace

std::vector<bool> truth_table_model(int vars, const std::vector<Clause>& clauses,
                                    const std::vector<int>& assumptions) {
  if (vars > 24) throw std::invalid_argument("truth table too large");
  std::vector<Clause> all = clauses;
  for (int a : assumptions) all.push_back({a});
  const std::uint64_t words = vars <= 6 ? 1 : (1ULL << (vars - 6));
  const std::uint64_t valid = vars >= 6 ? ~0ULL : ((1ULL << (1U << vars)) - 1);
  for (std::uint64_t w = 0; w < words; ++w) {
    std::uint64_t sat = valid;
    for (const auto& c : all) {
      std::uint64_t m = 0;
      for (int l : c) m |= lit_mask(l, w);
      sat &= m;
      if (!sat) break;
    }
    if (sat) {
      const int bit = __builtin_ctzll(sat);
      const std::uint64_t a = (w << 6) | static_cast<std::uint64_t>(bit);
      std::vector<bool> model(vars + 1, false);
      for (int v = 1; v <= vars; ++v) model[v] = (a >> (v - 1)) & 1;
      return model;
    }
  }
  return {};
}

bool truth_table_sat(int vars, const std::vector<Clause>& clauses, const std::vector<int>& assumptions) {
  return !truth_table_model(vars, clauses, assumptions).empty();
}

std::vector<Clause> clauses_of(const ovalcert::CnfInstance& instance) {
  std::vector<Clause> out;
  for (std::size_t i = 0; i < instance.clauses.size(); ++i) {
    const auto c = instance.clauses[i];
    out.emplace_back(c.begin(), c.end());
  }
  return out;
}

ovalcert::CnfInstance instance_of(int vars, const std::vector<Clause>& clauses) {
  ovalcert::CnfInstance in;
  in.var_count = vars;
  for (const auto& c : clauses) in.clauses.add(c);
  return in;
}

std::vector<Clause> random_cnf(std::mt19937_64& rng, int vars, int clauses, int max_len) {
  std::vector<Clause> out;
  std::uniform_int_distribution<int> var(1, vars);
  std::uniform_int_distribution<int> len(1, max_len);
  for (int c = 0; c < clauses; ++c) {
    Clause cl;
    const int k = len(rng);
    for (int i = 0; i < k; ++i) cl.push_back(rng() & 1 ? var(rng) : -var(rng));
    out.push_back(cl);
  }
  return out;
}

std::vector<Clause> random_kcnf(std::mt19937_64& rng, int vars, int clauses, int k) {
  std::vector<int> pool(vars);
  std::iota(pool.begin(), pool.end(), 1);
  std::vector<Clause> out;
  for (int c = 0; c < clauses; ++c) {
    std::shuffle(pool.begin(), pool.end(), rng);
    Clause cl;
    for (int i = 0; i < std::min(k, vars); ++i) cl.push_back(rng() & 1 ? pool[i] : -pool[i]);
    out.push_back(cl);
  }
  return out;
}

std::vector<Clause> pigeonhole(int pigeons, int holes) {
  auto x = [&](int p, int h) { return p * holes + h + 1; };
  std::vector<Clause> out;
  for (int p = 0; p < pigeons; ++p) {
    Clause c;
    for (int h = 0; h < holes; ++h) c.push_back(x(p, h));
    out.push_back(c);
  }
  for (int h = 0; h < holes; ++h) {
    for (int a = 0; a < pigeons; ++a) {
      for (int b = a + 1; b < pigeons; ++b) out.push_back({-x(a, h), -x(b, h)});
    }
  }
  return out;
}

bool naive_rup(int vars, const std::vector<Clause>& db, const Clause& clause) {
  std::vector<int> val(vars + 1, 0);
  auto value = [&](int l) { return l > 0 ? val[l] : -val[-l]; };
  for (int l : clause) {
    if (value(l) == 1) return true;  // tautology under the negation
    val[std::abs(l)] = l > 0 ? -1 : 1;
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& c : db) {
      std::set<int> open;  // repeated literals count once
      bool satisfied = false;
      for (int l : c) {
        const int v = value(l);
        if (v == 1) {
          satisfied = true;
          break;
        }
        if (v == 0) open.insert(l);
      }
      if (satisfied) continue;
      if (open.empty()) return true;
      if (open.size() == 1) {
        const int last = *open.begin();
        val[std::abs(last)] = last > 0 ? 1 : -1;
        changed = true;
      }
    }
  }
  return false;
}

// ---- projective planes ----

namespace {

struct Field {
  int q;
  int add(int a, int b) const { return a ^ b; }  // characteristic 2
  int mul(int a, int b) const {
    if (a == 0 || b == 0) return 0;
    if (q == 2) return 1;
    // GF(4) = {0, 1, w, w+1} with w^2 = w + 1.
    static const int t[4][4] = {{0, 0, 0, 0}, {0, 1, 2, 3}, {0, 2, 3, 1}, {0, 3, 1, 2}};
    return t[a][b];
  }
};

std::vector<std::array<int, 3>> normalized_triples(int q) {
  std::vector<std::array<int, 3>> out;
  for (int x = 0; x < q; ++x) {
    for (int y = 0; y < q; ++y) {
      for (int z = 0; z < q; ++z) {
        const std::array<int, 3> t{x, y, z};
        const auto first = std::find_if(t.begin(), t.end(), [](int c) { return c != 0; });
        if (first != t.end() && *first == 1) out.push_back(t);
      }
    }
  }
  return out;
}

}  // namespace

Plane projective_plane(int q) {
  if (q != 2 && q != 4) throw std::invalid_argument("only q = 2, 4");
  const Field f{q};
  const auto pts = normalized_triples(q);
  Plane p;
  p.q = q;
  for (const auto& l : pts) {
    std::vector<int> line;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& x = pts[i];
      const int dot = f.add(f.add(f.mul(l[0], x[0]), f.mul(l[1], x[1])), f.mul(l[2], x[2]));
      if (dot == 0) line.push_back(static_cast<int>(i));
    }
    p.lines.push_back(line);
  }
  auto index_of = [&](std::array<int, 3> t) {
    return static_cast<int>(std::find(pts.begin(), pts.end(), t) - pts.begin());
  };
  for (int t = 0; t < q; ++t) p.hyperoval.push_back(index_of({1, t, f.mul(t, t)}));
  p.hyperoval.push_back(index_of({0, 0, 1}));
  p.hyperoval.push_back(index_of({0, 1, 0}));  // nucleus
  return p;
}

bool is_projective_plane(int q, const std::vector<std::vector<int>>& lines) {
  const int n = q * q + q + 1;
  if (static_cast<int>(lines.size()) != n) return false;
  std::vector<std::vector<int>> cover(n, std::vector<int>(n, 0));
  for (const auto& l : lines) {
    if (static_cast<int>(l.size()) != q + 1) return false;
    for (std::size_t i = 0; i < l.size(); ++i) {
      for (std::size_t j = i + 1; j < l.size(); ++j) ++cover[l[i]][l[j]], ++cover[l[j]][l[i]];
    }
  }
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a != b && cover[a][b] != 1) return false;
    }
  }
  return true;
}

Frame01 frame_of_plane(const Plane& plane) {
  const int n = plane.q * plane.q + plane.q + 1;
  std::vector<int> column(n, -1);
  int next = 0;
  for (int p : plane.hyperoval) column[p] = next++;
  for (int p = 0; p < n; ++p) {
    if (column[p] < 0) column[p] = next++;
  }
  Frame01 f;
  f.oval = static_cast<int>(plane.hyperoval.size());
  f.columns = n;
  for (std::size_t i = 0; i < plane.hyperoval.size(); ++i) {
    for (std::size_t j = i + 1; j < plane.hyperoval.size(); ++j) {
      for (const auto& l : plane.lines) {
        if (std::count(l.begin(), l.end(), plane.hyperoval[i]) &&
            std::count(l.begin(), l.end(), plane.hyperoval[j])) {
          std::vector<int> row;
          for (int p : l) row.push_back(column[p]);
          std::sort(row.begin(), row.end());
          f.rows.push_back(row);
        }
      }
    }
  }
  return f;
}

bool frames_isomorphic(const Frame01& a, const Frame01& b) {
  if (a.oval != b.oval || a.columns != b.columns || a.rows.size() != b.rows.size()) return false;
  const int k = a.oval;
  // Row index of oval pair {i, j} for the lexicographic row order.
  std::vector<std::vector<int>> pair_row(k, std::vector<int>(k, -1));
  int r = 0;
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) pair_row[i][j] = pair_row[j][i] = r++;
  }
  if (r != static_cast<int>(a.rows.size())) return false;
  auto column_rows = [](const Frame01& f) {
    std::vector<std::set<int>> cols(f.columns);
    for (std::size_t row = 0; row < f.rows.size(); ++row) {
      for (int c : f.rows[row]) cols[c].insert(static_cast<int>(row));
    }
    return cols;
  };
  const auto ca = column_rows(a);
  const auto cb = column_rows(b);
  std::multiset<std::set<int>> b_nonoval(cb.begin() + k, cb.end());
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    std::vector<int> row_map(a.rows.size());
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) row_map[pair_row[i][j]] = pair_row[perm[i]][perm[j]];
    }
    auto mapped = [&](const std::set<int>& s) {
      std::set<int> out;
      for (int x : s) out.insert(row_map[x]);
      return out;
    };
    bool ok = true;
    for (int i = 0; i < k && ok; ++i) ok = mapped(ca[i]) == cb[perm[i]];
    if (!ok) continue;
    std::multiset<std::set<int>> a_nonoval;
    for (int c = k; c < a.columns; ++c) a_nonoval.insert(mapped(ca[c]));
    if (a_nonoval == b_nonoval) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

// ---- graphs ----

std::uint64_t brute_automorphisms(int n, const std::vector<std::pair<int, int>>& edges,
                                  const std::vector<int>& colors) {
  std::set<std::pair<int, int>> es;
  for (auto [u, v] : edges) es.insert({std::min(u, v), std::max(u, v)});
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::uint64_t count = 0;
  do {
    bool ok = true;
    for (int v = 0; v < n && ok; ++v) ok = colors[v] == colors[perm[v]];
    for (auto it = es.begin(); it != es.end() && ok; ++it) {
      const int u = perm[it->first];
      const int v = perm[it->second];
      ok = es.contains({std::min(u, v), std::max(u, v)});
    }
    count += ok;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return count;
}

bool brute_isomorphic(int n, const std::vector<std::pair<int, int>>& e1,
                      const std::vector<std::pair<int, int>>& e2) {
  std::set<std::pair<int, int>> s1;
  std::set<std::pair<int, int>> s2;
  for (auto [u, v] : e1) s1.insert({std::min(u, v), std::max(u, v)});
  for (auto [u, v] : e2) s2.insert({std::min(u, v), std::max(u, v)});
  if (s1.size() != s2.size()) return false;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (auto it = s1.begin(); it != s1.end() && ok; ++it) {
      const int u = perm[it->first];
      const int v = perm[it->second];
      ok = s2.contains({std::min(u, v), std::max(u, v)});
    }
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

// ---- 1-factorizations ----

namespace {

using Mate = std::vector<int>;

void matchings_with(int m, const std::vector<std::vector<char>>& used, Mate& mate,
                    const std::function<void(const Mate&)>& f) {
  int u = 0;
  while (u < m && mate[u] >= 0) ++u;
  if (u == m) {
    f(mate);
    return;
  }
  for (int v = u + 1; v < m; ++v) {
    if (mate[v] >= 0 || used[u][v]) continue;
    mate[u] = v;
    mate[v] = u;
    matchings_with(m, used, mate, f);
    mate[u] = mate[v] = -1;
  }
}

void extend(int m, std::vector<Mate>& factors, std::vector<std::vector<char>>& used,
            std::vector<std::vector<Mate>>& out) {
  const int k = static_cast<int>(factors.size());
  if (k == m - 1) {
    out.push_back(factors);
    return;
  }
  // Factor k holds the edge {0, k+1}.
  const int b = k + 1;
  if (used[0][b]) return;
  Mate mate(m, -1);
  mate[0] = b;
  mate[b] = 0;
  std::vector<Mate> found;
  matchings_with(m, used, mate, [&](const Mate& x) { found.push_back(x); });
  for (const auto& f : found) {
    for (int v = 0; v < m; ++v) used[v][f[v]] = 1;
    factors.push_back(f);
    extend(m, factors, used, out);
    factors.pop_back();
    for (int v = 0; v < m; ++v) used[v][f[v]] = 0;
  }
}

}  // namespace

std::vector<std::vector<std::vector<int>>> labeled_factorizations(int m) {
  if (m < 2 || m > 8 || m % 2) throw std::invalid_argument("m must be even, at most 8");
  std::vector<std::vector<char>> used(m, std::vector<char>(m, 0));
  Mate first(m);
  for (int v = 0; v < m; ++v) first[v] = v ^ 1;
  for (int v = 0; v < m; ++v) used[v][first[v]] = 1;
  std::vector<Mate> factors{first};
  std::vector<std::vector<Mate>> out;
  extend(m, factors, used, out);
  return out;
}

int factorization_classes(int m) {
  const auto all = labeled_factorizations(m);
  std::vector<std::vector<int>> edge_id(m, std::vector<int>(m, -1));
  int e = 0;
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) edge_id[a][b] = edge_id[b][a] = e++;
  }
  std::vector<std::vector<std::uint32_t>> masks;
  for (const auto& fz : all) {
    std::vector<std::uint32_t> ms;
    for (const auto& f : fz) {
      std::uint32_t x = 0;
      for (int v = 0; v < m; ++v) {
        if (v < f[v]) x |= 1U << edge_id[v][f[v]];
      }
      ms.push_back(x);
    }
    masks.push_back(ms);
  }
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> edge_perms;
  do {
    std::vector<int> ep(e);
    for (int a = 0; a < m; ++a) {
      for (int b = a + 1; b < m; ++b) ep[edge_id[a][b]] = edge_id[perm[a]][perm[b]];
    }
    edge_perms.push_back(ep);
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::set<std::vector<std::uint32_t>> forms;
  for (const auto& ms : masks) {
    std::vector<std::uint32_t> best;
    for (const auto& ep : edge_perms) {
      std::vector<std::uint32_t> img;
      for (std::uint32_t x : ms) {
        std::uint32_t y = 0;
        for (std::uint32_t t = x; t; t &= t - 1) y |= 1U << ep[__builtin_ctz(t)];
        img.push_back(y);
      }
      std::sort(img.begin(), img.end());
      if (best.empty() || img < best) best = img;
    }
    forms.insert(best);
  }
  return static_cast<int>(forms.size());
}

}  // namespace oracle
