#include "ovalcert/canon.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ovalcert {

ColoredGraph::ColoredGraph(int vertex_count)
    : n_(vertex_count),
      words_((vertex_count + 63) / 64),
      adj_(vertex_count),
      matrix_(static_cast<std::size_t>(vertex_count) * ((vertex_count + 63) / 64), 0),
      colors_(vertex_count, 0) {
  if (vertex_count < 0) throw std::invalid_argument("negative vertex count");
}

void ColoredGraph::add_edge(int u, int v) {
  if (u < 0 || v < 0 || u >= n_ || v >= n_) throw std::out_of_range("edge endpoint out of range");
  if (u == v) throw std::invalid_argument("self-loops are not allowed");
  if (has_edge(u, v)) return;
  matrix_[static_cast<std::size_t>(u) * words_ + v / 64] |= std::uint64_t{1} << (v % 64);
  matrix_[static_cast<std::size_t>(v) * words_ + u / 64] |= std::uint64_t{1} << (u % 64);
  adj_[u].push_back(v);
  adj_[v].push_back(u);
  ++edges_;
}

bool ColoredGraph::has_edge(int u, int v) const {
  return (matrix_[static_cast<std::size_t>(u) * words_ + v / 64] >> (v % 64)) & 1U;
}

void ColoredGraph::set_color(int v, int color) {
  if (v < 0 || v >= n_) throw std::out_of_range("vertex out of range");
  colors_[v] = color;
}

ColoredGraph ColoredGraph::permuted(const std::vector<int>& perm) const {
  ColoredGraph g(n_);
  for (int v = 0; v < n_; ++v) g.set_color(perm[v], colors_[v]);
  for (int u = 0; u < n_; ++u) {
    for (int v : adj_[u]) {
      if (u < v) g.add_edge(perm[u], perm[v]);
    }
  }
  return g;
}

std::string CanonicalForm::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out += kDigits[b >> 4];
    out += kDigits[b & 15];
  }
  return out;
}

CanonicalForm CanonicalForm::from_hex(const std::string& hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("odd-length hex string");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    throw std::invalid_argument("invalid hex digit");
  };
  CanonicalForm f;
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    f.bytes.push_back(static_cast<std::uint8_t>(nibble(hex[i]) * 16 + nibble(hex[i + 1])));
  }
  return f;
}

namespace {

// Ordered partition of the vertex set. Cells are contiguous ranges of `lab`;
// `start[i]` is the first position of the cell containing position i.
struct Partition {
  std::vector<int> lab;
  std::vector<int> pos;
  std::vector<int> start;
  std::vector<int> len;  // valid at cell starts
  int cells = 0;

  bool discrete() const { return cells == static_cast<int>(lab.size()); }
};

constexpr int kNoJump = std::numeric_limits<int>::max();

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h *= 0xff51afd7ed558ccdULL;
  return h ^ (h >> 33);
}

class Search {
 public:
  Search(const ColoredGraph& g) : g_(g), n_(g.vertex_count()), count_(n_, 0) {}

  CanonResult run() {
    Partition p = initial_partition();
    std::vector<int> queue;
    for (int i = 0; i < n_; i = i + p.len[i]) queue.push_back(i);
    std::uint64_t inv = refine(p, queue, mix(0, static_cast<std::uint64_t>(n_)));
    path_inv_.push_back(inv);
    search(p, 0, true);

    CanonResult result;
    result.automorphisms = group_order_;
    result.nodes = nodes_;
    result.labeling.assign(n_, 0);
    for (int i = 0; i < n_; ++i) result.labeling[best_lab_[i]] = i;
    result.form = encode();
    return result;
  }

 private:
  Partition initial_partition() const {
    Partition p;
    p.lab.resize(n_);
    std::iota(p.lab.begin(), p.lab.end(), 0);
    std::stable_sort(p.lab.begin(), p.lab.end(),
                     [&](int a, int b) { return g_.color(a) < g_.color(b); });
    p.pos.assign(n_, 0);
    p.start.assign(n_, 0);
    p.len.assign(n_, 0);
    for (int i = 0; i < n_; ++i) p.pos[p.lab[i]] = i;
    int i = 0;
    while (i < n_) {
      int j = i;
      while (j < n_ && g_.color(p.lab[j]) == g_.color(p.lab[i])) ++j;
      for (int k = i; k < j; ++k) p.start[k] = i;
      p.len[i] = j - i;
      ++p.cells;
      i = j;
    }
    return p;
  }

  // Equitable refinement by neighbour counts. Returns the refinement trace
  // folded into `h`.
  std::uint64_t refine(Partition& p, std::vector<int>& queue, std::uint64_t h) {
    std::vector<char> queued(n_, 0);
    for (int s : queue) queued[s] = 1;
    std::size_t head = 0;
    std::vector<int> touched;
    std::vector<int> touched_cells;
    std::vector<int> members;
    while (head < queue.size()) {
      if (p.discrete()) break;
      const int w = queue[head++];
      queued[w] = 0;
      members.assign(p.lab.begin() + w, p.lab.begin() + w + p.len[w]);
      touched.clear();
      for (int v : members) {
        for (int u : g_.neighbors(v)) {
          if (count_[u]++ == 0) touched.push_back(u);
        }
      }
      touched_cells.clear();
      for (int u : touched) touched_cells.push_back(p.start[p.pos[u]]);
      std::sort(touched_cells.begin(), touched_cells.end());
      touched_cells.erase(std::unique(touched_cells.begin(), touched_cells.end()),
                          touched_cells.end());
      h = mix(h, static_cast<std::uint64_t>(w) << 20 | touched.size());
      for (int s : touched_cells) {
        const int l = p.len[s];
        if (l == 1) {
          h = mix(h, static_cast<std::uint64_t>(s) << 32 | count_[p.lab[s]]);
          continue;
        }
        auto first = p.lab.begin() + s;
        auto last = first + l;
        std::stable_sort(first, last, [&](int a, int b) { return count_[a] < count_[b]; });
        if (count_[*first] == count_[*(last - 1)]) {
          h = mix(h, static_cast<std::uint64_t>(s) << 32 | count_[*first]);
          continue;
        }
        // Split into fragments of equal count.
        int largest_start = s;
        int largest_len = 0;
        const bool was_queued = queued[s] != 0;
        int i = s;
        std::vector<int> fragments;
        while (i < s + l) {
          int j = i;
          const int c = count_[p.lab[i]];
          while (j < s + l && count_[p.lab[j]] == c) ++j;
          for (int k = i; k < j; ++k) {
            p.start[k] = i;
            p.pos[p.lab[k]] = k;
          }
          p.len[i] = j - i;
          fragments.push_back(i);
          if (j - i > largest_len) {
            largest_len = j - i;
            largest_start = i;
          }
          h = mix(h, (static_cast<std::uint64_t>(i) << 40) | (static_cast<std::uint64_t>(c) << 20) |
                         static_cast<std::uint64_t>(j - i));
          i = j;
        }
        p.cells += static_cast<int>(fragments.size()) - 1;
        for (int f : fragments) {
          if (queued[f]) continue;
          if (!was_queued && f == largest_start) continue;
          queued[f] = 1;
          queue.push_back(f);
        }
      }
      for (int u : touched) count_[u] = 0;
    }
    return mix(h, static_cast<std::uint64_t>(p.cells));
  }

  Partition individualize(const Partition& parent, int v, std::uint64_t& inv) {
    Partition p = parent;
    const int s = p.start[p.pos[v]];
    const int l = p.len[s];
    const int at = p.pos[v];
    std::swap(p.lab[s], p.lab[at]);
    p.pos[p.lab[s]] = s;
    p.pos[p.lab[at]] = at;
    p.len[s] = 1;
    p.len[s + 1] = l - 1;
    for (int k = s + 1; k < s + l; ++k) p.start[k] = s + 1;
    ++p.cells;
    std::vector<int> queue{s};
    inv = refine(p, queue, mix(inv, static_cast<std::uint64_t>(s)));
    return p;
  }

  int target_cell(const Partition& p) const {
    int best = -1;
    for (int i = 0; i < n_; i += p.len[i]) {
      if (p.len[i] > 1 && (best < 0 || p.len[i] < p.len[best])) best = i;
    }
    return best;
  }

  std::vector<std::uint64_t> certificate(const std::vector<int>& lab) const {
    const std::size_t bits = static_cast<std::size_t>(n_) * (n_ - 1) / 2;
    std::vector<std::uint64_t> cert((bits + 63) / 64, 0);
    std::size_t k = 0;
    for (int i = 0; i < n_; ++i) {
      for (int j = i + 1; j < n_; ++j, ++k) {
        if (g_.has_edge(lab[i], lab[j])) cert[k / 64] |= std::uint64_t{1} << (k % 64);
      }
    }
    return cert;
  }

  // Orbit representative array of the group generated by the stored
  // automorphisms that fix `prefix` pointwise.
  std::vector<int> orbits(const std::vector<int>& prefix) const {
    std::vector<int> parent(n_);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& gen : generators_) {
      bool fixes = true;
      for (int v : prefix) fixes = fixes && gen[v] == v;
      if (!fixes) continue;
      for (int v = 0; v < n_; ++v) {
        const int a = find(v);
        const int b = find(gen[v]);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
    for (int v = 0; v < n_; ++v) parent[v] = find(v);
    return parent;
  }

  void add_generator(const std::vector<int>& from, const std::vector<int>& to) {
    std::vector<int> gen(n_);
    for (int i = 0; i < n_; ++i) gen[from[i]] = to[i];
    generators_.push_back(std::move(gen));
  }

  static int common_prefix(const std::vector<int>& a, const std::vector<int>& b) {
    std::size_t k = 0;
    while (k < a.size() && k < b.size() && a[k] == b[k]) ++k;
    return static_cast<int>(k);
  }

  int leaf(const Partition& p) {
    auto cert = certificate(p.lab);
    if (!have_leaf_) {
      have_leaf_ = true;
      first_lab_ = best_lab_ = p.lab;
      first_cert_ = best_cert_ = cert;
      first_inv_ = best_inv_ = path_inv_;
      first_path_ = best_path_ = path_;
      return kNoJump;
    }
    if (path_inv_ == first_inv_ && cert == first_cert_) {
      add_generator(first_lab_, p.lab);
      return common_prefix(path_, first_path_);
    }
    const auto cmp_inv = path_inv_ <=> best_inv_;
    if (cmp_inv > 0 || (cmp_inv == 0 && cert > best_cert_)) {
      best_lab_ = p.lab;
      best_cert_ = std::move(cert);
      best_inv_ = path_inv_;
      best_path_ = path_;
      return kNoJump;
    }
    if (cmp_inv == 0 && cert == best_cert_) {
      add_generator(best_lab_, p.lab);
      return common_prefix(path_, best_path_);
    }
    return kNoJump;
  }

  bool equals_first_prefix() const {
    if (first_inv_.size() < path_inv_.size()) return false;
    return std::equal(path_inv_.begin(), path_inv_.end(), first_inv_.begin());
  }

  bool worse_than_best_prefix() const {
    const std::size_t k = std::min(path_inv_.size(), best_inv_.size());
    for (std::size_t i = 0; i < k; ++i) {
      if (path_inv_[i] != best_inv_[i]) return path_inv_[i] < best_inv_[i];
    }
    return false;
  }

  int search(const Partition& p, int depth, bool first_path) {
    ++nodes_;
    if (p.discrete()) return leaf(p);
    const int cell = target_cell(p);
    const std::vector<int> children(p.lab.begin() + cell, p.lab.begin() + cell + p.len[cell]);
    std::vector<int> explored;
    for (std::size_t ci = 0; ci < children.size(); ++ci) {
      const int w = children[ci];
      if (!explored.empty()) {
        const auto orb = orbits(path_);
        bool equivalent = false;
        for (int e : explored) equivalent = equivalent || orb[e] == orb[w];
        if (equivalent) continue;
      }
      std::uint64_t inv = path_inv_.back();
      Partition child = individualize(p, w, inv);
      path_.push_back(w);
      path_inv_.push_back(inv);
      int jump = kNoJump;
      if (!have_leaf_ || equals_first_prefix() || !worse_than_best_prefix()) {
        jump = search(child, depth + 1, first_path && ci == 0);
      }
      path_.pop_back();
      path_inv_.pop_back();
      explored.push_back(w);
      if (jump < depth) return jump;
    }
    if (first_path) {
      const auto orb = orbits(path_);
      std::uint64_t size = 0;
      for (int w : children) size += orb[w] == orb[children[0]] ? 1 : 0;
      if (group_order_ > std::numeric_limits<std::uint64_t>::max() / size) {
        throw std::overflow_error("automorphism group order exceeds 64 bits");
      }
      group_order_ *= size;
    }
    return kNoJump;
  }

  CanonicalForm encode() const {
    CanonicalForm f;
    auto put16 = [&](int v) {
      f.bytes.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
      f.bytes.push_back(static_cast<std::uint8_t>(v & 0xff));
    };
    std::map<int, int> sizes;
    for (int v = 0; v < n_; ++v) ++sizes[g_.color(v)];
    put16(n_);
    put16(static_cast<int>(sizes.size()));
    for (const auto& [color, size] : sizes) put16(size);
    const std::size_t bits = static_cast<std::size_t>(n_) * (n_ - 1) / 2;
    for (std::size_t byte = 0; byte < (bits + 7) / 8; ++byte) {
      f.bytes.push_back(static_cast<std::uint8_t>((best_cert_[byte / 8] >> (8 * (byte % 8))) & 0xff));
    }
    return f;
  }

  const ColoredGraph& g_;
  int n_;
  std::vector<int> count_;
  std::vector<int> path_;
  std::vector<std::uint64_t> path_inv_;
  bool have_leaf_ = false;
  std::vector<int> first_lab_, best_lab_;
  std::vector<std::uint64_t> first_cert_, best_cert_;
  std::vector<std::uint64_t> first_inv_, best_inv_;
  std::vector<int> first_path_, best_path_;
  std::vector<std::vector<int>> generators_;
  std::uint64_t group_order_ = 1;
  std::size_t nodes_ = 0;
};

}  // namespace

CanonResult canonicalize(const ColoredGraph& g, const CanonOptions& options) {
  if (g.vertex_count() > options.max_vertices) {
    throw std::invalid_argument("graph has " + std::to_string(g.vertex_count()) +
                                " vertices, bound is " + std::to_string(options.max_vertices));
  }
  if (g.vertex_count() == 0) {
    CanonResult r;
    r.form.bytes = {0, 0, 0, 0};
    return r;
  }
  return Search(g).run();
}

ColoredGraph incidence_graph_from_rows(const OvalFrame& frame,
                                       const std::vector<std::vector<int>>& column_ones) {
  const int rows = frame.num_rows();
  const int oval = frame.oval_size();
  ColoredGraph g(rows + oval + static_cast<int>(column_ones.size()));
  for (int v = rows; v < g.vertex_count(); ++v) g.set_color(v, 1);
  for (int r = 1; r <= rows; ++r) {
    const auto [a, b] = frame.row_pair(r);
    g.add_edge(r - 1, rows + a - 1);
    g.add_edge(r - 1, rows + b - 1);
  }
  for (std::size_t i = 0; i < column_ones.size(); ++i) {
    for (int r : column_ones[i]) g.add_edge(r - 1, rows + oval + static_cast<int>(i));
  }
  return g;
}

ColoredGraph incidence_graph(const OvalFrame& frame, const std::vector<int>& columns,
                             const Assignment& assignment) {
  std::vector<std::vector<int>> ones;
  for (int c : columns) {
    if (frame.is_oval_column(c)) {
      throw std::invalid_argument("oval columns are always included; select non-oval columns");
    }
    std::vector<int> col_ones;
    for (int r = 1; r <= frame.num_rows(); ++r) {
      switch (frame.cell(r, c)) {
        case Cell::One: col_ones.push_back(r); break;
        case Cell::Zero: break;
        case Cell::Unknown: {
          auto it = assignment.find(CellRef{r, c});
          if (it == assignment.end()) {
            throw std::invalid_argument("column " + std::to_string(c) + " is not fully assigned");
          }
          if (it->second) col_ones.push_back(r);
          break;
        }
      }
    }
    ones.push_back(std::move(col_ones));
  }
  return incidence_graph_from_rows(frame, ones);
}

}  // namespace ovalcert
