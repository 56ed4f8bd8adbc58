#include "ovalcert/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "ovalcert/encoder.hpp"
#include "ovalcert/hash.hpp"
#include "ovalcert/manifest.hpp"
#include "ovalcert/proof.hpp"
#include "ovalcert/symmetry.hpp"

namespace ovalcert {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::ofstream open_out(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  return out;
}

std::ifstream open_in(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  return in;
}

void close_out(std::ofstream& out, const fs::path& file) {
  out.close();
  if (!out) throw std::runtime_error("write failed for " + file.string());
}

std::vector<Lit> negated(const std::vector<Lit>& cube) {
  std::vector<Lit> out;
  out.reserve(cube.size());
  for (Lit l : cube) out.push_back(-l);
  return out;
}

// Unknown cells filled for `block` by the class it was fixed to.
Assignment fixed_block_cells(const OvalFrame& frame, const CnfInstance& instance,
                             const LabelTable& table) {
  const auto& p = instance.provenance;
  if (p.fixed_block == 0) return {};
  if (p.fixed_label < 1 || p.fixed_label > table.size()) {
    throw std::invalid_argument("instance fixes a block to label " + std::to_string(p.fixed_label) +
                                " which is not in the label table");
  }
  return block_cells(frame, p.fixed_block, table.entry(p.fixed_label).factorization);
}

}  // namespace

int default_jobs() {
  if (const char* env = std::getenv("OVALCERT_JOBS")) {
    const int j = std::atoi(env);
    if (j > 0) return j;
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

// ---- artifact files ----

void write_classes(const fs::path& file, const std::vector<OneFactorization>& classes) {
  auto out = open_out(file);
  out << "# ovalcert 1-factorization classes\n";
  for (const auto& fz : classes) out << format_factorization(fz) << '\n';
  close_out(out, file);
}

std::vector<OneFactorization> read_classes(const fs::path& file, int m) {
  auto in = open_in(file);
  std::vector<OneFactorization> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    out.push_back(parse_factorization(m, line));
  }
  return out;
}

void write_label_table(const fs::path& file, const LabelTable& table) {
  auto out = open_out(file);
  table.write(out);
  close_out(out, file);
}

LabelTable read_label_table(const fs::path& file) {
  auto in = open_in(file);
  return LabelTable::read(in);
}

void write_completions(const fs::path& file, const CompletionFile& c) {
  auto out = open_out(file);
  out << "# ovalcert completions n " << c.order << " blocks " << c.first_block << ' '
      << c.last_block << '\n';
  for (const auto& a : c.completions) {
    bool first = true;
    for (const auto& [cell, value] : a) {
      if (!value) continue;
      out << (first ? "" : " ") << cell.row << ':' << cell.col;
      first = false;
    }
    out << '\n';
  }
  close_out(out, file);
}

CompletionFile read_completions(const fs::path& file) {
  auto in = open_in(file);
  CompletionFile c;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(file.string() + ": empty completion file");
  {
    std::istringstream ss(line);
    std::string hash, tool, kind, n, blocks;
    ss >> hash >> tool >> kind >> n >> c.order >> blocks >> c.first_block >> c.last_block;
    if (!ss || hash != "#" || kind != "completions" || n != "n" || blocks != "blocks") {
      throw std::runtime_error(file.string() + ": bad completion header");
    }
  }
  const OvalFrame frame = build_frame(c.order);
  if (c.first_block < 1 || c.last_block > frame.num_blocks() || c.first_block > c.last_block) {
    throw std::runtime_error(file.string() + ": block range out of bounds");
  }
  Assignment blank;
  for (int col : frame.block_range_columns(c.first_block, c.last_block)) {
    for (int r : frame.unknown_rows(col)) blank[{r, col}] = false;
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] == '#') continue;
    Assignment a = blank;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      int r = 0;
      int col = 0;
      char colon = 0;
      std::istringstream ts(tok);
      if (!(ts >> r >> colon >> col) || colon != ':' || !ts.eof()) {
        throw std::runtime_error(file.string() + ":" + std::to_string(lineno) + ": bad cell " + tok);
      }
      auto it = a.find({r, col});
      if (it == a.end()) {
        throw std::runtime_error(file.string() + ":" + std::to_string(lineno) + ": cell " + tok +
                                 " is not an Unknown cell of the completed blocks");
      }
      it->second = true;
    }
    c.completions.push_back(std::move(a));
  }
  return c;
}

void save_instance(const fs::path& cnf, const CnfInstance& instance) {
  auto out = open_out(cnf);
  write_dimacs(instance, out);
  close_out(out, cnf);
  fs::path vm = cnf;
  vm.replace_extension(".varmap");
  auto vout = open_out(vm);
  instance.varmap.write(vout);
  close_out(vout, vm);
}

LoadedInstance load_instance(const fs::path& cnf) {
  auto in = open_in(cnf);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::istringstream ss(text);
  CnfInstance instance = read_dimacs(ss);
  fs::path vm = cnf;
  vm.replace_extension(".varmap");
  if (fs::exists(vm)) {
    auto vin = open_in(vm);
    instance.varmap = VarMap::read(vin);
  }
  const std::string key = "c varmap-sha256 ";
  if (const auto pos = text.find(key); pos != std::string::npos) {
    const std::string recorded = text.substr(pos + key.size(), 64);
    if (recorded != instance.varmap.content_hash()) {
      throw std::runtime_error(cnf.string() + ": varmap does not match the recorded hash");
    }
  }
  if (instance.varmap.size() != instance.var_count) {
    throw std::runtime_error(cnf.string() + ": varmap size differs from the variable count");
  }
  if (instance.provenance.order == 0) throw std::runtime_error(cnf.string() + ": no frame order recorded");
  OvalFrame frame = build_frame(instance.provenance.order);
  return {std::move(instance), std::move(frame)};
}

BlockGroups block_groups(const OvalFrame& frame, const CnfInstance& instance) {
  std::map<int, std::vector<int>> by_block;
  for (int v = 1; v <= instance.varmap.size(); ++v) {
    by_block[frame.block_of_column(instance.varmap.cell_of(v).col)].push_back(v);
  }
  BlockGroups g;
  for (auto& [b, vars] : by_block) {
    g.blocks.push_back(b);
    g.vars.push_back(std::move(vars));
  }
  return g;
}

// ---- stages ----

EnumOutput run_enum(int m, const fs::path& out_dir) {
  const auto start = Clock::now();
  EnumOutput out;
  out.m = m;
  out.classes = enumerate_nonisomorphic_factorizations(m, &out.stats);
  out.table = build_label_table(out.classes);
  out.seconds = since(start);
  const fs::path classes = out_dir / "classes.txt";
  const fs::path labels = out_dir / "labels.txt";
  write_classes(classes, out.classes);
  write_label_table(labels, out.table);
  StageRecord r;
  r.stage = "enum-1f";
  r.params["m"] = std::to_string(m);
  r.outputs = {artifact("classes", classes, out_dir), artifact("labels", labels, out_dir)};
  r.results["classes"] = std::to_string(out.classes.size());
  r.results["patterns"] = std::to_string(out.table.pessimistic_map().size());
  r.results["level_classes"] = json(out.stats.level_classes).dump();
  r.results["completions"] = std::to_string(out.stats.completions);
  r.seconds = out.seconds;
  append_record(out_dir / "manifest.jsonl", r);
  return out;
}

fs::path instance_path(const fs::path& dir, int label) {
  char name[32];
  std::snprintf(name, sizeof name, "inst-%03d.cnf", label);
  return dir / name;
}

std::vector<GeneratedInstance> run_gen_instances(const GenOptions& o) {
  const auto start = Clock::now();
  const fs::path labels_file = o.classes_dir / "labels.txt";
  if (!fs::exists(labels_file)) throw std::runtime_error("missing class table " + labels_file.string());
  const LabelTable table = read_label_table(labels_file);
  const OvalFrame frame = build_frame(o.order);
  if (table.vertex_count() != frame.block_size() + 1) {
    throw std::invalid_argument("label table is for K_" + std::to_string(table.vertex_count()) +
                                ", order " + std::to_string(o.order) + " needs K_" +
                                std::to_string(frame.block_size() + 1));
  }
  if (o.first_block < 1 || o.last_block > frame.num_blocks() || o.first_block > o.last_block) {
    throw std::invalid_argument("block range out of bounds");
  }
  std::vector<int> labels = o.labels;
  if (labels.empty()) {
    for (int l = 1; l <= table.size(); ++l) labels.push_back(l);
  }
  for (int l : labels) {
    if (l < 1 || l > table.size()) throw std::invalid_argument("label " + std::to_string(l) + " out of range");
  }
  // Most constrained (highest label) first.
  std::sort(labels.rbegin(), labels.rend());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  const CnfInstance base = encode(frame, frame.block_range_columns(o.first_block, o.last_block),
                                  {.simplify = o.simplify, .fixed = {}});
  auto out = parallel_map<GeneratedInstance>(labels.size(), o.jobs, [&](std::size_t i) {
    const int label = labels[i];
    const CnfInstance inst =
        fix_block(frame, base, o.first_block, table.entry(label).factorization, label);
    GeneratedInstance g;
    g.label = label;
    g.cnf = instance_path(o.out_dir, label);
    g.var_count = inst.var_count;
    g.clauses = inst.clauses.size();
    g.counts = inst.counts;
    g.raw_counts = inst.raw_counts;
    save_instance(g.cnf, inst);
    return g;
  });
  StageRecord r;
  r.stage = "gen-instances";
  r.params = {{"n", std::to_string(o.order)},
              {"blocks", std::to_string(o.first_block) + ".." + std::to_string(o.last_block)},
              {"simplify", o.simplify ? "true" : "false"}};
  r.inputs.push_back(artifact("labels", labels_file, o.out_dir));
  json per = json::array();
  for (const auto& g : out) {
    r.outputs.push_back(artifact("instance-" + std::to_string(g.label), g.cnf, o.out_dir));
    per.push_back({{"label", g.label},
                   {"variables", g.var_count},
                   {"clauses", g.clauses},
                   {"intersect_at_most_once", g.counts.intersect_at_most_once},
                   {"oval_intersection", g.counts.oval_intersection},
                   {"known_row_intersection", g.counts.known_row_intersection},
                   {"block_fix", g.counts.block_fix}});
  }
  r.results["instances"] = std::to_string(out.size());
  r.results["raw_counts"] = json({{"intersect_at_most_once", base.raw_counts.intersect_at_most_once},
                                  {"oval_intersection", base.raw_counts.oval_intersection},
                                  {"known_row_intersection", base.raw_counts.known_row_intersection},
                                  {"variables", base.var_count}})
                                .dump();
  r.results["per_instance"] = per.dump();
  r.jobs = o.jobs;
  r.seconds = since(start);
  append_record(o.out_dir / "manifest.jsonl", r);
  return out;
}

CubeSet run_cube(const CubeStageOptions& o) {
  const auto start = Clock::now();
  if (o.cutoff < 0 && o.parts <= 0) throw std::invalid_argument("give a cutoff, a part count or both");
  const LoadedInstance li = load_instance(o.instance);
  const BlockGroups groups = block_groups(li.frame, li.instance);
  CubeSet cs;
  if (o.parts > 0 && o.cutoff >= 0) {
    cs = split_then_cube(li.instance, groups.vars, o.parts, o.cutoff, o.max_cubes);
  } else if (o.parts > 0) {
    cs = toplevel_split(li.instance, groups.vars, o.parts);
  } else {
    cs = generate_cubes(li.instance, groups.vars, {o.cutoff, o.max_cubes, {}});
  }
  cs.source_hash = sha256_file(o.instance);
  auto out = open_out(o.out);
  write_icnf(out, li.instance, cs);
  close_out(out, o.out);
  const fs::path side = fs::path(o.out.string() + ".refuted");
  auto sout = open_out(side);
  write_cube_lines(sout, cs.refuted);
  close_out(sout, side);

  const fs::path dir = o.out.has_parent_path() ? o.out.parent_path() : fs::path(".");
  StageRecord r;
  r.stage = "cube";
  r.params = {{"cutoff", std::to_string(o.cutoff)},
              {"parts", std::to_string(o.parts)},
              {"max_cubes", std::to_string(o.max_cubes)}};
  r.inputs = {artifact("instance", o.instance, dir)};
  r.outputs = {artifact("cubes", o.out, dir), artifact("refuted", side, dir)};
  r.results["cubes"] = std::to_string(cs.cubes.size());
  r.results["refuted"] = std::to_string(cs.refuted.size());
  r.seconds = since(start);
  append_record(dir / "manifest.jsonl", r);
  return cs;
}

const char* to_string(CubeStatus s) {
  switch (s) {
    case CubeStatus::Unsat: return "UNSAT";
    case CubeStatus::BlockedSat: return "BLOCKED_SAT";
    case CubeStatus::Unknown: return "UNKNOWN";
  }
  return "?";
}

bool ConquerResult::proofs_ok() const {
  for (const auto& p : parts) {
    if (!p.check || !p.check->ok()) return false;
    if (p.audit && !p.audit->ok()) return false;
  }
  return true;
}

namespace {

struct PartWork {
  int index = 0;
  Cube root;
  std::vector<std::size_t> cubes;  // global cube indices
  std::vector<Cube> refuted;
  bool truncated = false;  // some cube of this part is outside the slice
};

struct PartRun {
  PartOutcome outcome;
  std::vector<std::pair<std::size_t, CubeOutcome>> cubes;
  std::vector<CompletionRecord> completions;
};

bool has_prefix(const Cube& c, const Cube& root) {
  return c.literals.size() >= root.literals.size() &&
         std::equal(root.literals.begin(), root.literals.end(), c.literals.begin());
}

}  // namespace

ConquerResult run_conquer(const ConquerOptions& o) {
  const auto start = Clock::now();
  const LoadedInstance li = load_instance(o.instance);
  const CnfInstance& inst = li.instance;
  const OvalFrame& frame = li.frame;
  auto icnf_in = open_in(o.cubes);
  const IcnfFile icnf = read_icnf(icnf_in);
  const std::string source_hash = sha256_file(o.instance);
  if (!icnf.cubes.source_hash.empty() && icnf.cubes.source_hash != source_hash) {
    throw std::invalid_argument("cube file was generated from a different instance");
  }
  if (icnf.instance.var_count != inst.var_count || icnf.instance.clauses.size() != inst.clauses.size()) {
    throw std::invalid_argument("cube file clauses do not match the instance");
  }
  std::vector<Cube> refuted;
  if (const fs::path side = o.cubes.string() + ".refuted"; fs::exists(side)) {
    auto sin = open_in(side);
    refuted = read_cube_lines(sin);
  }
  for (const auto& c : icnf.cubes.cubes) validate_cube(inst.var_count, c);
  const LabelTable table = read_label_table(o.label_table);
  const Assignment fixed = fixed_block_cells(frame, inst, table);
  const BlockGroups groups = block_groups(frame, inst);
  const int own_label = inst.provenance.fixed_label;

  // Parts and their cubes.
  std::vector<PartWork> work;
  const auto& cubes = icnf.cubes.cubes;
  if (icnf.cubes.part_cubes.empty()) {
    work.push_back({0, Cube{}, {}, {}, false});
  } else {
    for (std::size_t k = 0; k < icnf.cubes.part_cubes.size(); ++k) {
      work.push_back({static_cast<int>(k), icnf.cubes.part_cubes[k], {}, {}, false});
    }
  }
  const std::size_t limit = o.max_cubes == 0 ? cubes.size() : std::min(o.max_cubes, cubes.size());
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    const int part = icnf.cubes.cube_part.empty() ? 0 : icnf.cubes.cube_part[i];
    if (part < 0 || part >= static_cast<int>(work.size()) || !has_prefix(cubes[i], work[part].root)) {
      throw std::invalid_argument("cube " + std::to_string(i + 1) + " lies outside its part");
    }
    if (i < limit) {
      work[part].cubes.push_back(i);
    } else {
      work[part].truncated = true;
    }
  }
  std::vector<Cube> top_refuted;
  for (const auto& r : refuted) {
    int best = -1;
    for (std::size_t k = 0; k < work.size(); ++k) {
      if (has_prefix(r, work[k].root) && r.literals.size() > work[k].root.literals.size() &&
          (best < 0 || work[k].root.literals.size() > work[best].root.literals.size())) {
        best = static_cast<int>(k);
      }
    }
    if (best < 0) {
      top_refuted.push_back(r);
    } else {
      work[best].refuted.push_back(r);
    }
  }
  // Parts with no selected cubes are skipped entirely in a slice.
  std::vector<PartWork> active;
  for (auto& w : work) {
    if (!w.cubes.empty() || (o.max_cubes == 0 && !w.truncated)) active.push_back(std::move(w));
  }
  fs::create_directories(o.proof_dir);

  auto run_part = [&](std::size_t wi) {
    const PartWork& w = active[wi];
    PartRun pr;
    pr.outcome.index = w.index;
    pr.outcome.root = w.root;
    pr.outcome.cubes = w.cubes.size();
    pr.outcome.proof = o.proof_dir / ("part-" + std::to_string(w.index) + ".drup");
    {
      auto aout = open_out(o.proof_dir / ("part-" + std::to_string(w.index) + ".assume"));
      write_cube_lines(aout, {w.root});
    }
    auto pout = open_out(pr.outcome.proof);
    ProofWriter proof(pout);
    Solver solver(inst);
    solver.set_seed(o.seed + static_cast<std::uint64_t>(w.index));
    solver.set_proof(&proof);
    std::optional<SymmetryBreaker> breaker;
    std::vector<int> checked;
    for (int b : groups.blocks) {
      if (b != inst.provenance.fixed_block) checked.push_back(b);
    }
    if (o.symmetry && own_label > 0 && !checked.empty()) {
      breaker.emplace(frame, table, inst, checked, own_label);
      breaker->attach(solver);
    }
    std::vector<std::vector<Lit>> targets;
    bool all_closed = true;
    for (std::size_t ci : w.cubes) {
      const auto t0 = Clock::now();
      const std::uint64_t c0 = solver.stats().conflicts;
      CubeOutcome co;
      co.part = w.index;
      while (true) {
        Budget b = o.budget;
        if (o.budget.seconds > 0) b.seconds = std::max(1e-3, o.budget.seconds - since(t0));
        const SolveResult r = solver.solve(cubes[ci].literals, b);
        if (r.status == Status::Unknown) {
          co.status = CubeStatus::Unknown;
          break;
        }
        if (r.status == Status::Unsatisfiable) {
          co.status = co.completions ? CubeStatus::BlockedSat : CubeStatus::Unsat;
          const auto lemma = negated(cubes[ci].literals);
          proof.add(lemma);
          targets.push_back(lemma);
          break;
        }
        // A completion: record it and block it for the rest of the search.
        Assignment cells = model_assignment(frame, inst, r.model);
        cells.insert(fixed.begin(), fixed.end());
        CompletionRecord rec;
        rec.cells = cells;
        rec.valid = validate_partial(frame, cells).ok();
        std::vector<int> blocks{inst.provenance.fixed_block};
        blocks.insert(blocks.end(), checked.begin(), checked.end());
        rec.label_order = true;
        for (int b : blocks) {
          if (b == 0) continue;
          int label = 0;
          try {
            label = label_of_assigned_block(frame, b, cells, table);
          } catch (const std::exception&) {
            label = 0;
          }
          rec.labels.push_back(label);
          if (label == 0 || (!rec.labels.empty() && label < rec.labels.front())) rec.label_order = false;
        }
        pr.completions.push_back(std::move(rec));
        std::vector<Lit> block;
        for (int v = 1; v <= inst.var_count; ++v) {
          if (r.model[v]) block.push_back(-v);
        }
        ++co.completions;
        // A completion with no One among the variables is blocked by the
        // empty clause itself.
        if (block.empty()) proof.trusted(block);
        if (block.empty() || !solver.add_trusted_clause(block)) {
          // Nothing left to vary: the cube is exhausted by this completion.
          co.status = CubeStatus::BlockedSat;
          const auto lemma = negated(cubes[ci].literals);
          proof.add(lemma);
          targets.push_back(lemma);
          break;
        }
      }
      co.conflicts = solver.stats().conflicts - c0;
      co.seconds = since(t0);
      if (co.status == CubeStatus::Unknown) all_closed = false;
      pr.cubes.emplace_back(ci, co);
    }
    for (const auto& r : w.refuted) proof.add(negated(r.literals));
    std::vector<Cube> leaves = w.refuted;
    for (std::size_t ci : w.cubes) leaves.push_back(cubes[ci]);
    if (all_closed && !w.truncated && is_complete_tree(leaves, w.root)) {
      for (const auto& node : closure_prefixes(leaves, w.root)) proof.add(negated(node.literals));
      proof.add(std::vector<Lit>{});
      pr.outcome.closed = true;
    }
    proof.flush();
    close_out(pout, pr.outcome.proof);

    if (o.check) {
      CheckOptions copt;
      copt.memory_limit = o.memory_limit;
      if (!pr.outcome.closed) copt.targets = targets;
      {
        auto pin = open_in(pr.outcome.proof);
        pr.outcome.check = check_unsat(inst, w.root.literals, pin, copt);
      }
      std::vector<ProofLine> trusted;
      {
        auto pin = open_in(pr.outcome.proof);
        std::string text;
        ProofLine line;
        while (std::getline(pin, text)) {
          if (!text.empty() && text[0] == 't' && parse_proof_line(text, line)) trusted.push_back(line);
        }
      }
      AuditContext ctx;
      ctx.frame = &frame;
      ctx.table = &table;
      ctx.varmap = &inst.varmap;
      ctx.own_label = own_label;
      ctx.checked_blocks = checked;
      for (const auto& c : pr.completions) ctx.completions.push_back(c.cells);
      pr.outcome.audit = audit_trusted(trusted, ctx);
    }
    return pr;
  };

  auto runs = parallel_map<PartRun>(active.size(), o.jobs, run_part);

  ConquerResult res;
  std::map<std::size_t, CubeOutcome> by_index;
  bool unknown = false;
  bool all_parts_closed = true;
  for (auto& pr : runs) {
    for (auto& [i, co] : pr.cubes) {
      unknown |= co.status == CubeStatus::Unknown;
      by_index.emplace(i, co);
    }
    all_parts_closed &= pr.outcome.closed;
    for (auto& c : pr.completions) res.completions.push_back(std::move(c));
    res.parts.push_back(std::move(pr.outcome));
  }
  for (auto& [i, co] : by_index) res.cubes.push_back(co);

  // Parts and top-level refuted branches must cover the whole instance.
  std::vector<Cube> top_leaves = top_refuted;
  for (const auto& w : work) top_leaves.push_back(w.root);
  bool top_ok = is_complete_tree(top_leaves, Cube{});
  for (const auto& r : top_refuted) {
    const std::vector<ProofLine> p{{ProofKind::Add, {}}};
    top_ok &= check_unsat(inst, r.literals, p).verdict == Verdict::VerifiedUnsat;
  }
  if (unknown) {
    res.verdict = "UNKNOWN";
  } else if (all_parts_closed && active.size() == work.size() && top_ok) {
    res.verdict = "EXHAUSTED";
  } else {
    res.verdict = "SLICE";
  }
  res.seconds = since(start);

  CompletionFile cf;
  cf.order = frame.order();
  cf.first_block = groups.blocks.empty() ? inst.provenance.fixed_block : groups.blocks.front();
  if (inst.provenance.fixed_block != 0) cf.first_block = std::min(cf.first_block, inst.provenance.fixed_block);
  cf.last_block = groups.blocks.empty() ? inst.provenance.fixed_block : groups.blocks.back();
  if (cf.first_block == 0) {
    const auto& cols = inst.provenance.columns;
    cf.first_block = cols.empty() ? 1 : frame.block_of_column(cols.front());
    cf.last_block = cols.empty() ? 1 : frame.block_of_column(cols.back());
  }
  for (const auto& c : res.completions) {
    Assignment a;
    for (int col : frame.block_range_columns(cf.first_block, cf.last_block)) {
      for (int r : frame.unknown_rows(col)) {
        auto it = c.cells.find({r, col});
        a[{r, col}] = it != c.cells.end() && it->second;
      }
    }
    cf.completions.push_back(std::move(a));
  }
  const fs::path completions_file = o.proof_dir / "completions.txt";
  write_completions(completions_file, cf);
  const fs::path verdicts = o.proof_dir / "cubes.tsv";
  {
    auto vout = open_out(verdicts);
    vout << "# cube\tpart\tstatus\tcompletions\tconflicts\n";
    for (const auto& [i, co] : by_index) {
      vout << i + 1 << '\t' << co.part << '\t' << to_string(co.status) << '\t' << co.completions
           << '\t' << co.conflicts << '\n';
    }
    close_out(vout, verdicts);
  }

  StageRecord r;
  r.stage = "conquer";
  r.params = {{"max_cubes", std::to_string(o.max_cubes)},
              {"budget_conflicts", std::to_string(o.budget.conflicts)},
              {"budget_seconds", std::to_string(o.budget.seconds)},
              {"symmetry", o.symmetry ? "true" : "false"},
              {"check", o.check ? "true" : "false"}};
  r.inputs = {artifact("instance", o.instance, o.proof_dir), artifact("cubes", o.cubes, o.proof_dir),
              artifact("labels", o.label_table, o.proof_dir)};
  for (const auto& p : res.parts) {
    r.outputs.push_back(artifact("proof-" + std::to_string(p.index), p.proof, o.proof_dir));
  }
  r.outputs.push_back(artifact("completions", completions_file, o.proof_dir));
  r.outputs.push_back(artifact("verdicts", verdicts, o.proof_dir));
  std::map<std::string, int> tally;
  for (const auto& co : res.cubes) ++tally[to_string(co.status)];
  r.results["verdict"] = json(res.verdict).dump();
  r.results["cube_verdicts"] = json(tally).dump();
  r.results["completions"] = std::to_string(res.completions.size());
  json checks = json::array();
  for (const auto& p : res.parts) {
    json pj = {{"part", p.index}, {"closed", p.closed}, {"cubes", p.cubes}};
    if (p.check) {
      pj["verdict"] = to_string(p.check->verdict);
      pj["trusted"] = p.check->trusted;
      pj["peak_bytes"] = p.check->peak_bytes;
      if (!p.check->ok()) pj["reason"] = p.check->reason;
    }
    if (p.audit) pj["unjustified"] = p.audit->unjustified;
    checks.push_back(pj);
  }
  r.results["parts"] = checks.dump();
  r.jobs = o.jobs;
  r.seed = o.seed;
  r.seconds = res.seconds;
  append_record(o.proof_dir / "manifest.jsonl", r);
  return res;
}

std::vector<ExtendOutcome> run_extend(const ExtendOptions& o) {
  const CompletionFile cf = read_completions(o.completions);
  const OvalFrame frame = build_frame(cf.order);
  if (o.to_block <= cf.last_block || o.to_block > frame.num_blocks()) {
    throw std::invalid_argument("--to-block must lie after block " + std::to_string(cf.last_block) +
                                " and within " + std::to_string(frame.num_blocks()));
  }
  const bool whole = o.to_block == frame.num_blocks();
  if (!o.proof_dir.empty()) fs::create_directories(o.proof_dir);
  return parallel_map<ExtendOutcome>(cf.completions.size(), o.jobs, [&](std::size_t i) {
    const auto t0 = Clock::now();
    const Assignment& completion = cf.completions[i];
    ExtensionInstance ext =
        extension_instance(frame, completion, cf.first_block, cf.last_block, o.to_block, whole);
    ExtendOutcome out;
    std::optional<std::ofstream> pout;
    std::optional<ProofWriter> proof;
    const fs::path proof_file = o.proof_dir / ("extend-" + std::to_string(i + 1) + ".drup");
    if (!o.proof_dir.empty()) {
      pout.emplace(open_out(proof_file));
      proof.emplace(*pout);
    }
    const SolveResult r = solve(ext.instance, ext.cube, {}, {}, proof ? &*proof : nullptr, o.budget);
    out.status = r.status;
    if (proof) {
      proof->flush();
      close_out(*pout, proof_file);
    }
    if (r.status == Status::Satisfiable) {
      out.model = model_assignment(frame, ext.instance, r.model);
      for (const auto& [cell, v] : completion) out.model[cell] = v;
      out.valid = validate_partial(frame, out.model).ok() &&
                  check_model(ext.instance, ext.cube, r.model).ok();
    } else if (r.status == Status::Unsatisfiable && proof) {
      auto pin = open_in(proof_file);
      out.check = check_unsat(ext.instance, ext.cube, pin);
    }
    out.seconds = since(t0);
    return out;
  });
}

// ---- verify-counts ----

namespace {

std::uint64_t choose2(std::uint64_t x) { return x * (x - 1) / 2; }

std::uint64_t double_factorial_odd(int m) {
  std::uint64_t r = 1;
  for (int k = m - 1; k > 1; k -= 2) r *= static_cast<std::uint64_t>(k);
  return r;
}

}  // namespace

std::vector<CountCheck> verify_counts(const VerifyOptions& o) {
  const int n = o.order;
  const OvalFrame frame = build_frame(n);
  const std::uint64_t P = frame.oval_size();
  const std::uint64_t R = frame.num_rows();
  std::vector<CountCheck> out;
  out.push_back({"rows", choose2(P), R});
  out.push_back({"columns", static_cast<std::uint64_t>(n) * n + n + 1,
                 static_cast<std::uint64_t>(frame.num_points())});
  out.push_back({"perfect matchings of K_" + std::to_string(n), double_factorial_odd(n),
                 enumerate_perfect_matchings(n).size()});

  const int hi = std::min(6, frame.num_blocks());
  const auto slice = o.slice_columns.empty() ? frame.block_range_columns(2, hi) : o.slice_columns;
  const auto all = frame.block_range_columns(1, frame.num_blocks());
  const std::uint64_t nonoval = all.size();
  const std::uint64_t per_block_rows = choose2(static_cast<std::uint64_t>(n - 1));

  const CnfInstance full = encode(frame, all);
  out.push_back({"raw intersect-at-most-once, all blocks", choose2(P + nonoval) * choose2(R),
                 full.raw_counts.intersect_at_most_once});
  out.push_back({"raw oval-intersection, all blocks", P * nonoval, full.raw_counts.oval_intersection});
  out.push_back({"raw known-row-intersection, all blocks",
                 static_cast<std::uint64_t>(frame.num_blocks() - 1) * per_block_rows,
                 full.raw_counts.known_row_intersection});
  const CnfInstance part = encode(frame, slice);
  out.push_back({"raw intersect-at-most-once, blocks 2.." + std::to_string(hi),
                 choose2(P + slice.size()) * choose2(R), part.raw_counts.intersect_at_most_once});
  out.push_back({"raw oval-intersection, blocks 2.." + std::to_string(hi), P * slice.size(),
                 part.raw_counts.oval_intersection});
  out.push_back({"raw known-row-intersection, blocks 2.." + std::to_string(hi),
                 static_cast<std::uint64_t>(hi - 1) * per_block_rows,
                 part.raw_counts.known_row_intersection});

  // Fixed reference counts at order 10; elsewhere the frame's own tally.
  const std::uint64_t full_unknowns =
      n == 10 ? 2696 : static_cast<std::uint64_t>(frame.unknown_count(all));
  const std::uint64_t slice_unknowns =
      n == 10 ? 1199 : static_cast<std::uint64_t>(frame.unknown_count(frame.block_range_columns(2, hi)));
  out.push_back({"unknown variables, all blocks", full_unknowns, static_cast<std::uint64_t>(full.var_count)});
  out.push_back({"unknown variables, blocks 2.." + std::to_string(hi), slice_unknowns,
                 static_cast<std::uint64_t>(part.var_count)});

  if (o.enumerate) {
    static const std::map<int, std::uint64_t> classes{{2, 1}, {4, 1}, {6, 1}, {8, 6}, {10, 396}};
    static const std::map<int, std::uint64_t> seconds{{4, 1}, {6, 1}, {8, 2}, {10, 2}};
    const auto fzs = enumerate_nonisomorphic_factorizations(n);
    if (auto it = classes.find(n); it != classes.end()) {
      out.push_back({"1-factorization classes", it->second, fzs.size()});
    }
    if (auto it = seconds.find(n); it != seconds.end()) {
      out.push_back({"second-factor classes", it->second, second_factor_classes(n).size()});
    }
    const LabelTable table = build_label_table(fzs);
    if (n == 10) {
      out.push_back({"cycle patterns", 359, table.pessimistic_map().size()});
      std::uint64_t other = 0;
      for (const auto& fz : fzs) {
        for (int a = 0; a < n - 1; ++a) {
          for (int b = a + 1; b < n - 1; ++b) {
            const CycleType t = cycle_type(fz.factor(a), fz.factor(b));
            if (t != CycleType{4, 6} && t != CycleType{10}) ++other;
          }
        }
      }
      out.push_back({"factor pairs outside {4,6} and {10}", 0, other});
    }
    if (o.cubes && n >= 4) {
      const CnfInstance top =
          fix_block(frame, part, 2, table.entry(table.size()).factorization, table.size());
      const BlockGroups groups = block_groups(frame, top);
      int cutoff = 0;
      for (const auto& g : groups.vars) cutoff = std::max<int>(cutoff, static_cast<int>(g.size()));
      cutoff = std::max(1, cutoff * 9 / 10);
      const CubeSet cs = generate_cubes(top, groups.vars, {cutoff, 200, {}});
      std::vector<int> group_of(top.var_count + 1, -1);
      for (std::size_t g = 0; g < groups.vars.size(); ++g) {
        for (int v : groups.vars[g]) group_of[v] = static_cast<int>(g);
      }
      std::uint64_t restricted = 0;
      for (const auto& c : cs.cubes) {
        std::set<int> gs;
        for (Lit l : c.literals) gs.insert(group_of[std::abs(l)]);
        restricted += gs.size() <= 1;
      }
      out.push_back({"block-restricted cubes", cs.cubes.size(), restricted});
    }
  }
  return out;
}

}  // namespace ovalcert
