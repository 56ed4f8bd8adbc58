// Command-line driver for the oval search: enumerate, encode, cube, conquer,
// extend, check, verify-counts and the long-running campaign.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "ovalcert/encoder.hpp"
#include "ovalcert/hash.hpp"
#include "ovalcert/manifest.hpp"
#include "ovalcert/pipeline.hpp"
#include "ovalcert/proofcheck.hpp"

using namespace ovalcert;

namespace {

// Exit codes of `check`, following the SAT competition convention.
constexpr int kExitModel = 10;
constexpr int kExitUnsat = 20;
constexpr int kExitLemmas = 30;
constexpr int kExitFailed = 1;
constexpr int kExitUnknown = 3;

std::pair<int, int> parse_range(const std::string& s) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) {
    const int b = std::stoi(s);
    return {b, b};
  }
  return {std::stoi(s.substr(0, dots)), std::stoi(s.substr(dots + 2))};
}

std::vector<int> parse_labels(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    const auto [lo, hi] = parse_range(tok);
    for (int l = lo; l <= hi; ++l) out.push_back(l);
  }
  return out;
}

std::vector<bool> read_model(const std::string& file, int vars) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file);
  std::vector<bool> model(vars + 1, false);
  std::vector<bool> seen(vars + 1, false);
  std::string tok;
  while (in >> tok) {
    if (tok == "v" || tok == "s" || tok == "SATISFIABLE") continue;
    const int l = std::stoi(tok);
    if (l == 0) continue;
    if (std::abs(l) > vars) throw std::runtime_error("model literal out of range: " + tok);
    model[std::abs(l)] = l > 0;
    seen[std::abs(l)] = true;
  }
  for (int v = 1; v <= vars; ++v) {
    if (!seen[v]) return {};  // partial: check_model rejects it
  }
  return model;
}

int cmd_check(const std::string& instance_file, const std::string& proof_file,
              const std::string& assume_file, const std::string& model_file,
              const std::string& audit_labels, const std::string& completions_file,
              const std::string& targets_file, bool demote, double memory_mb) {
  const LoadedInstance li = load_instance(instance_file);
  std::vector<Lit> assumptions;
  if (!assume_file.empty()) {
    std::ifstream in(assume_file);
    for (const auto& c : read_cube_lines(in)) {
      assumptions.insert(assumptions.end(), c.literals.begin(), c.literals.end());
    }
  }
  if (!model_file.empty()) {
    const auto report = check_model(li.instance, assumptions, read_model(model_file, li.instance.var_count));
    std::cout << to_string(report.verdict);
    if (!report.ok()) std::cout << " at " << report.failed_step << ": " << report.reason;
    std::cout << '\n';
    return report.ok() ? kExitModel : kExitFailed;
  }
  CheckOptions options;
  options.demote_trusted = demote;
  options.memory_limit = static_cast<std::size_t>(memory_mb * 1024 * 1024);
  if (!targets_file.empty()) {
    std::ifstream in(targets_file);
    for (const auto& c : read_cube_lines(in)) {
      std::vector<Lit> clause;
      for (Lit l : c.literals) clause.push_back(-l);
      options.targets.push_back(clause);
    }
  }
  std::ifstream pin(proof_file);
  if (!pin) throw std::runtime_error("cannot read " + proof_file);
  const CheckReport report = check_unsat(li.instance, assumptions, pin, options);
  std::cout << to_string(report.verdict) << " lines " << report.lines << " checked " << report.checked
            << " trusted " << report.trusted << " deleted " << report.deleted << " peak_bytes "
            << report.peak_bytes << " seconds " << report.seconds << '\n';
  if (!report.ok()) std::cout << "failed at line " << report.failed_step << ": " << report.reason << '\n';
  int code = report.verdict == Verdict::VerifiedUnsat  ? kExitUnsat
             : report.verdict == Verdict::VerifiedLemmas ? kExitLemmas
                                                         : kExitFailed;
  if (!audit_labels.empty()) {
    const LabelTable table = read_label_table(audit_labels);
    AuditContext ctx;
    ctx.frame = &li.frame;
    ctx.table = &table;
    ctx.varmap = &li.instance.varmap;
    ctx.own_label = li.instance.provenance.fixed_label;
    for (int b : block_groups(li.frame, li.instance).blocks) {
      if (b != li.instance.provenance.fixed_block) ctx.checked_blocks.push_back(b);
    }
    if (!completions_file.empty()) {
      const CompletionFile cf = read_completions(completions_file);
      ctx.completions = cf.completions;
      if (li.instance.provenance.fixed_block != 0) {
        const auto fixed = block_cells(li.frame, li.instance.provenance.fixed_block,
                                       table.entry(ctx.own_label).factorization);
        for (auto& c : ctx.completions) c.insert(fixed.begin(), fixed.end());
      }
    }
    std::ifstream again(proof_file);
    const auto proof = read_proof(again);
    const AuditReport audit = audit_trusted(proof, ctx);
    std::cout << "audit justified " << audit.justified << " unjustified " << audit.unjustified << '\n';
    for (const auto& e : audit.entries) {
      if (e.kind == TrustedKind::Unjustified) {
        std::cout << "  line " << e.step << ": " << e.detail << '\n';
      }
    }
    if (!audit.ok()) code = kExitFailed;
  }
  return code;
}

void print_conquer(const ConquerResult& r) {
  std::map<std::string, int> tally;
  for (std::size_t i = 0; i < r.cubes.size(); ++i) {
    ++tally[to_string(r.cubes[i].status)];
    std::cout << "cube " << i + 1 << ' ' << to_string(r.cubes[i].status) << " completions "
              << r.cubes[i].completions << " conflicts " << r.cubes[i].conflicts << '\n';
  }
  for (const auto& p : r.parts) {
    std::cout << "part " << p.index << " cubes " << p.cubes << (p.closed ? " closed" : " open");
    if (p.check) std::cout << ' ' << to_string(p.check->verdict) << " peak_bytes " << p.check->peak_bytes;
    if (p.check && !p.check->ok()) std::cout << " (" << p.check->reason << ')';
    if (p.audit) std::cout << " audit " << p.audit->justified << '/' << p.audit->unjustified;
    std::cout << '\n';
  }
  for (const auto& [k, v] : tally) std::cout << k << ' ' << v << '\n';
  std::cout << "completions " << r.completions.size() << '\n';
  std::cout << "verdict " << r.verdict << " seconds " << r.seconds << '\n';
}


struct CampaignOptions {
  int order = 10;
  fs::path work;
  std::string labels;
  int cutoff = 228;
  int parts = 0;
  int jobs = 1;
  double time_budget = 0;
};

// Every class of block 2 in descending label order, then the extension of
// all surviving completions by one more block. Labels already listed in
// campaign.tsv with an EXHAUSTED verdict are skipped, so an interrupted
// campaign resumes where it stopped.
int cmd_campaign(const CampaignOptions& o) {
  const OvalFrame frame = build_frame(o.order);
  const int last = std::min(6, frame.num_blocks() - 1);
  const fs::path classes = o.work / "classes";
  if (!fs::exists(classes / "labels.txt")) run_enum(o.order, classes);
  const LabelTable table = read_label_table(classes / "labels.txt");

  std::vector<int> labels = parse_labels(o.labels);
  if (labels.empty()) {
    for (int l = 1; l <= table.size(); ++l) labels.push_back(l);
  }
  std::sort(labels.rbegin(), labels.rend());

  const fs::path log_file = o.work / "campaign.tsv";
  std::map<int, std::string> done;
  if (std::ifstream in(log_file); in) {
    int label;
    std::string verdict, rest;
    while (in >> label >> verdict && std::getline(in, rest)) done[label] = verdict;
  }

  CompletionFile all{o.order, 2, last, {}};
  bool complete = true;
  for (int label : labels) {
    char name[32];
    std::snprintf(name, sizeof name, "run-%03d", label);
    const fs::path run = o.work / name;
    if (done.count(label) && done[label] == "EXHAUSTED") {
      const CompletionFile cf = read_completions(run / "completions.txt");
      all.completions.insert(all.completions.end(), cf.completions.begin(), cf.completions.end());
      continue;
    }
    GenOptions g{.order = o.order, .first_block = 2, .last_block = last, .classes_dir = classes,
                 .out_dir = o.work / "inst", .labels = {label}};
    const auto inst = run_gen_instances(g).front().cnf;
    const fs::path icnf = fs::path(inst).replace_extension(".icnf");
    run_cube({.instance = inst, .out = icnf, .cutoff = o.parts > 0 ? -1 : o.cutoff, .parts = o.parts});
    ConquerOptions c;
    c.instance = inst;
    c.cubes = icnf;
    c.label_table = classes / "labels.txt";
    c.proof_dir = run;
    c.jobs = o.jobs;
    c.budget = {0, o.time_budget};
    c.check = true;
    const ConquerResult r = run_conquer(c);
    const bool ok = r.proofs_ok();
    std::size_t kept = 0;
    for (const auto& rec : r.completions) {
      if (!rec.valid) continue;
      all.completions.push_back(rec.cells);
      ++kept;
    }
    std::ofstream(log_file, std::ios::app) << label << '\t' << (ok ? r.verdict : "CHECK_FAILED") << '\t'
                                           << kept << '\t' << r.seconds << '\n';
    std::cout << "label " << label << ' ' << r.verdict << " completions " << kept << " seconds " << r.seconds
              << (ok ? "" : " CHECK FAILED") << std::endl;
    complete &= ok && r.verdict == "EXHAUSTED";
  }

  const fs::path merged = o.work / "completions.txt";
  write_completions(merged, all);
  std::cout << "completions of blocks 2.." << last << ": " << all.completions.size() << '\n';
  if (!complete) return kExitUnknown;
  if (all.completions.empty()) return 0;
  int code = 0;
  std::size_t sat = 0;
  for (const auto& x : run_extend({.completions = merged, .to_block = last + 1,
                                   .proof_dir = o.work / "extend", .budget = {}, .jobs = o.jobs})) {
    sat += x.status == Status::Satisfiable;
    if ((x.status == Status::Satisfiable && !x.valid) || (x.check && !x.check->ok())) code = kExitFailed;
  }
  std::cout << "extensions to block " << last + 1 << " satisfiable: " << sat << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified search for ovals in projective planes of even order"};
  app.require_subcommand(1);

  int m = 10;
  std::string out_dir;
  auto* enum_cmd = app.add_subcommand("enum-1f", "Enumerate 1-factorizations of K_m up to isomorphism");
  enum_cmd->add_option("--m", m, "Number of vertices (even, 2..10)")->required();
  enum_cmd->add_option("--out", out_dir, "Output directory")->required();

  GenOptions gen;
  std::string blocks = "2..6";
  std::string labels;
  bool no_simplify = false;
  gen.jobs = default_jobs();
  auto* gen_cmd = app.add_subcommand("gen-instances", "One CNF per class of the fixed block");
  gen_cmd->add_option("--n", gen.order, "Plane order")->required();
  gen_cmd->add_option("--blocks", blocks, "Block range LO..HI; block LO is fixed");
  gen_cmd->add_option("--classes", gen.classes_dir, "Directory written by enum-1f")->required();
  gen_cmd->add_option("--out", gen.out_dir, "Output directory")->required();
  gen_cmd->add_option("--labels", labels, "Only these labels, e.g. 396 or 1..10,42");
  gen_cmd->add_flag("--no-simplify", no_simplify, "Keep fixed cells as unit clauses");
  gen_cmd->add_option("--jobs", gen.jobs, "Worker threads");

  CubeStageOptions cube;
  std::string cube_out;
  auto* cube_cmd = app.add_subcommand("cube", "Split an instance into cubes");
  cube_cmd->add_option("--instance", cube.instance, "DIMACS instance")->required()->check(CLI::ExistingFile);
  cube_cmd->add_option("--cutoff", cube.cutoff, "Free-variable reduction per cube");
  cube_cmd->add_option("--parts", cube.parts, "Toplevel subinstances");
  cube_cmd->add_option("--max-cubes", cube.max_cubes, "Stop after this many cubes per part");
  cube_cmd->add_option("--out", cube_out, "Output iCNF (default: instance path with .icnf)");

  ConquerOptions conq;
  conq.jobs = default_jobs();
  std::uint64_t budget = 0;
  double time_budget = 0;
  bool no_symmetry = false;
  auto* conq_cmd = app.add_subcommand("conquer", "Solve cubes under assumptions with proofs");
  conq_cmd->add_option("--instance", conq.instance, "DIMACS instance")->required()->check(CLI::ExistingFile);
  conq_cmd->add_option("--cubes", conq.cubes, "iCNF cube file")->required()->check(CLI::ExistingFile);
  conq_cmd->add_option("--label-table", conq.label_table, "labels.txt from enum-1f")->required()->check(CLI::ExistingFile);
  conq_cmd->add_option("--proof-dir", conq.proof_dir, "Directory for proofs and results")->required();
  conq_cmd->add_option("--jobs", conq.jobs, "Worker threads");
  conq_cmd->add_option("--budget", budget, "Conflict budget per cube (0 = none)");
  conq_cmd->add_option("--time-budget", time_budget, "Seconds per cube (0 = none)");
  conq_cmd->add_option("--max-cubes", conq.max_cubes, "Only the first N cubes");
  conq_cmd->add_option("--seed", conq.seed, "Solver seed");
  conq_cmd->add_flag("--check", conq.check, "Verify every part proof and audit trusted lines");
  conq_cmd->add_flag("--no-symmetry", no_symmetry, "Disable the symmetry callback");

  ExtendOptions ext;
  ext.jobs = default_jobs();
  auto* ext_cmd = app.add_subcommand("extend", "Extend recorded completions by further blocks");
  ext_cmd->add_option("--completion", ext.completions, "completions.txt from conquer")->required()->check(CLI::ExistingFile);
  ext_cmd->add_option("--to-block", ext.to_block, "Last block to fill")->required();
  ext_cmd->add_option("--proof-dir", ext.proof_dir, "Write and check proofs here");
  ext_cmd->add_option("--jobs", ext.jobs, "Worker threads");

  std::string instance, proof, assume, model, audit, completions, targets;
  bool demote = false;
  double memory_mb = 4096;
  auto* check_cmd = app.add_subcommand("check", "Verify a proof or a model");
  check_cmd->add_option("--instance", instance, "DIMACS instance")->required()->check(CLI::ExistingFile);
  auto* proof_opt = check_cmd->add_option("--proof", proof, "DRUP proof with trusted lines");
  auto* model_opt = check_cmd->add_option("--model", model, "Model as DIMACS literals");
  proof_opt->excludes(model_opt);
  check_cmd->add_option("--assume", assume, "Cube file whose literals are assumed");
  check_cmd->add_option("--audit-trusted", audit, "Label table for re-deriving trusted lines");
  check_cmd->add_option("--completions", completions, "Recorded completions for the audit");
  check_cmd->add_option("--targets", targets, "Cube file; the negation of each cube must follow");
  check_cmd->add_flag("--demote-trusted", demote, "Check trusted lines by RUP as well");
  check_cmd->add_option("--memory-limit", memory_mb, "Clause storage limit in MiB (0 = none)");

  VerifyOptions verify;
  bool no_enumerate = false;
  auto* verify_cmd = app.add_subcommand("verify-counts", "Recompute the structural counts");
  verify_cmd->add_option("--n", verify.order, "Plane order")->required();
  verify_cmd->add_flag("--no-enumerate", no_enumerate, "Skip the factorization census");

  CampaignOptions camp;
  camp.jobs = default_jobs();
  auto* camp_cmd = app.add_subcommand("campaign", "Conquer every class, then extend the completions");
  camp_cmd->add_option("--n", camp.order, "Plane order");
  camp_cmd->add_option("--work", camp.work, "Working directory (resumable)")->required();
  camp_cmd->add_option("--labels", camp.labels, "Only these labels");
  camp_cmd->add_option("--cutoff", camp.cutoff, "Cube cutoff");
  camp_cmd->add_option("--parts", camp.parts, "Toplevel parts instead of a cutoff");
  camp_cmd->add_option("--time-budget", camp.time_budget, "Seconds per cube (0 = none)");
  camp_cmd->add_option("--jobs", camp.jobs, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*enum_cmd) {
      const EnumOutput r = run_enum(m, out_dir);
      std::cout << r.classes.size() << '\n';
      std::cerr << "patterns " << r.table.pessimistic_map().size() << " seconds " << r.seconds << '\n';
      return 0;
    }
    if (*gen_cmd) {
      std::tie(gen.first_block, gen.last_block) = parse_range(blocks);
      gen.labels = parse_labels(labels);
      gen.simplify = !no_simplify;
      const auto made = run_gen_instances(gen);
      for (const auto& g : made) {
        std::cout << g.cnf.string() << " label " << g.label << " variables " << g.var_count
                  << " clauses " << g.clauses << '\n';
      }
      std::cout << made.size() << " instances\n";
      return 0;
    }
    if (*cube_cmd) {
      cube.out = cube_out.empty() ? fs::path(cube.instance).replace_extension(".icnf") : fs::path(cube_out);
      const CubeSet cs = run_cube(cube);
      std::cout << "cubes " << cs.cubes.size() << " refuted " << cs.refuted.size() << " -> "
                << cube.out.string() << '\n';
      return 0;
    }
    if (*conq_cmd) {
      conq.budget = {budget, time_budget};
      conq.symmetry = !no_symmetry;
      const ConquerResult r = run_conquer(conq);
      print_conquer(r);
      if (conq.check && !r.proofs_ok()) return kExitFailed;
      return r.verdict == "UNKNOWN" ? kExitUnknown : 0;
    }
    if (*ext_cmd) {
      const auto outcomes = run_extend(ext);
      int code = 0;
      for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        std::cout << "completion " << i + 1 << ' ' << to_string(o.status);
        if (o.status == Status::Satisfiable) std::cout << (o.valid ? " valid" : " INVALID");
        if (o.check) std::cout << ' ' << to_string(o.check->verdict);
        std::cout << " seconds " << o.seconds << '\n';
        if ((o.status == Status::Satisfiable && !o.valid) || (o.check && !o.check->ok())) code = kExitFailed;
        if (o.status == Status::Unknown && code == 0) code = kExitUnknown;
      }
      return code;
    }
    if (*check_cmd) {
      if (proof.empty() && model.empty()) throw std::runtime_error("give --proof or --model");
      return cmd_check(instance, proof, assume, model, audit, completions, targets, demote, memory_mb);
    }
    if (*camp_cmd) return cmd_campaign(camp);
    if (*verify_cmd) {
      verify.enumerate = !no_enumerate;
      bool ok = true;
      for (const auto& c : verify_counts(verify)) {
        std::cout << (c.ok() ? "ok   " : "FAIL ") << c.name << ": expected " << c.expected << " got "
                  << c.actual << '\n';
        ok &= c.ok();
      }
      return ok ? 0 : kExitFailed;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
