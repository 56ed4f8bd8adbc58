#include <benchmark/benchmark.h>

#include <random>

#include "ovalcert/canon.hpp"
#include "ovalcert/cube.hpp"
#include "ovalcert/encoder.hpp"
#include "ovalcert/onefact.hpp"
#include "ovalcert/proofcheck.hpp"
#include "ovalcert/solver.hpp"

using namespace ovalcert;

namespace {

CnfInstance pigeonhole(int pigeons, int holes) {
  CnfInstance inst;
  inst.var_count = pigeons * holes;
  auto var = [&](int p, int h) { return p * holes + h + 1; };
  for (int p = 0; p < pigeons; ++p) {
    std::vector<Lit> c;
    for (int h = 0; h < holes; ++h) c.push_back(var(p, h));
    inst.clauses.add(c);
  }
  for (int h = 0; h < holes; ++h) {
    for (int p = 0; p < pigeons; ++p) {
      for (int q = p + 1; q < pigeons; ++q) inst.clauses.add({-var(p, h), -var(q, h)});
    }
  }
  return inst;
}

CnfInstance random_3sat(int vars, double ratio, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  CnfInstance inst;
  inst.var_count = vars;
  const int clauses = static_cast<int>(vars * ratio);
  for (int i = 0; i < clauses; ++i) {
    std::vector<Lit> c;
    for (int k = 0; k < 3; ++k) {
      const Lit v = 1 + static_cast<Lit>(rng() % vars);
      c.push_back(rng() % 2 ? v : -v);
    }
    inst.clauses.add(c);
  }
  return inst;
}

void BM_SolvePigeonhole(benchmark::State& state) {
  const int h = static_cast<int>(state.range(0));
  const CnfInstance inst = pigeonhole(h + 1, h);
  for (auto _ : state) benchmark::DoNotOptimize(solve(inst).status);
}
BENCHMARK(BM_SolvePigeonhole)->DenseRange(6, 8)->Unit(benchmark::kMillisecond);

void BM_SolveRandom3Sat(benchmark::State& state) {
  const CnfInstance inst = random_3sat(static_cast<int>(state.range(0)), 4.26, 7);
  for (auto _ : state) benchmark::DoNotOptimize(solve(inst).status);
}
BENCHMARK(BM_SolveRandom3Sat)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_CheckPigeonholeProof(benchmark::State& state) {
  const int h = static_cast<int>(state.range(0));
  const CnfInstance inst = pigeonhole(h + 1, h);
  ProofRecorder proof;
  solve(inst, {}, {}, {}, &proof);
  for (auto _ : state) benchmark::DoNotOptimize(check_unsat(inst, {}, proof.lines).verdict);
  state.counters["lines"] = static_cast<double>(proof.lines.size());
}
BENCHMARK(BM_CheckPigeonholeProof)->DenseRange(6, 8)->Unit(benchmark::kMillisecond);

void BM_CanonicalFormBlockGraph(benchmark::State& state) {
  const auto classes = enumerate_nonisomorphic_factorizations(static_cast<int>(state.range(0)));
  const ColoredGraph g = block_incidence_graph(classes.back());
  for (auto _ : state) benchmark::DoNotOptimize(canonicalize(g).automorphisms);
}
BENCHMARK(BM_CanonicalFormBlockGraph)->Arg(8)->Arg(10)->Unit(benchmark::kMicrosecond);

void BM_EnumerateFactorizations(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_nonisomorphic_factorizations(m).size());
}
BENCHMARK(BM_EnumerateFactorizations)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_GenerateCubes(benchmark::State& state) {
  const OvalFrame f = build_frame(8);
  const CnfInstance inst = encode(f, f.block_range_columns(3, 5));
  std::vector<std::vector<int>> groups;
  for (int j = 3; j <= 5; ++j) {
    std::vector<int> g;
    for (int c : f.block_columns(j)) {
      for (int r : f.unknown_rows(c)) g.push_back(inst.varmap.var_of({r, c}));
    }
    groups.push_back(g);
  }
  const int cutoff = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(generate_cubes(inst, groups, {.cutoff = cutoff}).cubes.size());
}
BENCHMARK(BM_GenerateCubes)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_EncodeOrderTen(benchmark::State& state) {
  const OvalFrame f = build_frame(10);
  const auto cols = f.block_range_columns(2, 6);
  for (auto _ : state) benchmark::DoNotOptimize(encode(f, cols).var_count);
}
BENCHMARK(BM_EncodeOrderTen)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
