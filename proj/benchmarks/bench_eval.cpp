// Throughput of the chunked evaluator on the graphs the training loop
// actually runs: dense forward passes, PDE residual graphs, and the
// forward+reverse gradient sweep.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "pinn/eval.hpp"
#include "pinn/network.hpp"
#include "pinn/problems.hpp"

namespace {

pinn::NetworkSpec spec3(int width) {
  pinn::NetworkSpec spec;
  spec.inputs = {"x", "y", "t"};
  spec.hidden = {width, width, width, width};
  spec.activation = pinn::Activation::Sin;
  return spec;
}

void BM_DenseForward(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  pinn::Graph g;
  pinn::NetworkSpec spec = spec3(width);
  pinn::ParamStore store = pinn::initialize(spec, 1);
  pinn::Expr u = pinn::build_dense(g, spec, store)[0];
  pinn::CompiledExpr ce(g, u);

  const std::size_t n = 4096;
  std::vector<double> xs(n), ys(n), ts(n);
  std::mt19937_64 rng(7);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    ys[i] = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    ts[i] = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  }
  const double* cols[3] = {xs.data(), ys.data(), ts.data()};
  std::vector<std::uint32_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(i);
  pinn::CompiledExpr::Workspace ws;
  constexpr std::size_t kC = pinn::CompiledExpr::kChunk;
  for (auto _ : state) {
    double sum = 0;
    for (std::size_t c = 0; c * kC < n; ++c) {
      const int cn = static_cast<int>(std::min(kC, n - c * kC));
      ce.forward_chunk(ws, store.values(), cols, {}, idx.data() + c * kC, cn, 1);
      sum += ws.root[0];
    }
    benchmark::DoNotOptimize(sum);
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * static_cast<int64_t>(n));
  state.counters["slots"] = static_cast<double>(ce.slot_count());
}
BENCHMARK(BM_DenseForward)->Arg(20)->Arg(40);

void BM_ResidualGradient(benchmark::State& state) {
  // Membrane PDE residual: value + parameter gradient over one batch.
  pinn::ProblemDef def = pinn::membrane_problem(pinn::Mode::Forward);
  def.train.threads = 1;
  pinn::AssembledProblem ap = pinn::assemble(def, 3, 1);
  std::vector<double> grad(ap.store.values().size(), 0.0);
  for (auto _ : state) {
    std::fill(grad.begin(), grad.end(), 0.0);
    auto b = ap.loss.loss_and_gradient(ap.store.values(), grad);
    benchmark::DoNotOptimize(b.total);
  }
}
BENCHMARK(BM_ResidualGradient)->Unit(benchmark::kMillisecond);

void BM_PlateResidualGradient(benchmark::State& state) {
  pinn::ProblemDef def = pinn::plate_problem(pinn::Mode::Forward);
  def.train.threads = 1;
  pinn::AssembledProblem ap = pinn::assemble(def, 3, 1);
  std::vector<double> grad(ap.store.values().size(), 0.0);
  for (auto _ : state) {
    std::fill(grad.begin(), grad.end(), 0.0);
    auto b = ap.loss.loss_and_gradient(ap.store.values(), grad);
    benchmark::DoNotOptimize(b.total);
  }
}
BENCHMARK(BM_PlateResidualGradient)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
