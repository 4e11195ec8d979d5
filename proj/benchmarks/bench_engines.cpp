#include <benchmark/benchmark.h>

#include "htc/analysis.hpp"
#include "htc/dense.hpp"
#include "htc/mps.hpp"
#include "htc/rng.hpp"
#include "htc/semiclassical.hpp"

namespace {

htc::HTCParams params(int n) {
  htc::HTCParams p;
  p.n_molecules = n;
  p.disorder_w = 0.5;
  p.n_max_vib = 6;
  return p;
}

void BM_TebdStep(benchmark::State& state) {
  const htc::HTCParams p = params(static_cast<int>(state.range(0)));
  const htc::HamiltonianTerms terms = htc::build_terms(p, htc::sample_disorder(p, 7));
  htc::EvolutionConfig cfg = htc::EvolutionConfig::defaults(p);
  cfg.chi_max = 32;
  cfg.throw_on_alarm = false;
  htc::TebdEngine engine(terms, cfg);
  htc::MatrixProductState mps = htc::MatrixProductState::from_product(
      htc::initial_state(htc::InitialStateSpec::molecule(1), p), p);
  for (int k = 0; k < 50; ++k) engine.step(mps, cfg.dt);
  for (auto _ : state) engine.step(mps, cfg.dt);
  state.counters["chi"] = static_cast<double>(mps.max_bond_dim());
}
BENCHMARK(BM_TebdStep)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_WignerGrid(benchmark::State& state) {
  const int n_max = static_cast<int>(state.range(0));
  const htc::CMatrix rho = htc::thermal_state(1.0, 1.0, n_max).density_matrix();
  for (auto _ : state) benchmark::DoNotOptimize(htc::wigner(rho));
}
BENCHMARK(BM_WignerGrid)->Arg(6)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_NonGaussianity(benchmark::State& state) {
  const htc::CMatrix rho = htc::thermal_state(1.0, 1.0, 8).density_matrix();
  for (auto _ : state) benchmark::DoNotOptimize(htc::non_gaussianity(rho));
}
BENCHMARK(BM_NonGaussianity);

void BM_TrajectoryStep(benchmark::State& state) {
  const htc::HTCParams p = params(static_cast<int>(state.range(0)));
  const htc::DisorderRealization real = htc::sample_disorder(p, 3);
  htc::CounterRng rng(11);
  htc::TrajectoryState st = htc::sample_initial(htc::InitialStateSpec::molecule(1), p, rng);
  const double dt = p.period() / 800.0;
  for (auto _ : state) htc::trajectory_step(st, p, real.epsilons, dt);
}
BENCHMARK(BM_TrajectoryStep)->Arg(16)->Arg(64);

void BM_DenseKrylovStep(benchmark::State& state) {
  const htc::HTCParams p = params(static_cast<int>(state.range(0)));
  const htc::DenseSystem sys(p, htc::sample_disorder(p, 5), 1);
  htc::DenseState s = sys.prepare(htc::InitialStateSpec::molecule(1));
  const double dt = p.period() / 400.0;
  for (auto _ : state) s = sys.step(s, dt);
  state.counters["dim"] = static_cast<double>(s.amplitudes.size());
}
BENCHMARK(BM_DenseKrylovStep)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
