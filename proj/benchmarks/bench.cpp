#include <benchmark/benchmark.h>

#include "clpds/scenario.hpp"

using namespace clpds;

static void BM_FullOrderStep(benchmark::State& state) {
  ScenarioConfig cfg = scenario_sim1();
  cfg.noise = NoiseSpec::off();
  const Series tr =
      simulate_truth(cfg.m0, make_profile(cfg), cfg.dt, 2.0, cfg.bounds);
  const auto sdot = differentiate_state(tr, DiffMethod::central2);

  std::vector<StackEntry> cl;
  for (int j = 0; j < 4; ++j)
    cl.push_back(StackEntry::make(tr[j].t, tr[j].f.s(), tr[j].u, sdot[j]));

  FullOrderObserver obs(cfg.gains, cfg.projector());
  obs.state.s_hat = cfg.s_hat0;
  obs.state.chi_hat = cfg.chi_hat0;
  const Measurement m{tr[5].f.s(), tr[5].u};
  for (auto _ : state) {
    obs.step(m, cl, cfg.dt);
    benchmark::DoNotOptimize(obs.state.chi_hat);
  }
}
BENCHMARK(BM_FullOrderStep);

static void BM_ReducedStepWideStack(benchmark::State& state) {
  ScenarioConfig cfg = scenario_sim2();
  cfg.noise = NoiseSpec::off();
  const Series tr =
      simulate_truth(cfg.m0, make_profile(cfg), cfg.dt, 10.0, cfg.bounds);

  std::vector<StackEntry> cl;
  for (int j = 0; j < 121; ++j)
    cl.push_back(StackEntry::make(tr[j].t, tr[j].f.s(), tr[j].u));

  ReducedOrderObserver obs(cfg.K_bar, ReducedMode::integral, cfg.projector());
  obs.initialize(cfg.chi_hat0, cl);
  const Measurement m{tr[150].f.s(), tr[150].u};
  for (auto _ : state) {
    obs.step(m, cl, cfg.dt);
    benchmark::DoNotOptimize(obs.chi_hat());
  }
}
BENCHMARK(BM_ReducedStepWideStack);

static void BM_Sim1FullRun(benchmark::State& state) {
  ScenarioConfig cfg = scenario_sim1();
  for (auto _ : state) {
    const RunResult r = run_scenario(cfg);
    benchmark::DoNotOptimize(r.est.back().chi_hat);
  }
}
BENCHMARK(BM_Sim1FullRun)->Unit(benchmark::kMillisecond);

static void BM_StackPush(benchmark::State& state) {
  ScenarioConfig cfg = scenario_sim2();
  cfg.noise = NoiseSpec::off();
  const Series tr =
      simulate_truth(cfg.m0, make_profile(cfg), cfg.dt, 10.0, cfg.bounds);
  std::size_t k = 0;
  AuxiliaryStack aux(150);
  HistoryStack hist(120, cfg.epsilon);
  for (auto _ : state) {
    const auto& s = tr[k];
    push_measurement(aux, hist,
                     StackEntry::make(s.t, s.f.s(), s.u));
    k = (k + 1) % tr.size();
    benchmark::DoNotOptimize(hist.sigma1());
  }
}
BENCHMARK(BM_StackPush);

BENCHMARK_MAIN();
