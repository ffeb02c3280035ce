// Microbenchmarks for the hot paths: transition construction, the three
// stationary-state routes, the future-payoff series, gradient evaluation and
// the per-step cost of both learning dynamics.
#include <benchmark/benchmark.h>

#include <vector>

#include "mmgames/dynamics.hpp"
#include "mmgames/game.hpp"
#include "mmgames/markov.hpp"
#include "mmgames/metrics.hpp"
#include "mmgames/perturbation.hpp"
#include "mmgames/rng.hpp"

using namespace mmg;

namespace {

// shape arguments: (m, n); payoffs are a fixed random zero-sum draw
GameSpec GameFor(const benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  Rng rng(3);
  std::vector<double> payoff(static_cast<std::size_t>(m) * m);
  for (double& v : payoff) v = rng.Uniform(-2.0, 2.0);
  return GameSpec(m, n, payoff);
}

StrategyProfile InteriorProfile(const GameSpec& game, std::uint64_t seed) {
  Rng rng(seed);
  StrategyProfile p(game.N(), game.m, 0.0);
  for (std::size_t s = 0; s < game.N(); ++s) {
    const std::vector<double> row = rng.SimplexInterior(game.m);
    for (int a = 0; a < game.m; ++a) p.At(s, a) = row[a];
  }
  return p;
}

void ShapeArgs(benchmark::internal::Benchmark* b) {
  b->Args({2, 1})->Args({2, 2})->Args({3, 1})->Args({3, 2});
}

void TransitionBuild(benchmark::State& state) {
  const GameSpec game = GameFor(state);
  const StrategyProfile x = InteriorProfile(game, 11);
  const StrategyProfile y = InteriorProfile(game, 12);
  for (auto _ : state) {
    TransitionMatrix M(x, y, game);
    benchmark::DoNotOptimize(M.prob.data());
  }
}
BENCHMARK(TransitionBuild)->Apply(ShapeArgs);

void StationaryPowerRoute(benchmark::State& state) {
  const GameSpec game = GameFor(state);
  const TransitionMatrix M(InteriorProfile(game, 11), InteriorProfile(game, 12), game);
  for (auto _ : state) {
    StationaryDistribution p = StationaryPower(M);
    benchmark::DoNotOptimize(p.p.data());
  }
}
BENCHMARK(StationaryPowerRoute)->Apply(ShapeArgs);

void StationaryDirectRoute(benchmark::State& state) {
  const GameSpec game = GameFor(state);
  const TransitionMatrix M(InteriorProfile(game, 11), InteriorProfile(game, 12), game);
  for (auto _ : state) {
    StationaryDistribution p = StationaryDirect(M);
    benchmark::DoNotOptimize(p.p.data());
  }
}
BENCHMARK(StationaryDirectRoute)->Apply(ShapeArgs);

void StationaryClosedFormRoute(benchmark::State& state) {
  const GameSpec game = GameSpec::MatchingPennies();
  const StrategyProfile x = InteriorProfile(game, 11);
  const StrategyProfile y = InteriorProfile(game, 12);
  for (auto _ : state) {
    StationaryDistribution p = StationaryClosedForm2x1(x, y);
    benchmark::DoNotOptimize(p.p.data());
  }
}
BENCHMARK(StationaryClosedFormRoute);

void FuturePayoffSeries(benchmark::State& state) {
  const GameSpec game = GameFor(state);
  const MarkovSystem sys(InteriorProfile(game, 11), InteriorProfile(game, 12), game);
  std::vector<double> e0(game.N(), 0.0);
  e0[0] = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(sys.Pi(e0, Player::X));
}
BENCHMARK(FuturePayoffSeries)->Apply(ShapeArgs);

void GradientExact(benchmark::State& state) {
  const GameSpec game = GameFor(state);
  const StrategyProfile x = InteriorProfile(game, 11);
  const StrategyProfile y = InteriorProfile(game, 12);
  for (auto _ : state) {
    GradientField g = PayoffGradientExact(x, y, game, Player::X);
    benchmark::DoNotOptimize(g.g.data());
  }
}
BENCHMARK(GradientExact)->Apply(ShapeArgs);

void GradientForwardFd(benchmark::State& state) {
  const GameSpec game = GameFor(state);
  const StrategyProfile x = InteriorProfile(game, 11);
  const StrategyProfile y = InteriorProfile(game, 12);
  for (auto _ : state) {
    GradientField g = PayoffGradientFd(x, y, game, 1e-6, Player::X);
    benchmark::DoNotOptimize(g.g.data());
  }
}
BENCHMARK(GradientForwardFd)->Apply(ShapeArgs);

void ReplicatorField(benchmark::State& state) {
  const GameSpec game = GameFor(state);
  const StrategyProfile x = InteriorProfile(game, 11);
  const StrategyProfile y = InteriorProfile(game, 12);
  for (auto _ : state) {
    FieldEvaluation f = MmrdField(x, y, game);
    benchmark::DoNotOptimize(f.dx.data());
  }
}
BENCHMARK(ReplicatorField)->Apply(ShapeArgs);

void GradientAscentFieldExact(benchmark::State& state) {
  const GameSpec game = GameFor(state);
  const StrategyProfile x = InteriorProfile(game, 11);
  const StrategyProfile y = InteriorProfile(game, 12);
  for (auto _ : state) {
    FieldEvaluation f = MmgaField(x, y, game, GradientMode::Exact);
    benchmark::DoNotOptimize(f.dx.data());
  }
}
BENCHMARK(GradientAscentFieldExact)->Apply(ShapeArgs);

void ReplicatorStep(benchmark::State& state) {
  const GameSpec game = GameFor(state);
  Rng rng(5);
  JointState js;
  js.x = InteriorProfile(game, 11);
  js.y = InteriorProfile(game, 12);
  js.current_state = 0;
  for (auto _ : state) benchmark::DoNotOptimize(MmrdStep(js, game, 1e-4, rng).clamps);
}
BENCHMARK(ReplicatorStep)->Apply(ShapeArgs);

void GradientAscentStep(benchmark::State& state) {
  const GameSpec game = GameFor(state);
  StrategyProfile x = InteriorProfile(game, 11);
  StrategyProfile y = InteriorProfile(game, 12);
  for (auto _ : state) benchmark::DoNotOptimize(MmgaStep(x, y, game, 1e-4, 1e-6));
}
BENCHMARK(GradientAscentStep)->Apply(ShapeArgs);

void ReducedFieldOrder3(benchmark::State& state) {
  const ExpansionConstants c({1.0, -1.0, -1.0, 1.0});
  DeviationState d;
  d.delta = {0.03, -0.02, 0.04, -0.01};
  d.epsilon = {-0.02, 0.01, -0.03, 0.02};
  for (auto _ : state) {
    DeviationRates r = ApproxField(d, 3, c);
    benchmark::DoNotOptimize(r.ddot.data());
  }
}
BENCHMARK(ReducedFieldOrder3);

void JacobianEigenvalue2x1(benchmark::State& state) {
  const GameSpec game = GameSpec::MatchingPennies();
  const StrategyProfile x = InteriorProfile(game, 11);
  const StrategyProfile y = InteriorProfile(game, 12);
  const JointFieldFn field = [&game](const StrategyProfile& xs, const StrategyProfile& ys) {
    return MmgaField(xs, ys, game, GradientMode::Exact);
  };
  for (auto _ : state)
    benchmark::DoNotOptimize(MaxJacobianEigenvalue(x, y, field, 1e-6, false));
}
BENCHMARK(JacobianEigenvalue2x1);

}  // namespace

BENCHMARK_MAIN();
