#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "facloc/geometry.hpp"
#include "facloc/mechanisms.hpp"
#include "facloc/objectives.hpp"
#include "facloc/properties.hpp"
#include "facloc/search.hpp"

using namespace facloc;

namespace {

Profile profile_for(std::size_t n, std::size_t d) { return random_profile(n, d, 17, 0); }

void BM_Distance(benchmark::State& state) {
  const Norm norm = Norm::lp(static_cast<double>(state.range(0)) / 2.0);
  const Point a{0.3, -1.2, 2.5}, b{1.0, 0.5, -0.25};
  for (auto _ : state) benchmark::DoNotOptimize(norm.distance(a, b));
}
BENCHMARK(BM_Distance)->Arg(2)->Arg(3)->Arg(4)->Arg(6);

void BM_Mechanism(benchmark::State& state) {
  const MechanismSpec specs[] = {MechanismSpec::make_rand_med(), MechanismSpec::make_rand_center(),
                                 MechanismSpec::make_separate_2dictator(0), MechanismSpec::make_coordinate_median()};
  const MechanismSpec& spec = specs[state.range(0)];
  const Profile p = profile_for(static_cast<std::size_t>(state.range(1)), 2);
  const Norm norm = Norm::lp(2);
  for (auto _ : state) benchmark::DoNotOptimize(apply(spec, p, norm));
  state.SetLabel(spec.to_string());
}
BENCHMARK(BM_Mechanism)->ArgsProduct({{0, 1, 2, 3}, {3, 16}});

// Weiszfeld (p = 2), coordinate median (p = 1) and grid refinement (p = 3).
void BM_SocialOptimum(benchmark::State& state) {
  const Norm norm = Norm::lp(static_cast<double>(state.range(0)));
  const Profile p = profile_for(static_cast<std::size_t>(state.range(1)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(opt_social_cost(p.points(), norm));
}
BENCHMARK(BM_SocialOptimum)->ArgsProduct({{1, 2, 3}, {5, 20}})->Unit(benchmark::kMicrosecond);

void BM_MaxOptimum(benchmark::State& state) {
  const Norm norm = Norm::lp(static_cast<double>(state.range(0)));
  const Profile p = profile_for(static_cast<std::size_t>(state.range(1)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(opt_max_cost(p.points(), norm));
}
BENCHMARK(BM_MaxOptimum)->ArgsProduct({{2, 3}, {5, 20}})->Unit(benchmark::kMicrosecond);

void BM_GroupStrategyproofSearch(benchmark::State& state) {
  const Mechanism m(MechanismSpec::make_rand_center());
  SearchConfig c;
  c.restarts = 5;
  c.workers = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(search_gsp_violation(m, Norm::lp(2), 3, 2, c));
}
BENCHMARK(BM_GroupStrategyproofSearch)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
