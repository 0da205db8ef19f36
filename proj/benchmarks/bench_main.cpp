#include <benchmark/benchmark.h>

#include "finmart/gop.hpp"
#include "finmart/noarb.hpp"
#include "finmart/scenario.hpp"

namespace {

finmart::Market crr_market(int periods) {
  finmart::Scenario s = finmart::make_crr_scenario(periods, finmart::Rat(2),
                                                   finmart::rat(1, 2), finmart::Rat(0),
                                                   finmart::rat(1, 2));
  return finmart::build_market(s);
}

void bm_find_emms(benchmark::State& state) {
  finmart::Market m = crr_market(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(finmart::find_emms(m));
}
BENCHMARK(bm_find_emms)->Arg(3)->Arg(5)->Arg(7);

void bm_compute_gop(benchmark::State& state) {
  finmart::Market m = crr_market(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(finmart::compute_gop(m));
}
BENCHMARK(bm_compute_gop)->Arg(3)->Arg(5)->Arg(7);

void bm_parse_scenario(benchmark::State& state) {
  std::string text =
      finmart::emit_scenario(finmart::make_crr_scenario(static_cast<int>(state.range(0)),
                                                        finmart::Rat(2), finmart::rat(1, 2),
                                                        finmart::Rat(0), finmart::rat(1, 2)));
  for (auto _ : state) benchmark::DoNotOptimize(finmart::parse_scenario(text));
}
BENCHMARK(bm_parse_scenario)->Arg(5)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
