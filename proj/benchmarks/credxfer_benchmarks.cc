// Copyright 2026 The credxfer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// Microbenchmarks for the per-transfer hot paths.

#include <benchmark/benchmark.h>

#include <string>

#include "credxfer/bench.h"
#include "credxfer/checksum.h"
#include "credxfer/throttle.h"
#include "credxfer/token.h"
#include "credxfer/transfer.h"
#include "credxfer/url.h"

namespace credxfer {
namespace {

AccessToken SampleToken() {
  return AccessToken{std::string(1200, 'E'), FromUnixSeconds(1'700'000'000),
                     {"Files.ReadWrite.All", "Files.Read"}, "Bearer"};
}

void BM_SerializeUseToken(benchmark::State& state) {
  auto const token = SampleToken();
  for (auto _ : state) benchmark::DoNotOptimize(SerializeUseToken(token));
}
BENCHMARK(BM_SerializeUseToken);

void BM_ParseUseToken(benchmark::State& state) {
  auto const bytes = SerializeUseToken(SampleToken());
  for (auto _ : state) benchmark::DoNotOptimize(ParseUseToken(bytes));
}
BENCHMARK(BM_ParseUseToken);

void BM_BuildContentRequest(benchmark::State& state) {
  auto const token = SampleToken();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        BuildContentRequest(token, "/data/run 42/output file.root"));
  }
}
BENCHMARK(BM_BuildContentRequest);

void BM_PercentEncodePath(benchmark::State& state) {
  std::string const path = "/data/run 42/ünïcode & spaces/file#1.root";
  for (auto _ : state) benchmark::DoNotOptimize(PercentEncodePath(path));
}
BENCHMARK(BM_PercentEncodePath);

void BM_PercentDifference(benchmark::State& state) {
  double other = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bench::PercentDifference(42.0, other));
    other += 1e-9;
  }
}
BENCHMARK(BM_PercentDifference);

void BM_Sha256(benchmark::State& state) {
  std::string const data(static_cast<std::size_t>(state.range(0)), 'x');
  for (auto _ : state) benchmark::DoNotOptimize(Sha256Hex(data));
  state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sha256)->Arg(1 << 20);

// Grants against an effectively unlimited bucket measure bookkeeping cost.
void BM_ThrottleGrant(benchmark::State& state) {
  Throttle throttle(1e15);
  for (auto _ : state) benchmark::DoNotOptimize(throttle.Grant(65536));
}
BENCHMARK(BM_ThrottleGrant);

}  // namespace
}  // namespace credxfer

// The distribution's static benchmark_main is built with a different LTO
// version, so the entry point is defined here.
BENCHMARK_MAIN();
