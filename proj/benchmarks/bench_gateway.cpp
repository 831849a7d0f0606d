#include <benchmark/benchmark.h>

#include <string>

#include "toolgt/gateway.hpp"

static void BM_Fingerprint(benchmark::State& state) {
    toolgt::CompletionRequest request;
    request.model = "gpt-4o-mini";
    request.messages = {{toolgt::Role::System, std::string(static_cast<std::size_t>(state.range(0)), 's')},
                        {toolgt::Role::User, "What is the weather in Paris?"}};
    for (auto _ : state) benchmark::DoNotOptimize(toolgt::fingerprint(request));
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * state.range(0)));
}
BENCHMARK(BM_Fingerprint)->Arg(256)->Arg(4096)->Arg(65536);

static void BM_ReplayHit(benchmark::State& state) {
    auto cassette = std::make_unique<toolgt::Cassette>();
    toolgt::CompletionRequest request;
    request.model = "gpt-4o-mini";
    request.messages = {{toolgt::Role::User, "ping"}};
    cassette->put({toolgt::fingerprint(request), request.model, 0.0, 2048, request.messages, "pong"});
    toolgt::ReplayBackend replay(std::move(cassette));
    for (auto _ : state) benchmark::DoNotOptimize(replay.complete(request));
}
BENCHMARK(BM_ReplayHit);
