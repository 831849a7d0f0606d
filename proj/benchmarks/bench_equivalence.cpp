#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>
#include <string>

#include "toolgt/equivalence.hpp"

namespace {

const char* kTools = R"([{"name": "quote", "parameters": {"properties": {"symbol": {"type": "string"},
    "exchange": {"type": "string", "default": "NYSE"}, "limit": {"type": "integer", "default": 10}},
    "required": ["symbol"]}}])";

// n calls in order, and the same calls reversed with argument order swapped.
std::pair<toolgt::CallList, toolgt::CallList> pair_of(int n) {
    std::string a = "[", b = "[";
    for (int i = 0; i < n; ++i) {
        const std::string sym = "\"S" + std::to_string(i) + "\"";
        a += (i ? ", " : "") + std::string("quote(symbol=") + sym + ", limit=10)";
    }
    for (int i = n - 1; i >= 0; --i) {
        const std::string sym = "\"S" + std::to_string(i) + "\"";
        b += (i != n - 1 ? ", " : "") + std::string("quote(exchange=\"NYSE\", symbol=") + sym + ")";
    }
    return {toolgt::parse_call_list(a + "]"), toolgt::parse_call_list(b + "]")};
}

}  // namespace

static void BM_AstEquivalent(benchmark::State& state) {
    const auto tools = toolgt::load_tools(kTools);
    const auto [gt, cand] = pair_of(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(toolgt::ast_equivalent(gt, cand, tools).matched());
}
BENCHMARK(BM_AstEquivalent)->Arg(1)->Arg(6)->Arg(32);

static void BM_VerifyExact(benchmark::State& state) {
    const auto tools = toolgt::load_tools(kTools);
    const std::string text = R"([quote(symbol="AAPL", exchange="NASDAQ")])";
    for (auto _ : state) benchmark::DoNotOptimize(toolgt::verify(text, text, tools));
}
BENCHMARK(BM_VerifyExact);

static void BM_LoadTools(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(toolgt::load_tools(kTools));
}
BENCHMARK(BM_LoadTools);
