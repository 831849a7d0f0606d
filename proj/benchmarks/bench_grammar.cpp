#include <benchmark/benchmark.h>

#include <string>

#include "toolgt/call_grammar.hpp"

namespace {

std::string parallel_calls(int n) {
    std::string text = "[";
    for (int i = 0; i < n; ++i) {
        if (i) text += ", ";
        text += "Market Trends API(trend_type=\"MARKET_INDEXES\", country=\"us\", limit=" + std::to_string(i) +
                ", tags=[\"a\", \"b\"], opts={\"lang\": \"en\", \"depth\": 2.5})";
    }
    return text + "]";
}

std::string nested_call(int depth) {
    std::string text = "leaf(x=1)";
    for (int i = 1; i < depth; ++i) text = "f" + std::to_string(i) + "(inner=" + text + ")";
    return "[" + text + "]";
}

}  // namespace

static void BM_Parse(benchmark::State& state) {
    const std::string text = parallel_calls(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(toolgt::parse_call_list(text));
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_Parse)->Arg(1)->Arg(8)->Arg(64);

static void BM_ParseNested(benchmark::State& state) {
    const std::string text = nested_call(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(toolgt::parse_call_list(text));
}
BENCHMARK(BM_ParseNested)->Arg(5)->Arg(50)->Arg(200);

static void BM_Render(benchmark::State& state) {
    const auto calls = toolgt::parse_call_list(parallel_calls(static_cast<int>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(toolgt::render_call_list(calls));
}
BENCHMARK(BM_Render)->Arg(1)->Arg(8)->Arg(64);

static void BM_ExtractTagged(benchmark::State& state) {
    const std::string text = "<THINKING>" + std::string(4000, 'r') + "</THINKING>\n<FUNCTION>" + parallel_calls(2) +
                             "</FUNCTION>";
    for (auto _ : state) benchmark::DoNotOptimize(toolgt::extract_tagged(text, "FUNCTION"));
}
BENCHMARK(BM_ExtractTagged);
