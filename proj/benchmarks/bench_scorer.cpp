#include <benchmark/benchmark.h>

#include <string>

#include "toolgt/scorer.hpp"

static void BM_Aggregate(benchmark::State& state) {
    const int categories = 13;
    const auto n = static_cast<std::size_t>(state.range(0));
    toolgt::SuiteConfig config;
    std::vector<toolgt::CaseResult> results;
    for (int c = 0; c < categories; ++c) {
        const std::string name = "cat" + std::to_string(c);
        config.counts.emplace_back(name, n);
        for (std::size_t i = 0; i < n; ++i) results.push_back({name + "-" + std::to_string(i), name, i % 3 != 0});
    }
    config.groups = {{"even", {"cat0", "cat2", "cat4"}}, {"odd", {"cat1", "cat3"}}};
    for (auto _ : state) benchmark::DoNotOptimize(toolgt::aggregate(results, config));
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * results.size()));
}
BENCHMARK(BM_Aggregate)->Arg(100)->Arg(1000);

static void BM_ScoreCase(benchmark::State& state) {
    toolgt::EvalCase c;
    c.tools = toolgt::load_tools(R"([{"name": "get_weather", "parameters": {"properties": {"city": {"type": "string"},
        "unit": {"type": "string", "default": "celsius"}}, "required": ["city"]}}])");
    c.gold = toolgt::parse_call_list(R"([get_weather(city="Paris")])");
    c.output = R"(<THINKING>Paris weather.</THINKING><FUNCTION>[get_weather(unit="celsius", city="Paris")]</FUNCTION>)";
    for (auto _ : state) benchmark::DoNotOptimize(toolgt::score_case(c));
}
BENCHMARK(BM_ScoreCase);
