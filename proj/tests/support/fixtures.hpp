#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "toolgt/call_grammar.hpp"
#include "toolgt/sample.hpp"
#include "toolgt/tool_registry.hpp"

namespace fixtures {

inline std::filesystem::path test_dir() { return TOOLGT_TEST_DIR; }
inline std::filesystem::path source_dir() { return TOOLGT_SOURCE_DIR; }

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
}

// Golden files end with one newline that is not part of the expected text.
inline std::string golden(const std::string& name) {
    std::string text = read_file(test_dir() / "golden" / name);
    if (!text.empty() && text.back() == '\n') text.pop_back();
    return text;
}

inline toolgt::ToolSet market_tools() {
    return toolgt::load_tools(read_file(test_dir() / "fixtures" / "tools" / "market_trends.json"));
}

inline std::string market_reasoning() {
    std::string text = read_file(test_dir() / "fixtures" / "market_trends_reasoning.txt");
    if (!text.empty() && text.back() == '\n') text.pop_back();
    return text;
}

inline toolgt::Sample market_sample() {
    toolgt::Sample s;
    s.id = "market#001";
    s.query =
        "I'm considering investing and I'd like to know what's happening in the market right now. Could you get "
        "me the top market trends in the US?";
    s.tools = market_tools();
    s.raw_ground_truth = R"([Market Trends API(trend_type="MARKET_INDEXES", country="us")])";
    s.ground_truth = toolgt::parse_call_list(s.raw_ground_truth);
    return s;
}

// A scratch directory under the build tree, emptied on creation.
inline std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::path(TOOLGT_SCRATCH_DIR) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace fixtures
