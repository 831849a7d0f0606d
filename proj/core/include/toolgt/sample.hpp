#pragma once

#include <string>

#include "toolgt/call_grammar.hpp"
#include "toolgt/tool_registry.hpp"

namespace toolgt {

/// One single-turn function-calling instance.
struct Sample {
    std::string id;
    std::string query;
    ToolSet tools;
    CallList ground_truth;
    /// Ground truth as it appeared in the source conversation.
    std::string raw_ground_truth;
};

/// Structured reasoning produced under a template.
struct ReasoningChain {
    std::string text;
    std::string template_id;
    std::string model_id;
};

}  // namespace toolgt
