#pragma once

// Verification of a candidate call list against ground truth: exact string
// match first, then structural (AST) comparison that tolerates argument
// reordering, call reordering, and optional arguments left at their defaults.

#include <string>
#include <string_view>
#include <vector>

#include "toolgt/call_grammar.hpp"
#include "toolgt/tool_registry.hpp"

namespace toolgt {

struct MatchPolicy {
    /// Absolute tolerance for non-integer numeric comparison. Must be >= 0.
    double numeric_tolerance = 1e-9;
    bool case_insensitive_strings = false;
    /// Accept any schema-optional argument present on one side only, not
    /// just ones equal to the declared default.
    bool permissive_optional_extras = false;
};

/// Throws ConfigError when the policy is out of range.
void validate(const MatchPolicy& policy);

enum class MatchOutcome { ExactMatch, AstMatch, NoMatch };

std::string_view to_string(MatchOutcome outcome);

struct MatchVerdict {
    MatchOutcome outcome = MatchOutcome::NoMatch;
    /// Mismatch reasons; non-empty iff outcome is NoMatch.
    std::vector<std::string> explanation;

    bool matched() const { return outcome != MatchOutcome::NoMatch; }
};

/// Byte equality after trimming surrounding whitespace.
bool exact_match(std::string_view ground_truth, std::string_view candidate);

/// Numbers within tolerance (integers compared exactly), strings by bytes,
/// lists in order, mappings by key set. Nested calls must match exactly
/// since no schema is available to judge extra arguments.
bool value_equal(const Value& a, const Value& b, const MatchPolicy& policy = {});

/// Pairwise call equivalence under a tool schema. Appends mismatch reasons
/// when `reasons` is given.
bool calls_equivalent(const FunctionCall& a, const FunctionCall& b, const ToolSet& tools,
                      const MatchPolicy& policy, std::vector<std::string>* reasons = nullptr);

/// Order-insensitive comparison: a perfect matching between the two call
/// lists over pairwise call equivalence. Every call, including nested ones,
/// must name a tool in `tools`.
MatchVerdict ast_equivalent(const CallList& ground_truth, const CallList& candidate, const ToolSet& tools,
                            const MatchPolicy& policy = {});

/// Exact match on the raw texts, falling back to parsing both sides and
/// ast_equivalent. Parse failures yield NoMatch with the syntax error.
MatchVerdict verify(std::string_view ground_truth, std::string_view candidate, const ToolSet& tools,
                    const MatchPolicy& policy = {});

}  // namespace toolgt
