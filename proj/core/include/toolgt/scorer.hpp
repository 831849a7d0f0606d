#pragma once

// Benchmark scoring: per-case correctness by AST matching, and suite-level
// aggregation into per-category, weighted, grouped and unweighted averages.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "toolgt/equivalence.hpp"

namespace toolgt {

enum class CaseKind { Call, RelevanceExpectCall, RelevanceExpectNoCall };

std::string_view to_string(CaseKind kind);
std::optional<CaseKind> case_kind_from_string(std::string_view text);

struct EvalCase {
    std::string id;
    std::string category;
    CaseKind kind = CaseKind::Call;
    ToolSet tools;
    std::optional<CallList> gold;
    /// Absent when no transcript exists for the case; scores incorrect.
    std::optional<std::string> output;
};

/// Cases JSONL: {"id", "category", "kind"?, "tools"?, "gold"?, "output"?}.
/// Throws FormatError naming the line.
std::vector<EvalCase> load_cases(std::istream& jsonl);

/// Transcripts JSONL: {"id", "output"}; fills `output` by case id.
/// Returns the number of cases matched.
std::size_t attach_transcripts(std::vector<EvalCase>& cases, std::istream& jsonl);

struct SuiteConfig {
    std::string suite_id = "custom";
    /// Category -> case count, in declaration order.
    std::vector<std::pair<std::string, std::size_t>> counts;
    std::vector<std::pair<std::string, std::vector<std::string>>> groups;

    std::optional<std::size_t> count_of(std::string_view category) const;
};

/// {"suite": id, "counts": {cat: n}, "groups": {name: [cats]}}. Keys
/// starting with '_' are ignored. Throws ConfigError.
SuiteConfig suite_config_from_json(const nlohmann::ordered_json& json);
SuiteConfig load_suite_config(const std::filesystem::path& path);

/// Call kinds: the FUNCTION section (or the whole output when untagged)
/// must parse and AST-match the gold. Relevance kinds check only whether a
/// non-empty call list can be parsed.
bool score_case(const EvalCase& eval_case, const MatchPolicy& policy = {});

struct CaseResult {
    std::string id;
    std::string category;
    bool correct = false;
};

struct CategoryScore {
    std::string category;
    std::size_t count = 0;
    /// Absent when the score came from a supplied accuracy.
    std::optional<std::size_t> correct;
    double accuracy = 0.0;
};

struct GroupScore {
    std::string name;
    /// Absent when none of the group's categories was scored.
    std::optional<double> average;
};

struct SuiteReport {
    std::string suite_id;
    /// Scored categories in config order.
    std::vector<CategoryScore> categories;
    std::vector<GroupScore> groups;
    std::optional<double> weighted;
    std::optional<double> grouped_overall;
    std::optional<double> unweighted;
};

/// Scored categories are those present in `results`; each is divided by its
/// configured count, so missing cases count as incorrect. Throws ConfigError
/// for categories missing from the config or with more results than count.
SuiteReport aggregate(const std::vector<CaseResult>& results, const SuiteConfig& config);

/// Same averages from per-category accuracies in percent.
SuiteReport aggregate_accuracies(const std::vector<std::pair<std::string, double>>& accuracies,
                                 const SuiteConfig& config);

std::vector<CaseResult> filter_subset(const std::vector<CaseResult>& results,
                                      const std::function<bool(std::string_view)>& keep_category);

nlohmann::ordered_json to_json(const SuiteReport& report);
std::string format_table(const SuiteReport& report);

}  // namespace toolgt
