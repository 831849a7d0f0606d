#pragma once

// Dataset construction: multi-turn corpus -> single-turn samples -> reasoning
// (stage 1) -> reasoning-conditioned calls (stage 2) -> EM / AST / judge
// filtering (stage 3) -> training records.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "toolgt/equivalence.hpp"
#include "toolgt/gateway.hpp"
#include "toolgt/sample.hpp"
#include "toolgt/templates.hpp"

namespace toolgt {

enum class ContextMode { PrecedingUser, AllPriorUser };

/// "preceding-user" or "all-prior-user".
std::optional<ContextMode> context_mode_from_string(std::string_view text);

struct ExplodeStats {
    std::size_t input_conversations = 0;
    std::size_t malformed_records = 0;
    std::size_t call_turns = 0;
    std::size_t skipped_no_user = 0;
    std::size_t skipped_unparseable = 0;
    std::size_t samples = 0;
};

struct ExplodeResult {
    std::vector<Sample> samples;
    ExplodeStats stats;
    /// One message per skipped record or turn.
    std::vector<std::string> log;
};

/// One sample per call-bearing assistant turn (text starting with '[')
/// that directly follows a user turn. Malformed lines are skipped and
/// logged. Sample ids are `<conversation id>#<turn index>`.
ExplodeResult explode_conversations(std::istream& jsonl, ContextMode context = ContextMode::PrecedingUser);

/// Explodes one parsed record, appending to `out`. Throws FormatError.
void explode_record(const nlohmann::ordered_json& record, const std::string& conversation_id, ContextMode context,
                    ExplodeResult& out);

struct StageSettings {
    std::string stage1_model = "gpt-4o-mini";
    std::string stage2_model = "gpt-4o-mini";
    std::string judge_model = "gpt-4o-mini";
    double temperature = 0.0;
    int max_tokens = 2048;
};

/// Per-sample failure in stage 1 or 2; the sample is dropped and counted.
class StageFailure : public Error {
public:
    using Error::Error;
};

/// Throws StageFailure ("missing THINKING", gateway errors). CassetteMiss
/// propagates unchanged.
ReasoningChain run_stage1(const Sample& sample, const Template& tmpl, CompletionBackend& backend,
                          const StageSettings& settings);

struct Candidate {
    std::string raw;
    CallList calls;
};

/// Throws StageFailure on a missing FUNCTION section or unparseable calls.
Candidate run_stage2(const Sample& sample, const ReasoningChain& reasoning, CompletionBackend& backend,
                     const StageSettings& settings);

struct StageOutcome {
    std::string sample_id;
    std::optional<std::string> candidate_raw;
    bool em_pass = false;
    bool ast_pass = false;
    std::optional<JudgeVerdict> judge;
    bool kept = false;
    std::optional<std::string> failure_reason;
};

/// EM on raw texts, then AST, then the judge only if both fail.
StageOutcome run_stage3(const Sample& sample, const Candidate& candidate, CompletionBackend& backend,
                        const StageSettings& settings, const MatchPolicy& policy = {});

nlohmann::ordered_json to_json(const StageOutcome& outcome);
StageOutcome stage_outcome_from_json(const nlohmann::ordered_json& json);

enum class FailureStage { None, Stage1, Stage2, Filter };

std::string_view to_string(FailureStage stage);

/// Everything recorded about one processed sample; also a manifest line.
struct SampleResult {
    std::string sample_id;
    std::string template_id;
    RecordMode mode = RecordMode::WithThought;
    FailureStage failed_at = FailureStage::None;
    StageOutcome outcome;
    /// Serialized training record when kept.
    std::optional<std::string> record;
};

nlohmann::ordered_json to_json(const SampleResult& result);
SampleResult sample_result_from_json(const nlohmann::ordered_json& json);

struct DatasetStats {
    ExplodeStats corpus;
    std::size_t resumed = 0;
    std::size_t stage1_success = 0;
    std::size_t stage1_failures = 0;
    std::size_t stage2_parse_success = 0;
    std::size_t stage2_failures = 0;
    std::size_t em_passes = 0;
    std::size_t ast_passes = 0;
    std::size_t judge_consulted = 0;
    std::size_t judge_passes = 0;
    std::size_t judge_rejections = 0;
    std::size_t judge_unparseable = 0;
    std::size_t judge_unavailable = 0;
    std::size_t kept = 0;
    /// template id -> {"samples", "kept"}
    std::map<std::string, std::pair<std::size_t, std::size_t>> per_template;

    std::size_t filter_failures() const {
        return judge_rejections + judge_unparseable + judge_unavailable;
    }
    void add(const SampleResult& result);
};

nlohmann::ordered_json to_json(const DatasetStats& stats);

struct PipelineConfig {
    Template tmpl;
    RecordMode mode = RecordMode::WithThought;
    StageSettings stages;
    MatchPolicy policy;
    std::size_t workers = 8;
    std::filesystem::path output;
    /// Defaults to `<output>.stats.json` / `<output>.manifest.jsonl`.
    std::filesystem::path stats_path;
    std::filesystem::path manifest_path;
    bool resume = true;
    std::function<void(std::string_view)> log;
};

std::filesystem::path default_stats_path(const std::filesystem::path& output);
std::filesystem::path default_manifest_path(const std::filesystem::path& output);

/// Processes one sample through all three stages. CassetteMiss propagates.
SampleResult process_sample(const Sample& sample, const PipelineConfig& config, CompletionBackend& backend);

/// Runs every sample on a bounded worker pool and writes the sorted dataset,
/// the stats document and the manifest. Samples already in the manifest
/// (same template and mode) are not re-queried. Throws Error on unwritable output and
/// CassetteMiss under replay.
DatasetStats run_pipeline(const ExplodeResult& corpus, CompletionBackend& backend, const PipelineConfig& config);

}  // namespace toolgt
