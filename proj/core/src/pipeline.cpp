#include "toolgt/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>
#include <unordered_map>

namespace toolgt {

namespace {

using ojson = nlohmann::ordered_json;

enum class TurnRole { System, User, Assistant, Tool };

struct Turn {
    TurnRole role;
    std::string text;
};

std::optional<TurnRole> turn_role(std::string_view name) {
    if (name == "user" || name == "human") return TurnRole::User;
    if (name == "assistant" || name == "gpt") return TurnRole::Assistant;
    if (name == "tool" || name == "function" || name == "observation") return TurnRole::Tool;
    if (name == "system") return TurnRole::System;
    return std::nullopt;
}

std::string turn_text(const ojson& value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_null()) return {};
    return value.dump();
}

std::vector<Turn> read_turns(const ojson& record) {
    const ojson* turns = nullptr;
    if (record.contains("conversations")) {
        turns = &record["conversations"];
    } else if (record.contains("messages")) {
        turns = &record["messages"];
    }
    if (!turns || !turns->is_array()) throw FormatError("record has no conversations array");

    std::vector<Turn> out;
    for (const auto& t : *turns) {
        if (!t.is_object()) throw FormatError("conversation turn is not an object");
        const ojson* role = t.contains("from") ? &t["from"] : (t.contains("role") ? &t["role"] : nullptr);
        const ojson* text = t.contains("value") ? &t["value"] : (t.contains("content") ? &t["content"] : nullptr);
        if (!role || !role->is_string() || !text) throw FormatError("conversation turn lacks role or text");
        const auto r = turn_role(role->get<std::string>());
        if (!r) throw FormatError("unknown turn role '" + role->get<std::string>() + "'");
        out.push_back({*r, turn_text(*text)});
    }
    return out;
}

ToolSet read_tools(const ojson& record) {
    if (!record.contains("tools")) throw FormatError("record has no tools");
    const ojson& tools = record["tools"];
    ToolSet set = tools.is_string() ? load_tools(tools.get<std::string>()) : tools_from_json(tools);
    if (set.empty()) throw FormatError("record has an empty tool list");
    return set;
}

std::string pad(std::size_t n, int width) {
    std::string s = std::to_string(n);
    if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
    return s;
}

constexpr std::string_view kPlaceholders[] = {
    "{FUNCTIONS HERE}",     "{GUIDED-TEMPLATE HERE}",  "{user request}",
    "{GROUND TRUTH}",       "{ROUND 1 THINKING}",      "{MODEL FUNCTION CALL FROM ROUND 2}",
};

std::string complete_or_fail(CompletionBackend& backend, CompletionRequest request, std::string_view stage) {
    try {
        return backend.complete(request);
    } catch (const CassetteMiss&) {
        throw;
    } catch (const NetworkError& e) {
        throw StageFailure(std::string(stage) + ": gateway error: " + e.what());
    }
}

std::optional<std::string> opt_string(const ojson& json, const char* key) {
    if (!json.contains(key) || json[key].is_null()) return std::nullopt;
    return json[key].get<std::string>();
}

}  // namespace

std::optional<ContextMode> context_mode_from_string(std::string_view text) {
    if (text == "preceding-user") return ContextMode::PrecedingUser;
    if (text == "all-prior-user") return ContextMode::AllPriorUser;
    return std::nullopt;
}

void explode_record(const ojson& record, const std::string& conversation_id, ContextMode context,
                    ExplodeResult& out) {
    if (!record.is_object()) throw FormatError("record is not a JSON object");
    const auto turns = read_turns(record);
    const ToolSet tools = read_tools(record);

    for (std::size_t i = 0; i < turns.size(); ++i) {
        const Turn& turn = turns[i];
        const auto text = trim(turn.text);
        if (turn.role != TurnRole::Assistant || !text.starts_with('[')) continue;
        ++out.stats.call_turns;
        const std::string id = conversation_id + "#" + pad(i, 3);

        if (i == 0 || turns[i - 1].role != TurnRole::User || trim(turns[i - 1].text).empty()) {
            ++out.stats.skipped_no_user;
            out.log.push_back(id + ": no user message directly before the call");
            continue;
        }
        CallList calls;
        try {
            calls = parse_call_list(text);
        } catch (const SyntaxError& e) {
            ++out.stats.skipped_unparseable;
            out.log.push_back(id + ": ground truth does not parse: " + e.what());
            continue;
        }
        if (calls.empty()) {
            ++out.stats.skipped_unparseable;
            out.log.push_back(id + ": ground truth is an empty call list");
            continue;
        }

        Sample sample;
        sample.id = id;
        sample.tools = tools;
        sample.ground_truth = std::move(calls);
        sample.raw_ground_truth = std::string(text);
        if (context == ContextMode::PrecedingUser) {
            sample.query = turns[i - 1].text;
        } else {
            for (std::size_t j = 0; j < i; ++j) {
                if (turns[j].role != TurnRole::User) continue;
                if (!sample.query.empty()) sample.query += "\n\n";
                sample.query += turns[j].text;
            }
        }
        out.samples.push_back(std::move(sample));
        ++out.stats.samples;
    }
}

ExplodeResult explode_conversations(std::istream& jsonl, ContextMode context) {
    ExplodeResult out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(jsonl, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ++out.stats.input_conversations;
        std::string conv_id = pad(line_no, 6);
        try {
            const auto record = ojson::parse(line);
            if (record.is_object() && record.contains("id")) {
                const auto& id = record["id"];
                conv_id = id.is_string() ? id.get<std::string>() : id.dump();
            }
            explode_record(record, conv_id, context, out);
        } catch (const ojson::exception& e) {
            ++out.stats.malformed_records;
            out.log.push_back("line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
        } catch (const FormatError& e) {
            ++out.stats.malformed_records;
            out.log.push_back("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

ReasoningChain run_stage1(const Sample& sample, const Template& tmpl, CompletionBackend& backend,
                          const StageSettings& settings) {
    CompletionRequest request{build_stage1(sample, tmpl), settings.stage1_model, settings.temperature,
                              settings.max_tokens};
    const std::string response = complete_or_fail(backend, std::move(request), "stage1");
    const auto section = extract_tagged(response, "THINKING");
    if (!section) throw StageFailure("stage1: missing THINKING");
    if (section->truncated) throw StageFailure("stage1: unterminated THINKING");
    if (section->content.empty()) throw StageFailure("stage1: empty THINKING");
    for (auto placeholder : kPlaceholders) {
        if (section->content.find(placeholder) != std::string::npos) {
            throw StageFailure("stage1: reasoning contains placeholder " + std::string(placeholder));
        }
    }
    return ReasoningChain{section->content, tmpl.id, settings.stage1_model};
}

Candidate run_stage2(const Sample& sample, const ReasoningChain& reasoning, CompletionBackend& backend,
                     const StageSettings& settings) {
    CompletionRequest request{build_stage2(sample, reasoning.text), settings.stage2_model, settings.temperature,
                              settings.max_tokens};
    const std::string response = complete_or_fail(backend, std::move(request), "stage2");
    const auto section = extract_tagged(response, "FUNCTION");
    if (!section) throw StageFailure("stage2: missing FUNCTION");
    if (section->truncated) throw StageFailure("stage2: unterminated FUNCTION");
    Candidate candidate;
    candidate.raw = section->content;
    try {
        candidate.calls = parse_call_list(candidate.raw);
    } catch (const SyntaxError& e) {
        throw StageFailure(std::string("stage2: unparseable call list: ") + e.what());
    }
    return candidate;
}

StageOutcome run_stage3(const Sample& sample, const Candidate& candidate, CompletionBackend& backend,
                        const StageSettings& settings, const MatchPolicy& policy) {
    StageOutcome outcome;
    outcome.sample_id = sample.id;
    outcome.candidate_raw = candidate.raw;
    outcome.em_pass = exact_match(sample.raw_ground_truth, candidate.raw);
    if (!outcome.em_pass) {
        outcome.ast_pass = ast_equivalent(sample.ground_truth, candidate.calls, sample.tools, policy).matched();
    }
    if (outcome.em_pass || outcome.ast_pass) {
        outcome.kept = true;
        return outcome;
    }

    const std::string shown = trim(candidate.raw).empty() ? render_call_list(candidate.calls) : candidate.raw;
    CompletionRequest request{build_stage3(sample, shown), settings.judge_model, settings.temperature,
                              settings.max_tokens};
    try {
        outcome.judge = parse_judge_label(backend.complete(request));
    } catch (const CassetteMiss&) {
        throw;
    } catch (const NetworkError&) {
        outcome.failure_reason = "judge unavailable";
        return outcome;
    }
    switch (outcome.judge->label) {
        case JudgeLabel::CanReplace:
            outcome.kept = true;
            break;
        case JudgeLabel::TotallyIncorrect:
            outcome.failure_reason = "judge: TOTALLY INCORRECT";
            break;
        case JudgeLabel::Unparseable:
            outcome.failure_reason = "judge: unparseable verdict";
            break;
    }
    return outcome;
}

ojson to_json(const StageOutcome& outcome) {
    ojson j;
    j["sample_id"] = outcome.sample_id;
    j["candidate"] = outcome.candidate_raw ? ojson(*outcome.candidate_raw) : ojson(nullptr);
    j["em_pass"] = outcome.em_pass;
    j["ast_pass"] = outcome.ast_pass;
    j["judge"] = outcome.judge ? ojson{{"label", to_string(outcome.judge->label)}, {"raw", outcome.judge->raw}}
                               : ojson(nullptr);
    j["kept"] = outcome.kept;
    j["failure_reason"] = outcome.failure_reason ? ojson(*outcome.failure_reason) : ojson(nullptr);
    return j;
}

StageOutcome stage_outcome_from_json(const ojson& json) {
    StageOutcome outcome;
    outcome.sample_id = json.at("sample_id").get<std::string>();
    outcome.candidate_raw = opt_string(json, "candidate");
    outcome.em_pass = json.at("em_pass").get<bool>();
    outcome.ast_pass = json.at("ast_pass").get<bool>();
    if (json.contains("judge") && !json["judge"].is_null()) {
        const auto& jv = json["judge"];
        JudgeVerdict verdict;
        verdict.raw = jv.at("raw").get<std::string>();
        const auto label = jv.at("label").get<std::string>();
        if (label == "CanReplace") {
            verdict.label = JudgeLabel::CanReplace;
        } else if (label == "TotallyIncorrect") {
            verdict.label = JudgeLabel::TotallyIncorrect;
        } else {
            verdict.label = JudgeLabel::Unparseable;
        }
        outcome.judge = std::move(verdict);
    }
    outcome.kept = json.at("kept").get<bool>();
    outcome.failure_reason = opt_string(json, "failure_reason");
    return outcome;
}

std::string_view to_string(FailureStage stage) {
    switch (stage) {
        case FailureStage::None: return "none";
        case FailureStage::Stage1: return "stage1";
        case FailureStage::Stage2: return "stage2";
        case FailureStage::Filter: return "filter";
    }
    return "none";
}

ojson to_json(const SampleResult& result) {
    ojson j;
    j["sample_id"] = result.sample_id;
    j["template_id"] = result.template_id;
    j["mode"] = to_string(result.mode);
    j["failed_at"] = to_string(result.failed_at);
    j["outcome"] = to_json(result.outcome);
    j["record"] = result.record ? ojson(*result.record) : ojson(nullptr);
    return j;
}

SampleResult sample_result_from_json(const ojson& json) {
    try {
        SampleResult result;
        result.sample_id = json.at("sample_id").get<std::string>();
        result.template_id = json.at("template_id").get<std::string>();
        const auto mode = record_mode_from_string(json.at("mode").get<std::string>());
        if (!mode) throw FormatError("manifest: unknown mode");
        result.mode = *mode;
        const auto stage = json.at("failed_at").get<std::string>();
        if (stage == "none") {
            result.failed_at = FailureStage::None;
        } else if (stage == "stage1") {
            result.failed_at = FailureStage::Stage1;
        } else if (stage == "stage2") {
            result.failed_at = FailureStage::Stage2;
        } else if (stage == "filter") {
            result.failed_at = FailureStage::Filter;
        } else {
            throw FormatError("manifest: unknown failure stage '" + stage + "'");
        }
        result.outcome = stage_outcome_from_json(json.at("outcome"));
        result.record = opt_string(json, "record");
        return result;
    } catch (const ojson::exception& e) {
        throw FormatError(std::string("manifest: ") + e.what());
    }
}

void DatasetStats::add(const SampleResult& result) {
    auto& per = per_template[result.template_id];
    ++per.first;
    const auto& o = result.outcome;
    switch (result.failed_at) {
        case FailureStage::Stage1:
            ++stage1_failures;
            return;
        case FailureStage::Stage2:
            ++stage1_success;
            ++stage2_failures;
            return;
        case FailureStage::None:
        case FailureStage::Filter:
            break;
    }
    ++stage1_success;
    ++stage2_parse_success;
    if (o.em_pass) ++em_passes;
    if (o.ast_pass) ++ast_passes;
    if (o.judge) {
        ++judge_consulted;
        switch (o.judge->label) {
            case JudgeLabel::CanReplace: ++judge_passes; break;
            case JudgeLabel::TotallyIncorrect: ++judge_rejections; break;
            case JudgeLabel::Unparseable: ++judge_unparseable; break;
        }
    } else if (!o.kept) {
        ++judge_unavailable;
    }
    if (o.kept) {
        ++kept;
        ++per.second;
    }
}

ojson to_json(const DatasetStats& s) {
    ojson per = ojson::object();
    for (const auto& [id, counts] : s.per_template) per[id] = {{"samples", counts.first}, {"kept", counts.second}};
    return {
        {"input_conversations", s.corpus.input_conversations},
        {"malformed_records", s.corpus.malformed_records},
        {"call_turns", s.corpus.call_turns},
        {"skipped_no_user", s.corpus.skipped_no_user},
        {"skipped_unparseable", s.corpus.skipped_unparseable},
        {"single_turn_samples", s.corpus.samples},
        {"resumed", s.resumed},
        {"stage1_success", s.stage1_success},
        {"stage1_failures", s.stage1_failures},
        {"stage2_parse_success", s.stage2_parse_success},
        {"stage2_failures", s.stage2_failures},
        {"em_passes", s.em_passes},
        {"ast_passes", s.ast_passes},
        {"judge_consulted", s.judge_consulted},
        {"judge_passes", s.judge_passes},
        {"judge_rejections", s.judge_rejections},
        {"judge_unparseable", s.judge_unparseable},
        {"judge_unavailable", s.judge_unavailable},
        {"kept", s.kept},
        {"per_template", std::move(per)},
    };
}

std::filesystem::path default_stats_path(const std::filesystem::path& output) {
    auto p = output;
    p += ".stats.json";
    return p;
}

std::filesystem::path default_manifest_path(const std::filesystem::path& output) {
    auto p = output;
    p += ".manifest.jsonl";
    return p;
}

SampleResult process_sample(const Sample& sample, const PipelineConfig& config, CompletionBackend& backend) {
    SampleResult result;
    result.sample_id = sample.id;
    result.template_id = config.tmpl.id;
    result.mode = config.mode;
    result.outcome.sample_id = sample.id;

    ReasoningChain reasoning;
    try {
        reasoning = run_stage1(sample, config.tmpl, backend, config.stages);
    } catch (const StageFailure& e) {
        result.failed_at = FailureStage::Stage1;
        result.outcome.failure_reason = e.what();
        return result;
    } catch (const MissingField& e) {
        result.failed_at = FailureStage::Stage1;
        result.outcome.failure_reason = std::string("stage1: ") + e.what();
        return result;
    }

    Candidate candidate;
    try {
        candidate = run_stage2(sample, reasoning, backend, config.stages);
    } catch (const StageFailure& e) {
        result.failed_at = FailureStage::Stage2;
        result.outcome.failure_reason = e.what();
        return result;
    }

    result.outcome = run_stage3(sample, candidate, backend, config.stages, config.policy);
    if (!result.outcome.kept) {
        result.failed_at = FailureStage::Filter;
        return result;
    }
    result.record = to_json(render_training_record(sample, &reasoning, config.mode)).dump();
    return result;
}

DatasetStats run_pipeline(const ExplodeResult& corpus, CompletionBackend& backend, const PipelineConfig& config) {
    if (config.workers < 1) throw ConfigError("worker count must be >= 1");
    if (config.output.empty()) throw ConfigError("no output path");
    const auto stats_path = config.stats_path.empty() ? default_stats_path(config.output) : config.stats_path;
    const auto manifest_path =
        config.manifest_path.empty() ? default_manifest_path(config.output) : config.manifest_path;
    auto log = [&](std::string_view msg) {
        if (config.log) config.log(msg);
    };

    // Probe the output up front so an unwritable path fails before any query.
    {
        std::ofstream probe(config.output, std::ios::binary | std::ios::app);
        if (!probe) throw Error("cannot write output " + config.output.string());
    }

    std::unordered_map<std::string, SampleResult> done;
    if (config.resume) {
        std::ifstream in(manifest_path);
        std::string line;
        while (in && std::getline(in, line)) {
            if (trim(line).empty()) continue;
            try {
                auto r = sample_result_from_json(ojson::parse(line));
                if (r.template_id == config.tmpl.id && r.mode == config.mode) {
                    auto id = r.sample_id;
                    done.insert_or_assign(std::move(id), std::move(r));
                }
            } catch (const std::exception& e) {
                log(std::string("ignoring manifest line: ") + e.what());
            }
        }
    }

    std::ofstream manifest(manifest_path, std::ios::binary | (config.resume ? std::ios::app : std::ios::trunc));
    if (!manifest) throw Error("cannot write manifest " + manifest_path.string());

    std::vector<std::optional<SampleResult>> results(corpus.samples.size());
    std::vector<std::size_t> pending;
    DatasetStats stats;
    stats.corpus = corpus.stats;
    for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
        auto it = done.find(corpus.samples[i].id);
        if (it != done.end()) {
            results[i] = it->second;
            ++stats.resumed;
        } else {
            pending.push_back(i);
        }
    }

    std::mutex manifest_mu;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr fatal;
    std::mutex fatal_mu;

    auto worker = [&] {
        while (!stop.load()) {
            const std::size_t k = next.fetch_add(1);
            if (k >= pending.size()) return;
            const std::size_t i = pending[k];
            try {
                SampleResult r = process_sample(corpus.samples[i], config, backend);
                {
                    std::lock_guard lock(manifest_mu);
                    manifest << to_json(r).dump() << '\n';
                    manifest.flush();
                }
                results[i] = std::move(r);
            } catch (...) {
                std::lock_guard lock(fatal_mu);
                if (!fatal) fatal = std::current_exception();
                stop = true;
            }
        }
    };

    const std::size_t n_threads = std::min(config.workers, std::max<std::size_t>(pending.size(), 1));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    manifest.close();
    if (fatal) std::rethrow_exception(fatal);

    std::vector<const SampleResult*> ordered;
    ordered.reserve(results.size());
    for (const auto& r : results) ordered.push_back(&*r);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const SampleResult* a, const SampleResult* b) { return a->sample_id < b->sample_id; });

    auto tmp = config.output;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write output " + tmp.string());
        for (const auto* r : ordered) {
            stats.add(*r);
            if (r->record) out << *r->record << '\n';
        }
        if (!out.flush()) throw Error("cannot write output " + tmp.string());
    }
    std::filesystem::rename(tmp, config.output);

    std::ofstream stats_out(stats_path, std::ios::binary | std::ios::trunc);
    if (!stats_out) throw Error("cannot write stats " + stats_path.string());
    stats_out << to_json(stats).dump(2) << '\n';
    return stats;
}

}  // namespace toolgt
