#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "toolgt/equivalence.hpp"
#include "toolgt/gateway.hpp"
#include "toolgt/pipeline.hpp"
#include "toolgt/scorer.hpp"
#include "toolgt/templates.hpp"
#include "toolgt/tool_registry.hpp"

namespace forge {

namespace {

using ojson = nlohmann::ordered_json;

// Raised for unreadable inputs discovered after argument parsing.
class InputError : public toolgt::Error {
public:
    using Error::Error;
};

struct PolicyFlags {
    double numeric_tolerance = 1e-9;
    bool case_insensitive = false;
    bool permissive_extras = false;

    void attach(CLI::App& app) {
        app.add_option("--numeric-tolerance", numeric_tolerance,
                       "Absolute tolerance for non-integer numbers in AST matching")
            ->capture_default_str()
            ->check(CLI::NonNegativeNumber);
        app.add_flag("--case-insensitive", case_insensitive, "Compare string arguments case-insensitively");
        app.add_flag("--permissive-extras", permissive_extras,
                     "Accept any optional argument present on one side, not only declared defaults");
    }

    toolgt::MatchPolicy policy() const {
        toolgt::MatchPolicy p;
        p.numeric_tolerance = numeric_tolerance;
        p.case_insensitive_strings = case_insensitive;
        p.permissive_optional_extras = permissive_extras;
        toolgt::validate(p);
        return p;
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

struct BuildOptions {
    std::string input;
    std::string output;
    std::string template_id = "detail";
    std::string template_dir;
    std::string backend = "live";
    std::size_t workers = 8;
    std::string mode = "with-thought";
    std::string context = "preceding-user";
    std::string model = "gpt-4o-mini";
    std::string stage2_model;
    std::string judge_model;
    double temperature = 0.0;
    int max_tokens = 2048;
    double rpm = 0.0;
    std::string manifest;
    std::string stats;
    bool no_resume = false;
    std::string api_url;
    PolicyFlags policy;
};

int cmd_build(const BuildOptions& o, std::ostream& out, std::ostream& err) {
    toolgt::TemplateRegistry registry = toolgt::TemplateRegistry::with_builtins();
    if (!o.template_dir.empty()) registry.load_directory(o.template_dir);

    toolgt::PipelineConfig config;
    config.tmpl = registry.get(o.template_id);
    config.mode = *toolgt::record_mode_from_string(o.mode);
    config.stages.stage1_model = o.model;
    config.stages.stage2_model = o.stage2_model.empty() ? o.model : o.stage2_model;
    config.stages.judge_model = o.judge_model.empty() ? o.model : o.judge_model;
    config.stages.temperature = o.temperature;
    config.stages.max_tokens = o.max_tokens;
    config.policy = o.policy.policy();
    config.workers = o.workers;
    config.output = o.output;
    config.stats_path = o.stats;
    config.manifest_path = o.manifest;
    config.resume = !o.no_resume;
    config.log = [&err](std::string_view msg) { err << msg << '\n'; };

    const auto spec = toolgt::parse_backend_spec(o.backend);
    if (spec.mode == toolgt::BackendMode::Replay && !o.api_url.empty()) {
        throw toolgt::ConfigError("--api-url cannot be combined with a replay backend");
    }
    toolgt::LiveConfig live = toolgt::live_config_from_env();
    if (!o.api_url.empty()) live.url = o.api_url;
    live.requests_per_minute = o.rpm;
    auto backend = toolgt::make_backend(spec, live);

    std::ifstream in(o.input, std::ios::binary);
    if (!in) throw InputError("cannot read " + o.input);
    const auto corpus = toolgt::explode_conversations(in, *toolgt::context_mode_from_string(o.context));
    for (const auto& line : corpus.log) err << "skipped " << line << '\n';

    const auto stats = toolgt::run_pipeline(corpus, *backend, config);
    if (auto* record = dynamic_cast<toolgt::RecordBackend*>(backend.get())) record->flush();

    const auto doc = toolgt::to_json(stats);
    for (const auto& [key, value] : doc.items()) {
        if (key == "per_template") continue;
        out << std::left << std::setw(24) << key << value.dump() << '\n';
    }
    for (const auto& [id, counts] : doc["per_template"].items()) {
        out << "template " << id << ": " << counts["kept"].dump() << " kept of " << counts["samples"].dump()
            << '\n';
    }
    return kOk;
}

struct VerifyOptions {
    std::string pairs;
    std::string tools;
    PolicyFlags policy;
};

int cmd_verify(const VerifyOptions& o, std::ostream& out, std::ostream&) {
    const auto policy = o.policy.policy();
    const toolgt::ToolSet tools = toolgt::load_tools(read_file(o.tools));

    std::ifstream in(o.pairs, std::ios::binary);
    if (!in) throw InputError("cannot read " + o.pairs);
    std::string line;
    std::size_t line_no = 0;
    std::size_t index = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (toolgt::trim(line).empty()) continue;
        ojson pair;
        try {
            pair = ojson::parse(line);
        } catch (const ojson::exception& e) {
            throw toolgt::FormatError("pairs line " + std::to_string(line_no) + ": " + e.what());
        }
        const char* gold_key = pair.contains("gold") ? "gold" : "ground_truth";
        if (!pair.contains(gold_key) || !pair.contains("candidate")) {
            throw toolgt::FormatError("pairs line " + std::to_string(line_no) + ": needs gold and candidate");
        }
        ++index;
        const std::string label = pair.contains("id") ? (pair["id"].is_string() ? pair["id"].get<std::string>()
                                                                                 : pair["id"].dump())
                                                      : std::to_string(index);
        const auto verdict = toolgt::verify(pair[gold_key].get<std::string>(),
                                            pair["candidate"].get<std::string>(), tools, policy);
        out << label << '\t' << toolgt::to_string(verdict.outcome);
        for (std::size_t i = 0; i < verdict.explanation.size(); ++i) {
            out << (i == 0 ? "\t" : "; ") << verdict.explanation[i];
        }
        out << '\n';
    }
    return kOk;
}

struct ScoreOptions {
    std::string cases;
    std::string transcripts;
    std::string suite;
    std::string accuracies;
    std::vector<std::string> exclude;
    std::string report_out;
    PolicyFlags policy;
};

int cmd_score(const ScoreOptions& o, std::ostream& out, std::ostream& err) {
    const toolgt::SuiteConfig config = toolgt::load_suite_config(o.suite);
    const std::set<std::string, std::less<>> excluded(o.exclude.begin(), o.exclude.end());
    for (const auto& cat : excluded) {
        if (!config.count_of(cat)) throw toolgt::ConfigError("--exclude names unknown category '" + cat + "'");
    }
    auto keep = [&](std::string_view cat) { return !excluded.contains(cat); };

    toolgt::SuiteReport report;
    if (!o.accuracies.empty()) {
        ojson doc;
        try {
            doc = ojson::parse(read_file(o.accuracies));
        } catch (const ojson::exception& e) {
            throw toolgt::ConfigError("accuracies " + o.accuracies + ": " + e.what());
        }
        if (!doc.is_object()) throw toolgt::ConfigError("accuracies file must be a JSON object");
        std::vector<std::pair<std::string, double>> acc;
        for (const auto& [cat, value] : doc.items()) {
            if (cat.starts_with('_') || !keep(cat)) continue;
            if (!value.is_number()) throw toolgt::ConfigError("accuracy for '" + cat + "' is not a number");
            acc.emplace_back(cat, value.get<double>());
        }
        report = toolgt::aggregate_accuracies(acc, config);
    } else {
        const auto policy = o.policy.policy();
        std::ifstream in(o.cases, std::ios::binary);
        if (!in) throw InputError("cannot read " + o.cases);
        auto cases = toolgt::load_cases(in);
        if (!o.transcripts.empty()) {
            std::ifstream tin(o.transcripts, std::ios::binary);
            if (!tin) throw InputError("cannot read " + o.transcripts);
            const auto matched = toolgt::attach_transcripts(cases, tin);
            if (matched < cases.size()) err << (cases.size() - matched) << " cases have no transcript\n";
        }
        std::vector<toolgt::CaseResult> results;
        results.reserve(cases.size());
        for (const auto& c : cases) results.push_back({c.id, c.category, toolgt::score_case(c, policy)});
        report = toolgt::aggregate(toolgt::filter_subset(results, keep), config);
    }

    out << toolgt::format_table(report);
    const std::string json = toolgt::to_json(report).dump(2);
    if (o.report_out.empty()) {
        out << json << '\n';
    } else {
        std::ofstream rout(o.report_out, std::ios::binary | std::ios::trunc);
        if (!rout) throw InputError("cannot write " + o.report_out);
        rout << json << '\n';
    }
    return kOk;
}

struct StatsOptions {
    std::string input;
};

int cmd_stats(const StatsOptions& o, std::ostream& out, std::ostream&) {
    std::ifstream in(o.input, std::ios::binary);
    if (!in) throw InputError("cannot read " + o.input);
    std::map<std::pair<std::string, std::string>, std::size_t> counts;
    std::size_t total = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (toolgt::trim(line).empty()) continue;
        try {
            const auto record = toolgt::training_record_from_json(ojson::parse(line));
            ++counts[{record.template_id, std::string(toolgt::to_string(record.mode))}];
            ++total;
        } catch (const ojson::exception& e) {
            throw toolgt::FormatError("dataset line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    out << std::left << std::setw(16) << "template" << std::setw(16) << "mode" << "records\n";
    for (const auto& [key, n] : counts) {
        out << std::left << std::setw(16) << key.first << std::setw(16) << key.second << n << '\n';
    }
    out << std::left << std::setw(32) << "total" << total << '\n';
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Build reasoning-augmented function-calling datasets, verify calls, and score benchmarks."};
    app.name("forge");
    app.require_subcommand(1);

    BuildOptions build;
    auto* b = app.add_subcommand("build", "Run the three-stage construction pipeline over a corpus");
    b->add_option("--input", build.input, "Corpus JSONL (one conversation per line)")
        ->required()
        ->check(CLI::ExistingFile);
    b->add_option("--out", build.output, "Output dataset JSONL")->required();
    b->add_option("--template", build.template_id, "Reasoning template id")->capture_default_str();
    b->add_option("--template-dir", build.template_dir, "Directory of extra <id>.txt templates")
        ->check(CLI::ExistingDirectory);
    b->add_option("--backend", build.backend, "live | record:PATH | replay:PATH")->capture_default_str();
    b->add_option("--workers", build.workers, "Concurrent samples")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    b->add_option("--mode", build.mode, "Training record form")
        ->capture_default_str()
        ->check(CLI::IsMember({"with-thought", "no-thought"}));
    b->add_option("--context", build.context, "Which user turns form the query")
        ->capture_default_str()
        ->check(CLI::IsMember({"preceding-user", "all-prior-user"}));
    b->add_option("--model", build.model, "Model for stage 1, and for later stages unless overridden")
        ->capture_default_str();
    b->add_option("--stage2-model", build.stage2_model, "Model for call generation");
    b->add_option("--judge-model", build.judge_model, "Model for the judge");
    b->add_option("--temperature", build.temperature, "Sampling temperature for all stages")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    b->add_option("--max-tokens", build.max_tokens, "Output token limit per completion")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    b->add_option("--rpm", build.rpm, "Requests-per-minute cap for the live endpoint (0 = none)")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    b->add_option("--manifest", build.manifest, "Resume manifest path (default <out>.manifest.jsonl)");
    b->add_option("--stats", build.stats, "Stats JSON path (default <out>.stats.json)");
    b->add_flag("--no-resume", build.no_resume, "Ignore and overwrite an existing manifest");
    b->add_option("--api-url", build.api_url, "Endpoint URL, overriding FORGE_API_URL");
    build.policy.attach(*b);

    VerifyOptions verify;
    auto* v = app.add_subcommand("verify", "Compare gold and candidate call expressions offline");
    v->add_option("--pairs", verify.pairs, "JSONL of {\"gold\", \"candidate\"} pairs")
        ->required()
        ->check(CLI::ExistingFile);
    v->add_option("--tools", verify.tools, "Tool definitions JSON")->required()->check(CLI::ExistingFile);
    verify.policy.attach(*v);

    ScoreOptions score;
    auto* s = app.add_subcommand("score", "Score transcripts against gold cases and aggregate");
    auto* cases_opt =
        s->add_option("--cases", score.cases, "Cases JSONL")->check(CLI::ExistingFile);
    s->add_option("--transcripts", score.transcripts, "Transcripts JSONL of {\"id\", \"output\"}")
        ->check(CLI::ExistingFile)
        ->needs(cases_opt);
    s->add_option("--suite", score.suite, "Suite config JSON (counts and groups)")
        ->required()
        ->check(CLI::ExistingFile);
    auto* acc_opt = s->add_option("--accuracies", score.accuracies,
                                  "JSON object of per-category accuracies, instead of cases")
                        ->check(CLI::ExistingFile);
    cases_opt->excludes(acc_opt);
    s->add_option("--exclude", score.exclude, "Category to leave out (repeatable)");
    s->add_option("--report-out", score.report_out, "Write the JSON report here instead of stdout");
    score.policy.attach(*s);

    StatsOptions stats;
    auto* st = app.add_subcommand("stats", "Count dataset records per template and mode");
    st->add_option("--input", stats.input, "Dataset JSONL")->required()->check(CLI::ExistingFile);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        if (s->parsed() && score.cases.empty() && score.accuracies.empty()) {
            throw CLI::RequiredError("--cases or --accuracies");
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (b->parsed()) return cmd_build(build, out, err);
        if (v->parsed()) return cmd_verify(verify, out, err);
        if (s->parsed()) return cmd_score(score, out, err);
        if (st->parsed()) return cmd_stats(stats, out, err);
    } catch (const toolgt::CassetteMiss& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeFailure;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeFailure;
    } catch (const toolgt::ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const toolgt::UnknownTemplate& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const toolgt::FormatError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeFailure;
    }
    return kUsageError;
}

}  // namespace forge
