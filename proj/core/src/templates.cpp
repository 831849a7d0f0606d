#include "toolgt/templates.hpp"

#include <fstream>
#include <sstream>

#include "embedded_data.hpp"
#include "toolgt/errors.hpp"

namespace toolgt {

namespace {

constexpr std::string_view kFunctionsHere = "{FUNCTIONS HERE}";
constexpr std::string_view kTemplateHere = "{GUIDED-TEMPLATE HERE}";
constexpr std::string_view kUserRequest = "{user request}";
constexpr std::string_view kGroundTruth = "{GROUND TRUTH}";
constexpr std::string_view kRound1Thinking = "{ROUND 1 THINKING}";
constexpr std::string_view kRound2Call = "{MODEL FUNCTION CALL FROM ROUND 2}";

const std::map<std::string, std::string, std::less<>>& prompt_table() {
    static const auto table = [] {
        std::map<std::string, std::string, std::less<>> t;
        for (std::size_t i = 0; i < detail::kPromptFileCount; ++i) {
            t.emplace(detail::kPromptFiles[i].name, parse_data_file(detail::kPromptFiles[i].text));
        }
        return t;
    }();
    return table;
}

void require_common(const Sample& sample) {
    if (sample.tools.empty()) throw MissingField("tools (sample " + sample.id + ")");
    if (trim(sample.query).empty()) throw MissingField("query (sample " + sample.id + ")");
}

std::string ground_truth_text(const Sample& sample) {
    if (!trim(sample.raw_ground_truth).empty()) return sample.raw_ground_truth;
    if (!sample.ground_truth.empty()) return render_call_list(sample.ground_truth);
    throw MissingField("ground truth (sample " + sample.id + ")");
}

}  // namespace

std::string parse_data_file(std::string_view text) {
    bool had_header = false;
    while (!text.empty() && text.front() == '#') {
        const auto nl = text.find('\n');
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        had_header = true;
    }
    if (had_header) {
        if (text.starts_with("\r\n")) {
            text.remove_prefix(2);
        } else if (text.starts_with('\n')) {
            text.remove_prefix(1);
        }
    }
    if (text.ends_with('\n')) text.remove_suffix(1);
    if (text.ends_with('\r')) text.remove_suffix(1);
    return std::string(text);
}

TemplateRegistry TemplateRegistry::with_builtins() {
    TemplateRegistry registry;
    for (std::size_t i = 0; i < detail::kTemplateFileCount; ++i) {
        registry.add(Template{detail::kTemplateFiles[i].name, parse_data_file(detail::kTemplateFiles[i].text)});
    }
    return registry;
}

void TemplateRegistry::add(Template tmpl) {
    auto id = tmpl.id;
    templates_.insert_or_assign(std::move(id), std::move(tmpl));
}

void TemplateRegistry::load_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
        throw FormatError("template directory not found: " + dir.string());
    }
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        std::ifstream in(entry.path(), std::ios::binary);
        if (!in) throw FormatError("cannot read template file " + entry.path().string());
        std::ostringstream buffer;
        buffer << in.rdbuf();
        std::string body = parse_data_file(buffer.str());
        if (trim(body).empty()) throw FormatError("template file is empty: " + entry.path().string());
        add(Template{entry.path().stem().string(), std::move(body)});
    }
}

const Template& TemplateRegistry::get(std::string_view id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) throw UnknownTemplate(std::string(id));
    return it->second;
}

bool TemplateRegistry::contains(std::string_view id) const { return templates_.find(id) != templates_.end(); }

std::vector<std::string> TemplateRegistry::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : templates_) out.push_back(id);
    return out;
}

const Template& get_template(std::string_view id) {
    static const TemplateRegistry builtins = TemplateRegistry::with_builtins();
    return builtins.get(id);
}

std::string_view to_string(Role role) {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

std::string_view prompt_text(std::string_view name) {
    const auto& table = prompt_table();
    auto it = table.find(name);
    if (it == table.end()) throw Error("no embedded prompt named '" + std::string(name) + "'");
    return it->second;
}

std::string substitute(std::string_view text,
                       const std::vector<std::pair<std::string_view, std::string_view>>& bindings) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '{') {
            bool replaced = false;
            for (const auto& [key, value] : bindings) {
                if (text.substr(i, key.size()) == key) {
                    out.append(value);
                    i += key.size();
                    replaced = true;
                    break;
                }
            }
            if (replaced) continue;
        }
        out.push_back(text[i++]);
    }
    return out;
}

Messages build_stage1(const Sample& sample, const Template& tmpl) {
    require_common(sample);
    const std::string tools = render_tools_json(sample.tools);
    const std::string truth = ground_truth_text(sample);
    return {
        {Role::System,
         substitute(prompt_text("stage1_system"), {{kFunctionsHere, tools}, {kTemplateHere, tmpl.body}})},
        {Role::User, substitute(prompt_text("stage1_user"), {{kUserRequest, sample.query}, {kGroundTruth, truth}})},
    };
}

Messages build_stage2(const Sample& sample, std::string_view reasoning) {
    require_common(sample);
    if (trim(reasoning).empty()) throw MissingField("reasoning (sample " + sample.id + ")");
    const std::string tools = render_tools_json(sample.tools);
    return {
        {Role::System, substitute(prompt_text("stage2_system"), {{kFunctionsHere, tools}})},
        {Role::User,
         substitute(prompt_text("stage2_user"), {{kUserRequest, sample.query}, {kRound1Thinking, reasoning}})},
    };
}

Messages build_stage3(const Sample& sample, std::string_view candidate) {
    require_common(sample);
    if (trim(candidate).empty()) throw MissingField("candidate (sample " + sample.id + ")");
    const std::string tools = render_tools_json(sample.tools);
    const std::string truth = ground_truth_text(sample);
    return {
        {Role::System, substitute(prompt_text("stage3_system"), {{kFunctionsHere, tools}})},
        {Role::User, substitute(prompt_text("stage3_user"),
                                {{kUserRequest, sample.query}, {kGroundTruth, truth}, {kRound2Call, candidate}})},
    };
}

std::string_view to_string(RecordMode mode) {
    return mode == RecordMode::WithThought ? "with-thought" : "no-thought";
}

std::optional<RecordMode> record_mode_from_string(std::string_view text) {
    if (text == "with-thought") return RecordMode::WithThought;
    if (text == "no-thought") return RecordMode::NoThought;
    return std::nullopt;
}

TrainingRecord render_training_record(const Sample& sample, const ReasoningChain* reasoning, RecordMode mode) {
    require_common(sample);
    if (sample.ground_truth.empty()) throw MissingField("ground truth (sample " + sample.id + ")");
    if (mode == RecordMode::WithThought && (!reasoning || trim(reasoning->text).empty())) {
        throw MissingField("reasoning (sample " + sample.id + ")");
    }

    const std::string calls = render_call_list(sample.ground_truth);
    std::string assistant;
    if (mode == RecordMode::WithThought) {
        assistant = "<THINKING>" + reasoning->text + "</THINKING>\n<FUNCTION>" + calls + "</FUNCTION>";
    } else {
        assistant = calls;
    }

    TrainingRecord record;
    record.sample_id = sample.id;
    record.template_id = reasoning ? reasoning->template_id : std::string();
    record.mode = mode;
    record.messages = {
        {Role::System, substitute(prompt_text("training_system"), {{kFunctionsHere, render_tools_json(sample.tools)}})},
        {Role::User, sample.query},
        {Role::Assistant, std::move(assistant)},
    };
    return record;
}

nlohmann::ordered_json to_json(const TrainingRecord& record) {
    nlohmann::ordered_json messages = nlohmann::ordered_json::array();
    for (const auto& m : record.messages) {
        messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
    return {
        {"messages", std::move(messages)},
        {"template_id", record.template_id},
        {"sample_id", record.sample_id},
        {"mode", to_string(record.mode)},
    };
}

TrainingRecord training_record_from_json(const nlohmann::ordered_json& json) {
    try {
        TrainingRecord record;
        record.template_id = json.at("template_id").get<std::string>();
        record.sample_id = json.at("sample_id").get<std::string>();
        auto mode = record_mode_from_string(json.at("mode").get<std::string>());
        if (!mode) throw FormatError("training record: unknown mode " + json.at("mode").dump());
        record.mode = *mode;
        for (const auto& m : json.at("messages")) {
            const auto role = m.at("role").get<std::string>();
            Role r = Role::User;
            if (role == "system") {
                r = Role::System;
            } else if (role == "assistant") {
                r = Role::Assistant;
            } else if (role != "user") {
                throw FormatError("training record: unknown role '" + role + "'");
            }
            record.messages.push_back({r, m.at("content").get<std::string>()});
        }
        return record;
    } catch (const nlohmann::ordered_json::exception& e) {
        throw FormatError(std::string("training record: ") + e.what());
    }
}

}  // namespace toolgt
