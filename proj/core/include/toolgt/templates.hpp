#pragma once

// Reasoning templates and the prompt builders for each construction stage.
//
// Template bodies and prompt texts ship as data files (core/data/) that are
// embedded at build time. A data file may open with `#` comment lines and one
// blank separator line; those are not part of the body.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "toolgt/sample.hpp"

namespace toolgt {

struct Template {
    std::string id;
    std::string body;
};

/// Built-in ids: "detail", "claude", "simple".
class TemplateRegistry {
public:
    static TemplateRegistry with_builtins();

    /// Adds or replaces a template by id.
    void add(Template tmpl);
    /// Loads every `<id>.txt` file in `dir`. Throws FormatError on I/O failure.
    void load_directory(const std::filesystem::path& dir);

    /// Throws UnknownTemplate.
    const Template& get(std::string_view id) const;
    bool contains(std::string_view id) const;
    std::vector<std::string> ids() const;

private:
    std::map<std::string, Template, std::less<>> templates_;
};

/// Built-in template lookup. Throws UnknownTemplate.
const Template& get_template(std::string_view id);

/// Strips the leading comment header and the final newline of a data file.
std::string parse_data_file(std::string_view text);

enum class Role { System, User, Assistant };

std::string_view to_string(Role role);

struct Message {
    Role role;
    std::string content;
    bool operator==(const Message&) const = default;
};

using Messages = std::vector<Message>;

/// Reasoning-chain prompt: tools, template body, query and ground truth.
/// Throws MissingField when the sample lacks tools, query or ground truth.
Messages build_stage1(const Sample& sample, const Template& tmpl);

/// Call-generation prompt: tools, query and the stage-1 reasoning. Neither
/// the template nor the ground truth is included.
Messages build_stage2(const Sample& sample, std::string_view reasoning);

/// Judge prompt comparing the raw candidate against the ground truth.
Messages build_stage3(const Sample& sample, std::string_view candidate);

enum class RecordMode { WithThought, NoThought };

std::string_view to_string(RecordMode mode);
std::optional<RecordMode> record_mode_from_string(std::string_view text);

struct TrainingRecord {
    Messages messages;
    std::string template_id;
    std::string sample_id;
    RecordMode mode = RecordMode::WithThought;
};

/// System/user/assistant triple supervised toward the canonical ground truth.
/// With-thought: `<THINKING>r</THINKING>\n<FUNCTION>y</FUNCTION>`; no-thought:
/// the call list alone. Throws MissingField when with-thought lacks reasoning.
TrainingRecord render_training_record(const Sample& sample, const ReasoningChain* reasoning, RecordMode mode);

/// One dataset line: {"messages": [...], "template_id", "sample_id", "mode"}.
nlohmann::ordered_json to_json(const TrainingRecord& record);
TrainingRecord training_record_from_json(const nlohmann::ordered_json& json);

/// Single-pass placeholder substitution; replacement text is never rescanned.
std::string substitute(std::string_view text,
                       const std::vector<std::pair<std::string_view, std::string_view>>& bindings);

/// Raw prompt text by file stem ("stage1_system", "training_system", ...).
std::string_view prompt_text(std::string_view name);

}  // namespace toolgt
