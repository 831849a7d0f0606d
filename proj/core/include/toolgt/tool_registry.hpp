#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "toolgt/call_grammar.hpp"

namespace toolgt {

enum class TypeTag { String, Integer, Float, Boolean, Array, Object, Any };

std::string_view to_string(TypeTag tag);

/// Maps a schema type string ("dict", "str", "HashMap", ...) onto the closed
/// type set. Case-insensitive; nullopt for strings outside the table.
std::optional<TypeTag> type_tag_from_schema(std::string_view type_name);

/// Structural conformance of a value to a type tag. Integer literals satisfy
/// Float; nested calls satisfy any tag since their result type is unknown.
bool conforms(const Value& value, TypeTag tag);

struct ParamSpec {
    std::string name;
    TypeTag type = TypeTag::Any;
    std::string description;
    bool required = false;
    std::optional<Value> default_value;
    std::optional<std::vector<Value>> enum_values;
    /// The property object as written in the source document.
    nlohmann::ordered_json schema = nlohmann::ordered_json::object();

    bool operator==(const ParamSpec&) const = default;
};

struct ToolSpec {
    std::string name;
    std::string description;
    std::vector<ParamSpec> params;
    /// `parameters.type` as written ("object", "dict", ...).
    std::string parameters_type = "object";

    const ParamSpec* find_param(std::string_view param) const;
    bool operator==(const ToolSpec&) const = default;
};

/// Name-indexed tool collection; iteration follows insertion order.
class ToolSet {
public:
    /// Throws DuplicateTool.
    void add(ToolSpec tool);

    const ToolSpec* find(std::string_view name) const;
    std::span<const ToolSpec> tools() const { return tools_; }
    std::size_t size() const { return tools_.size(); }
    bool empty() const { return tools_.empty(); }

    bool operator==(const ToolSet& other) const;

private:
    std::vector<ToolSpec> tools_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct LoadWarning {
    std::string tool;
    std::string field;
    std::string message;
};

/// Parses a JSON array of tool objects (`name`, `description`,
/// `parameters.properties`, `parameters.required`). Throws FormatError naming
/// the tool and field at fault, or DuplicateTool.
ToolSet load_tools(std::string_view document, std::vector<LoadWarning>* warnings = nullptr);
ToolSet tools_from_json(const nlohmann::ordered_json& array, std::vector<LoadWarning>* warnings = nullptr);

/// Canonical tool documentation: fixed key order, used verbatim in prompts.
nlohmann::ordered_json tools_to_json(const ToolSet& tools);
/// tools_to_json rendered with 2-space indentation.
std::string render_tools_json(const ToolSet& tools);

Value value_from_json(const nlohmann::ordered_json& json);

enum class FindingKind { UnknownFunction, MissingRequired, UnknownParam, TypeMismatch, EnumViolation };

std::string_view to_string(FindingKind kind);

struct Finding {
    FindingKind kind;
    std::string function;
    std::string param;
    std::string detail;
};

struct ValidationReport {
    std::vector<Finding> findings;

    bool ok() const { return findings.empty(); }
};

ValidationReport validate_call(const FunctionCall& call, const ToolSet& tools);

}  // namespace toolgt
