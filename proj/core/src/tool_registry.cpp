#include "toolgt/tool_registry.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <utility>

namespace toolgt {

namespace {

using json = nlohmann::ordered_json;

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

struct TypeAlias {
    std::string_view name;
    TypeTag tag;
};

// Schema type strings seen in tool-use datasets (JSON schema, Python, Java and
// JavaScript spellings), lower-cased.
constexpr std::array kTypeAliases{
    TypeAlias{"string", TypeTag::String},   TypeAlias{"str", TypeTag::String},
    TypeAlias{"text", TypeTag::String},     TypeAlias{"char", TypeTag::String},
    TypeAlias{"integer", TypeTag::Integer}, TypeAlias{"int", TypeTag::Integer},
    TypeAlias{"long", TypeTag::Integer},    TypeAlias{"short", TypeTag::Integer},
    TypeAlias{"byte", TypeTag::Integer},    TypeAlias{"float", TypeTag::Float},
    TypeAlias{"number", TypeTag::Float},    TypeAlias{"double", TypeTag::Float},
    TypeAlias{"decimal", TypeTag::Float},   TypeAlias{"boolean", TypeTag::Boolean},
    TypeAlias{"bool", TypeTag::Boolean},    TypeAlias{"array", TypeTag::Array},
    TypeAlias{"list", TypeTag::Array},      TypeAlias{"tuple", TypeTag::Array},
    TypeAlias{"set", TypeTag::Array},       TypeAlias{"arraylist", TypeTag::Array},
    TypeAlias{"object", TypeTag::Object},   TypeAlias{"dict", TypeTag::Object},
    TypeAlias{"map", TypeTag::Object},      TypeAlias{"hashmap", TypeTag::Object},
    TypeAlias{"any", TypeTag::Any},
};

std::string where(std::string_view tool, std::string_view field) {
    return "tool '" + std::string(tool) + "', field '" + std::string(field) + "'";
}

std::string json_type_string(const json& type, const std::string& tool, const std::string& field) {
    if (type.is_string()) return type.get<std::string>();
    if (type.is_array()) {
        // JSON-schema union such as ["string", "null"]: the first non-null member.
        for (const auto& t : type) {
            if (t.is_string() && t.get<std::string>() != "null") return t.get<std::string>();
        }
    }
    throw FormatError(where(tool, field) + ": 'type' must be a string");
}

ParamSpec load_param(const std::string& tool, const std::string& name, const json& prop,
                     std::vector<LoadWarning>* warnings) {
    const std::string field = "parameters.properties." + name;
    if (!prop.is_object()) throw FormatError(where(tool, field) + ": property must be an object");

    ParamSpec param;
    param.name = name;
    param.schema = prop;

    if (auto it = prop.find("type"); it != prop.end()) {
        const std::string type_name = json_type_string(*it, tool, field + ".type");
        if (auto tag = type_tag_from_schema(type_name)) {
            param.type = *tag;
        } else if (warnings) {
            warnings->push_back({tool, field + ".type", "unknown type '" + type_name + "', treated as any"});
        }
    }
    if (auto it = prop.find("description"); it != prop.end()) {
        if (!it->is_string()) throw FormatError(where(tool, field + ".description") + ": must be a string");
        param.description = it->get<std::string>();
    }
    if (auto it = prop.find("default"); it != prop.end()) {
        param.default_value = value_from_json(*it);
    }
    if (auto it = prop.find("enum"); it != prop.end()) {
        if (!it->is_array()) throw FormatError(where(tool, field + ".enum") + ": must be an array");
        std::vector<Value> values;
        for (const auto& e : *it) {
            Value v = value_from_json(e);
            if (!conforms(v, param.type)) {
                throw FormatError(where(tool, field + ".enum") + ": value " + e.dump() +
                                  " does not conform to type " + std::string(to_string(param.type)));
            }
            values.push_back(std::move(v));
        }
        param.enum_values = std::move(values);
    }
    return param;
}

ToolSpec load_tool(const json& obj, std::size_t index, std::vector<LoadWarning>* warnings) {
    const std::string fallback = "#" + std::to_string(index);
    if (!obj.is_object()) throw FormatError("tool " + fallback + ": must be a JSON object");

    ToolSpec tool;
    auto name_it = obj.find("name");
    if (name_it == obj.end() || !name_it->is_string() || trim(name_it->get<std::string>()).empty()) {
        throw FormatError(where(fallback, "name") + ": missing or not a non-empty string");
    }
    tool.name = name_it->get<std::string>();

    if (auto it = obj.find("description"); it != obj.end()) {
        if (!it->is_string()) throw FormatError(where(tool.name, "description") + ": must be a string");
        tool.description = it->get<std::string>();
    }

    auto params_it = obj.find("parameters");
    if (params_it == obj.end() || params_it->is_null()) return tool;
    if (!params_it->is_object()) throw FormatError(where(tool.name, "parameters") + ": must be an object");
    const json& params = *params_it;

    if (auto it = params.find("type"); it != params.end() && it->is_string()) {
        tool.parameters_type = it->get<std::string>();
    }

    if (auto it = params.find("properties"); it != params.end() && !it->is_null()) {
        if (!it->is_object()) {
            throw FormatError(where(tool.name, "parameters.properties") + ": must be an object");
        }
        for (const auto& [name, prop] : it->items()) {
            if (std::any_of(tool.params.begin(), tool.params.end(),
                            [&](const ParamSpec& ps) { return ps.name == name; })) {
                throw FormatError(where(tool.name, "parameters.properties") + ": duplicate property '" +
                                  name + "'");
            }
            tool.params.push_back(load_param(tool.name, name, prop, warnings));
        }
    }

    if (auto it = params.find("required"); it != params.end() && !it->is_null()) {
        if (!it->is_array()) throw FormatError(where(tool.name, "parameters.required") + ": must be an array");
        for (const auto& r : *it) {
            if (!r.is_string()) {
                throw FormatError(where(tool.name, "parameters.required") + ": entries must be strings");
            }
            const std::string name = r.get<std::string>();
            auto p = std::find_if(tool.params.begin(), tool.params.end(),
                                  [&](const ParamSpec& ps) { return ps.name == name; });
            if (p == tool.params.end()) {
                throw FormatError(where(tool.name, "parameters.required") + ": '" + name +
                                  "' is not a declared property");
            }
            p->required = true;
            if (p->default_value) {
                p->default_value.reset();
                if (warnings) {
                    warnings->push_back({tool.name, "parameters.properties." + name + ".default",
                                         "required parameter declares a default; default ignored"});
                }
            }
        }
    }
    return tool;
}

std::string describe_value(const Value& v) {
    std::string text = render_value(v);
    if (text.size() > 60) text = text.substr(0, 57) + "...";
    return text;
}

}  // namespace

std::string_view to_string(TypeTag tag) {
    switch (tag) {
        case TypeTag::String: return "string";
        case TypeTag::Integer: return "integer";
        case TypeTag::Float: return "float";
        case TypeTag::Boolean: return "boolean";
        case TypeTag::Array: return "array";
        case TypeTag::Object: return "object";
        case TypeTag::Any: return "any";
    }
    return "any";
}

std::optional<TypeTag> type_tag_from_schema(std::string_view type_name) {
    const std::string key = lower(trim(type_name));
    for (const auto& alias : kTypeAliases) {
        if (alias.name == key) return alias.tag;
    }
    return std::nullopt;
}

bool conforms(const Value& value, TypeTag tag) {
    if (tag == TypeTag::Any || value.is<FunctionCall>()) return true;
    switch (tag) {
        case TypeTag::String: return value.is<std::string>();
        case TypeTag::Integer: return value.is<Number>() && value.as<Number>().is_integer();
        case TypeTag::Float: return value.is<Number>();
        case TypeTag::Boolean: return value.is<bool>();
        case TypeTag::Array: return value.is<List>();
        case TypeTag::Object: return value.is<Mapping>();
        case TypeTag::Any: return true;
    }
    return false;
}

const ParamSpec* ToolSpec::find_param(std::string_view param) const {
    for (const auto& p : params) {
        if (p.name == param) return &p;
    }
    return nullptr;
}

void ToolSet::add(ToolSpec tool) {
    if (index_.count(tool.name)) throw DuplicateTool(tool.name);
    index_.emplace(tool.name, tools_.size());
    tools_.push_back(std::move(tool));
}

const ToolSpec* ToolSet::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    return it == index_.end() ? nullptr : &tools_[it->second];
}

bool ToolSet::operator==(const ToolSet& other) const { return tools_ == other.tools_; }

ToolSet load_tools(std::string_view document, std::vector<LoadWarning>* warnings) {
    json parsed;
    try {
        parsed = json::parse(document);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("tool document is not valid JSON: ") + e.what());
    }
    return tools_from_json(parsed, warnings);
}

ToolSet tools_from_json(const nlohmann::ordered_json& array, std::vector<LoadWarning>* warnings) {
    if (!array.is_array()) throw FormatError("tool document must be a JSON array of tool objects");
    ToolSet set;
    for (std::size_t i = 0; i < array.size(); ++i) set.add(load_tool(array[i], i, warnings));
    return set;
}

nlohmann::ordered_json tools_to_json(const ToolSet& tools) {
    json out = json::array();
    for (const auto& tool : tools.tools()) {
        json properties = json::object();
        json required = json::array();
        for (const auto& p : tool.params) {
            json prop = json::object();
            for (const char* key : {"type", "description", "enum", "default"}) {
                if (auto it = p.schema.find(key); it != p.schema.end()) prop[key] = *it;
            }
            for (const auto& [key, value] : p.schema.items()) {
                if (!prop.contains(key)) prop[key] = value;
            }
            properties[p.name] = std::move(prop);
            if (p.required) required.push_back(p.name);
        }
        json entry = json::object();
        entry["name"] = tool.name;
        entry["description"] = tool.description;
        entry["parameters"] = json{
            {"type", tool.parameters_type},
            {"properties", std::move(properties)},
            {"required", std::move(required)},
        };
        out.push_back(std::move(entry));
    }
    return out;
}

std::string render_tools_json(const ToolSet& tools) { return tools_to_json(tools).dump(2); }

Value value_from_json(const nlohmann::ordered_json& j) {
    switch (j.type()) {
        case json::value_t::null: return Value(Null{});
        case json::value_t::boolean: return Value(j.get<bool>());
        case json::value_t::number_integer:
        case json::value_t::number_unsigned:
        case json::value_t::number_float: return Value(Number{j.dump()});
        case json::value_t::string: return Value(j.get<std::string>());
        case json::value_t::array: {
            List items;
            for (const auto& e : j) items.push_back(value_from_json(e));
            return Value(std::move(items));
        }
        case json::value_t::object: {
            Mapping entries;
            for (const auto& [key, v] : j.items()) entries.push_back(MappingEntry{key, value_from_json(v)});
            return Value(std::move(entries));
        }
        default: return Value(Null{});
    }
}

std::string_view to_string(FindingKind kind) {
    switch (kind) {
        case FindingKind::UnknownFunction: return "unknown-function";
        case FindingKind::MissingRequired: return "missing-required";
        case FindingKind::UnknownParam: return "unknown-param";
        case FindingKind::TypeMismatch: return "type-mismatch";
        case FindingKind::EnumViolation: return "enum-violation";
    }
    return "unknown";
}

ValidationReport validate_call(const FunctionCall& call, const ToolSet& tools) {
    ValidationReport report;
    const ToolSpec* tool = tools.find(call.name);
    if (!tool) {
        report.findings.push_back({FindingKind::UnknownFunction, call.name, "", "no tool named '" + call.name + "'"});
        return report;
    }
    for (const auto& p : tool->params) {
        if (p.required && !call.find_arg(p.name)) {
            report.findings.push_back({FindingKind::MissingRequired, call.name, p.name, "required parameter missing"});
        }
    }
    for (const auto& arg : call.args) {
        const ParamSpec* p = tool->find_param(arg.key);
        if (!p) {
            report.findings.push_back({FindingKind::UnknownParam, call.name, arg.key, "parameter not in schema"});
            continue;
        }
        const bool default_null = p->default_value && p->default_value->is<Null>();
        if (!conforms(arg.value, p->type) && !(arg.value.is<Null>() && default_null)) {
            report.findings.push_back({FindingKind::TypeMismatch, call.name, arg.key,
                                       "expected " + std::string(to_string(p->type)) + ", got " +
                                           describe_value(arg.value)});
            continue;
        }
        if (p->enum_values && !arg.value.is<FunctionCall>()) {
            const auto& allowed = *p->enum_values;
            if (std::find(allowed.begin(), allowed.end(), arg.value) == allowed.end()) {
                report.findings.push_back({FindingKind::EnumViolation, call.name, arg.key,
                                           describe_value(arg.value) + " is not an allowed value"});
            }
        }
    }
    return report;
}

}  // namespace toolgt
