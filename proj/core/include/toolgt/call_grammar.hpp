#pragma once

// Function-call surface syntax: `[name(key=value, ...), other(...)]`.
//
// Values cover what function-calling benchmarks and tool-use datasets put in
// argument position: strings, numbers, booleans, null, lists, string-keyed
// mappings, and nested calls. Parsing is lossless (numbers keep their source
// lexeme); rendering is canonical.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "toolgt/errors.hpp"

namespace toolgt {

struct Value;
struct Argument;
struct MappingEntry;

/// Numeric literal, kept as written.
struct Number {
    std::string lexeme;

    /// True when the lexeme has no fraction and no exponent.
    bool is_integer() const;
    bool operator==(const Number&) const = default;
};

struct Null {
    bool operator==(const Null&) const = default;
};

using List = std::vector<Value>;
using Mapping = std::vector<MappingEntry>;

struct FunctionCall {
    std::string name;
    std::vector<Argument> args;

    const Value* find_arg(std::string_view key) const;
    bool operator==(const FunctionCall& other) const;
};

struct Value {
    using Storage = std::variant<Null, bool, Number, std::string, List, Mapping, FunctionCall>;
    Storage data;

    Value() = default;
    Value(Null v) : data(v) {}
    Value(bool v) : data(v) {}
    Value(Number v) : data(std::move(v)) {}
    Value(std::string v) : data(std::move(v)) {}
    Value(const char* v) : data(std::string(v)) {}
    Value(List v) : data(std::move(v)) {}
    Value(Mapping v) : data(std::move(v)) {}
    Value(FunctionCall v) : data(std::move(v)) {}

    template <typename T>
    bool is() const {
        return std::holds_alternative<T>(data);
    }
    template <typename T>
    const T& as() const {
        return std::get<T>(data);
    }
    template <typename T>
    const T* get_if() const {
        return std::get_if<T>(&data);
    }

    bool operator==(const Value& other) const;
};

struct Argument {
    std::string key;
    Value value;
    bool operator==(const Argument& other) const;
};

struct MappingEntry {
    std::string key;
    Value value;
    bool operator==(const MappingEntry& other) const;
};

struct CallList {
    std::vector<FunctionCall> calls;

    bool empty() const { return calls.empty(); }
    std::size_t size() const { return calls.size(); }
    bool operator==(const CallList& other) const;
};

/// Thrown by parse_call_list. `offset()` is a byte offset into the input.
class SyntaxError : public Error {
public:
    SyntaxError(std::size_t offset, std::string expected);

    std::size_t offset() const { return offset_; }
    const std::string& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::string expected_;
};

/// Parses a call-list expression. The surrounding brackets are optional and
/// blank input is the empty list. Only keyword arguments are accepted.
CallList parse_call_list(std::string_view text);

/// Canonical form: double-quoted strings, capitalized True/False/None,
/// ", " separators, arguments in source order.
std::string render_call_list(const CallList& calls);
std::string render_call(const FunctionCall& call);
std::string render_value(const Value& value);

/// Depth of nested calls: a call whose arguments hold no calls has depth 1.
std::size_t call_depth(const FunctionCall& call);

struct TaggedSection {
    std::string content;
    /// The closing tag was missing; content runs to end of text.
    bool truncated = false;
};

/// Content between the first `<tag>` and the next `</tag>`, trimmed of
/// surrounding whitespace. Absent when the opening tag is missing.
std::optional<TaggedSection> extract_tagged(std::string_view text, std::string_view tag);

std::string_view trim(std::string_view text);

}  // namespace toolgt
