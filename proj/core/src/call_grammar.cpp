#include "toolgt/call_grammar.hpp"

#include <algorithm>
#include <cstdint>

namespace toolgt {

namespace {

constexpr std::size_t kMaxDepth = 256;

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_ident_start(char c) {
    auto u = static_cast<unsigned char>(c);
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || u >= 0x80;
}

bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c) || c == '.' || c == '-'; }

// Characters that can never be part of a top-level function name.
bool ends_name(char c) {
    switch (c) {
        case '(': case ')': case '[': case ']': case '{': case '}':
        case ',': case '=': case '"': case '\'':
            return true;
        default:
            return false;
    }
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    CallList parse_all() {
        CallList result;
        skip_ws();
        if (at_end()) return result;

        if (peek() == '[') {
            ++pos_;
            skip_ws();
            if (consume(']')) {
                expect_end();
                return result;
            }
            for (;;) {
                result.calls.push_back(parse_top_call());
                skip_ws();
                if (consume(',')) {
                    skip_ws();
                    if (consume(']')) break;
                    continue;
                }
                if (consume(']')) break;
                fail(at_end() ? "']' to close the call list" : "',' or ']'");
            }
        } else {
            for (;;) {
                result.calls.push_back(parse_top_call());
                skip_ws();
                if (!consume(',')) break;
                skip_ws();
                if (at_end()) break;
            }
        }
        expect_end();
        return result;
    }

private:
    [[noreturn]] void fail(std::string expected) const { fail_at(pos_, std::move(expected)); }

    [[noreturn]] void fail_at(std::size_t offset, std::string expected) const {
        throw SyntaxError(offset, std::move(expected));
    }

    bool at_end() const { return pos_ >= src_.size(); }
    char peek() const { return at_end() ? '\0' : src_[pos_]; }

    bool consume(char c) {
        if (!at_end() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void skip_ws() {
        while (!at_end() && is_space(src_[pos_])) ++pos_;
    }

    void expect_end() {
        skip_ws();
        if (!at_end()) fail("end of input");
    }

    std::string_view read_identifier() {
        const std::size_t start = pos_;
        while (!at_end() && is_ident_char(src_[pos_])) ++pos_;
        return src_.substr(start, pos_ - start);
    }

    FunctionCall parse_top_call() {
        const std::size_t start = pos_;
        while (!at_end() && !ends_name(src_[pos_])) ++pos_;
        auto name = trim(src_.substr(start, pos_ - start));
        if (name.empty()) fail_at(start, "function name");
        if (!consume('(')) fail("'(' after function name");

        FunctionCall call;
        call.name = std::string(name);
        parse_arguments(call);
        return call;
    }

    // Called just after the opening '('; consumes through the closing ')'.
    void parse_arguments(FunctionCall& call) {
        skip_ws();
        if (consume(')')) return;
        for (;;) {
            skip_ws();
            const std::size_t key_start = pos_;
            if (at_end()) fail("')' to close the argument list");
            if (!is_ident_start(peek())) {
                fail("keyword argument (positional arguments are not supported)");
            }
            std::string key(read_identifier());
            skip_ws();
            if (!consume('=')) {
                fail_at(key_start, "keyword argument (positional arguments are not supported)");
            }
            Value value = parse_value();
            if (call.find_arg(key) != nullptr) {
                fail_at(key_start, "unique keyword argument ('" + key + "' is repeated)");
            }
            call.args.push_back(Argument{std::move(key), std::move(value)});

            skip_ws();
            if (consume(',')) {
                skip_ws();
                if (consume(')')) return;
                continue;
            }
            if (consume(')')) return;
            fail(at_end() ? "')' to close the argument list" : "',' or ')'");
        }
    }

    Value parse_value() {
        if (++depth_ > kMaxDepth) fail("nesting depth of at most 256");
        skip_ws();
        Value v = parse_value_inner();
        --depth_;
        return v;
    }

    Value parse_value_inner() {
        if (at_end()) fail("value");
        const char c = peek();
        if (c == '"' || c == '\'') return Value(parse_string());
        if (c == '[') return Value(parse_list());
        if (c == '{') return Value(parse_mapping());
        if (is_digit(c) || c == '-' || c == '+' || c == '.') return Value(parse_number());
        if (is_ident_start(c)) {
            const std::size_t start = pos_;
            std::string_view word = read_identifier();
            const std::size_t after_word = pos_;
            skip_ws();
            if (consume('(')) {
                FunctionCall nested;
                nested.name = std::string(word);
                parse_arguments(nested);
                return Value(std::move(nested));
            }
            pos_ = after_word;
            if (word == "True" || word == "true") return Value(true);
            if (word == "False" || word == "false") return Value(false);
            if (word == "None" || word == "null") return Value(Null{});
            fail_at(start, "value ('" + std::string(word) + "' is not a literal)");
        }
        fail("value");
    }

    std::string parse_string() {
        const std::size_t start = pos_;
        const char quote = src_[pos_++];
        std::string out;
        for (;;) {
            if (at_end()) fail_at(start, "closing quote for string");
            const char c = src_[pos_++];
            if (c == quote) return out;
            if (c != '\\') {
                out.push_back(c);
                continue;
            }
            if (at_end()) fail_at(start, "closing quote for string");
            const char e = src_[pos_++];
            switch (e) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case 'r': out.push_back('\r'); break;
                case 'b': out.push_back('\b'); break;
                case 'f': out.push_back('\f'); break;
                case '0': out.push_back('\0'); break;
                case '\\': out.push_back('\\'); break;
                case '\'': out.push_back('\''); break;
                case '"': out.push_back('"'); break;
                case '/': out.push_back('/'); break;
                case 'x': append_utf8(out, read_hex(2)); break;
                case 'u': {
                    std::uint32_t cp = read_hex(4);
                    if (cp >= 0xD800 && cp <= 0xDBFF && pos_ + 1 < src_.size() &&
                        src_[pos_] == '\\' && src_[pos_ + 1] == 'u') {
                        const std::size_t save = pos_;
                        pos_ += 2;
                        std::uint32_t low = read_hex(4);
                        if (low >= 0xDC00 && low <= 0xDFFF) {
                            cp = 0x10000 + ((cp - 0xD800) << 10) + (low - 0xDC00);
                        } else {
                            pos_ = save;
                        }
                    }
                    append_utf8(out, cp);
                    break;
                }
                default:
                    // Unknown escapes are kept verbatim, as Python does.
                    out.push_back('\\');
                    out.push_back(e);
            }
        }
    }

    std::uint32_t read_hex(int digits) {
        std::uint32_t v = 0;
        for (int i = 0; i < digits; ++i) {
            const int h = at_end() ? -1 : hex_value(src_[pos_]);
            if (h < 0) fail("hexadecimal digit in escape sequence");
            v = v * 16 + static_cast<std::uint32_t>(h);
            ++pos_;
        }
        return v;
    }

    Number parse_number() {
        const std::size_t start = pos_;
        if (peek() == '+' || peek() == '-') ++pos_;
        std::size_t digits = 0;
        while (is_digit(peek())) ++pos_, ++digits;
        if (peek() == '.') {
            ++pos_;
            while (is_digit(peek())) ++pos_, ++digits;
        }
        if (digits == 0) fail_at(start, "number");
        if (peek() == 'e' || peek() == 'E') {
            ++pos_;
            if (peek() == '+' || peek() == '-') ++pos_;
            if (!is_digit(peek())) fail("exponent digits");
            while (is_digit(peek())) ++pos_;
        }
        return Number{std::string(src_.substr(start, pos_ - start))};
    }

    List parse_list() {
        ++pos_;  // '['
        List items;
        skip_ws();
        if (consume(']')) return items;
        for (;;) {
            items.push_back(parse_value());
            skip_ws();
            if (consume(',')) {
                skip_ws();
                if (consume(']')) return items;
                continue;
            }
            if (consume(']')) return items;
            fail(at_end() ? "']' to close the list" : "',' or ']'");
        }
    }

    Mapping parse_mapping() {
        ++pos_;  // '{'
        Mapping entries;
        skip_ws();
        if (consume('}')) return entries;
        for (;;) {
            skip_ws();
            const std::size_t key_start = pos_;
            if (peek() != '"' && peek() != '\'') fail(at_end() ? "'}' to close the mapping" : "string key");
            std::string key = parse_string();
            skip_ws();
            if (!consume(':')) fail("':' after mapping key");
            Value value = parse_value();
            for (const auto& e : entries) {
                if (e.key == key) fail_at(key_start, "unique mapping key ('" + key + "' is repeated)");
            }
            entries.push_back(MappingEntry{std::move(key), std::move(value)});
            skip_ws();
            if (consume(',')) {
                skip_ws();
                if (consume('}')) return entries;
                continue;
            }
            if (consume('}')) return entries;
            fail(at_end() ? "'}' to close the mapping" : "',' or '}'");
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t depth_ = 0;
};

void render_string(std::string& out, std::string_view s) {
    static constexpr char kHex[] = "0123456789abcdef";
    out.push_back('"');
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    out += "\\u00";
                    out.push_back(kHex[(c >> 4) & 0xF]);
                    out.push_back(kHex[c & 0xF]);
                } else {
                    out.push_back(c);
                }
        }
    }
    out.push_back('"');
}

void render_into(std::string& out, const Value& v);

void render_call_into(std::string& out, const FunctionCall& call) {
    out += call.name;
    out.push_back('(');
    for (std::size_t i = 0; i < call.args.size(); ++i) {
        if (i) out += ", ";
        out += call.args[i].key;
        out.push_back('=');
        render_into(out, call.args[i].value);
    }
    out.push_back(')');
}

void render_into(std::string& out, const Value& v) {
    struct Visitor {
        std::string& out;
        void operator()(const Null&) { out += "None"; }
        void operator()(bool b) { out += b ? "True" : "False"; }
        void operator()(const Number& n) { out += n.lexeme; }
        void operator()(const std::string& s) { render_string(out, s); }
        void operator()(const List& items) {
            out.push_back('[');
            for (std::size_t i = 0; i < items.size(); ++i) {
                if (i) out += ", ";
                render_into(out, items[i]);
            }
            out.push_back(']');
        }
        void operator()(const Mapping& entries) {
            out.push_back('{');
            for (std::size_t i = 0; i < entries.size(); ++i) {
                if (i) out += ", ";
                render_string(out, entries[i].key);
                out += ": ";
                render_into(out, entries[i].value);
            }
            out.push_back('}');
        }
        void operator()(const FunctionCall& call) { render_call_into(out, call); }
    };
    std::visit(Visitor{out}, v.data);
}

std::size_t value_depth(const Value& v) {
    if (const auto* call = v.get_if<FunctionCall>()) return call_depth(*call);
    std::size_t depth = 0;
    if (const auto* items = v.get_if<List>()) {
        for (const auto& item : *items) depth = std::max(depth, value_depth(item));
    } else if (const auto* entries = v.get_if<Mapping>()) {
        for (const auto& e : *entries) depth = std::max(depth, value_depth(e.value));
    }
    return depth;
}

}  // namespace

bool Number::is_integer() const {
    return lexeme.find_first_of(".eE") == std::string::npos;
}

const Value* FunctionCall::find_arg(std::string_view key) const {
    for (const auto& arg : args) {
        if (arg.key == key) return &arg.value;
    }
    return nullptr;
}

bool FunctionCall::operator==(const FunctionCall& other) const {
    return name == other.name && args == other.args;
}

bool Value::operator==(const Value& other) const { return data == other.data; }

bool Argument::operator==(const Argument& other) const {
    return key == other.key && value == other.value;
}

bool MappingEntry::operator==(const MappingEntry& other) const {
    return key == other.key && value == other.value;
}

bool CallList::operator==(const CallList& other) const { return calls == other.calls; }

SyntaxError::SyntaxError(std::size_t offset, std::string expected)
    : Error("syntax error at byte " + std::to_string(offset) + ": expected " + expected),
      offset_(offset),
      expected_(std::move(expected)) {}

CallList parse_call_list(std::string_view text) { return Parser(text).parse_all(); }

std::string render_call_list(const CallList& calls) {
    std::string out = "[";
    for (std::size_t i = 0; i < calls.calls.size(); ++i) {
        if (i) out += ", ";
        render_call_into(out, calls.calls[i]);
    }
    out.push_back(']');
    return out;
}

std::string render_call(const FunctionCall& call) {
    std::string out;
    render_call_into(out, call);
    return out;
}

std::string render_value(const Value& value) {
    std::string out;
    render_into(out, value);
    return out;
}

std::size_t call_depth(const FunctionCall& call) {
    std::size_t inner = 0;
    for (const auto& arg : call.args) inner = std::max(inner, value_depth(arg.value));
    return 1 + inner;
}

std::optional<TaggedSection> extract_tagged(std::string_view text, std::string_view tag) {
    const std::string open = "<" + std::string(tag) + ">";
    const std::string close = "</" + std::string(tag) + ">";
    const auto open_pos = text.find(open);
    if (open_pos == std::string_view::npos) return std::nullopt;
    const auto start = open_pos + open.size();
    const auto close_pos = text.find(close, start);
    TaggedSection section;
    if (close_pos == std::string_view::npos) {
        section.content = std::string(trim(text.substr(start)));
        section.truncated = true;
    } else {
        section.content = std::string(trim(text.substr(start, close_pos - start)));
    }
    return section;
}

std::string_view trim(std::string_view text) {
    std::size_t b = 0;
    std::size_t e = text.size();
    while (b < e && is_space(text[b])) ++b;
    while (e > b && is_space(text[e - 1])) --e;
    return text.substr(b, e - b);
}

}  // namespace toolgt
