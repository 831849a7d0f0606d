#pragma once

// A second, deliberately naive parser for the call syntax, used only as a
// test oracle. It walks the text once, character by character, and builds a
// JSON tree instead of the library AST so that the two implementations share
// no code or data structures.
//
// Tree shapes:
//   call    {"call": name, "args": [[key, value], ...]}
//   string  {"s": text}      number {"n": lexeme}
//   bool    {"b": bool}      null   {"null": true}
//   list    {"list": [...]}  map    {"map": [[key, value], ...]}

#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "toolgt/call_grammar.hpp"

namespace reference {

using nlohmann::json;

class Reader {
public:
    explicit Reader(std::string_view s) : s_(s) {}

    // Array of calls, or nullopt when the text is not a valid call list.
    std::optional<json> parse() {
        ok_ = true;
        json calls = json::array();
        ws();
        if (i_ == s_.size()) return calls;
        const bool bracketed = s_[i_] == '[';
        if (bracketed) {
            ++i_;
            ws();
            if (take(']')) return finish(calls);
        }
        while (ok_) {
            calls.push_back(top_call());
            ws();
            if (take(',')) {
                ws();
                if (bracketed && take(']')) break;
                if (!bracketed && i_ == s_.size()) break;
                continue;
            }
            if (bracketed) {
                if (!take(']')) ok_ = false;
            }
            break;
        }
        return finish(calls);
    }

private:
    std::optional<json> finish(json calls) {
        ws();
        if (!ok_ || i_ != s_.size()) return std::nullopt;
        return calls;
    }

    static bool space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
    static bool letter(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || static_cast<unsigned char>(c) >= 0x80;
    }
    static bool digit(char c) { return c >= '0' && c <= '9'; }
    static bool word_char(char c) { return letter(c) || digit(c) || c == '.' || c == '-'; }

    void ws() {
        while (i_ < s_.size() && space(s_[i_])) ++i_;
    }
    bool take(char c) {
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }
    char cur() const { return i_ < s_.size() ? s_[i_] : '\0'; }

    json top_call() {
        std::string name;
        while (i_ < s_.size() && std::string_view("()[]{},=\"'").find(s_[i_]) == std::string_view::npos) {
            name.push_back(s_[i_++]);
        }
        while (!name.empty() && space(name.back())) name.pop_back();
        std::size_t lead = 0;
        while (lead < name.size() && space(name[lead])) ++lead;
        name.erase(0, lead);
        if (name.empty() || !take('(')) {
            ok_ = false;
            return nullptr;
        }
        return call_body(name);
    }

    json call_body(std::string name) {
        json args = json::array();
        ws();
        if (take(')')) return json{{"call", name}, {"args", args}};
        while (ok_) {
            ws();
            if (!letter(cur())) {
                ok_ = false;
                break;
            }
            std::string key;
            while (word_char(cur())) key.push_back(s_[i_++]);
            ws();
            if (!take('=')) {
                ok_ = false;
                break;
            }
            json v = value(0);
            for (const auto& a : args) {
                if (a[0] == key) ok_ = false;
            }
            args.push_back(json::array({key, v}));
            ws();
            if (take(',')) {
                ws();
                if (take(')')) break;
                continue;
            }
            if (!take(')')) ok_ = false;
            break;
        }
        return json{{"call", name}, {"args", args}};
    }

    json value(int depth) {
        ws();
        if (!ok_ || depth > 250 || i_ >= s_.size()) {
            ok_ = false;
            return nullptr;
        }
        const char c = s_[i_];
        if (c == '"' || c == '\'') return json{{"s", str()}};
        if (c == '[') {
            ++i_;
            json items = json::array();
            ws();
            if (take(']')) return json{{"list", items}};
            while (ok_) {
                items.push_back(value(depth + 1));
                ws();
                if (take(',')) {
                    ws();
                    if (take(']')) break;
                    continue;
                }
                if (!take(']')) ok_ = false;
                break;
            }
            return json{{"list", items}};
        }
        if (c == '{') {
            ++i_;
            json entries = json::array();
            ws();
            if (take('}')) return json{{"map", entries}};
            while (ok_) {
                ws();
                if (cur() != '"' && cur() != '\'') {
                    ok_ = false;
                    break;
                }
                std::string key = str();
                ws();
                if (!take(':')) {
                    ok_ = false;
                    break;
                }
                json v = value(depth + 1);
                for (const auto& e : entries) {
                    if (e[0] == key) ok_ = false;
                }
                entries.push_back(json::array({key, v}));
                ws();
                if (take(',')) {
                    ws();
                    if (take('}')) break;
                    continue;
                }
                if (!take('}')) ok_ = false;
                break;
            }
            return json{{"map", entries}};
        }
        if (digit(c) || c == '-' || c == '+' || c == '.') return json{{"n", number()}};
        if (letter(c)) {
            std::string word;
            while (word_char(cur())) word.push_back(s_[i_++]);
            const std::size_t after = i_;
            ws();
            if (take('(')) return call_body(word);
            i_ = after;
            if (word == "True" || word == "true") return json{{"b", true}};
            if (word == "False" || word == "false") return json{{"b", false}};
            if (word == "None" || word == "null") return json{{"null", true}};
        }
        ok_ = false;
        return nullptr;
    }

    std::string number() {
        const std::size_t start = i_;
        if (cur() == '+' || cur() == '-') ++i_;
        int digits = 0;
        while (digit(cur())) ++i_, ++digits;
        if (cur() == '.') {
            ++i_;
            while (digit(cur())) ++i_, ++digits;
        }
        if (digits == 0) ok_ = false;
        if (cur() == 'e' || cur() == 'E') {
            ++i_;
            if (cur() == '+' || cur() == '-') ++i_;
            if (!digit(cur())) ok_ = false;
            while (digit(cur())) ++i_;
        }
        return std::string(s_.substr(start, i_ - start));
    }

    static void utf8(std::string& out, unsigned cp) {
        if (cp < 0x80) {
            out += static_cast<char>(cp);
        } else if (cp < 0x800) {
            out += static_cast<char>(0xC0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x10000) {
            out += static_cast<char>(0xE0 | (cp >> 12));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            out += static_cast<char>(0xF0 | (cp >> 18));
            out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        }
    }

    unsigned hex(int n) {
        unsigned v = 0;
        for (int k = 0; k < n; ++k) {
            const char c = cur();
            unsigned d;
            if (c >= '0' && c <= '9') {
                d = static_cast<unsigned>(c - '0');
            } else if (c >= 'a' && c <= 'f') {
                d = static_cast<unsigned>(c - 'a' + 10);
            } else if (c >= 'A' && c <= 'F') {
                d = static_cast<unsigned>(c - 'A' + 10);
            } else {
                ok_ = false;
                return 0;
            }
            v = v * 16 + d;
            ++i_;
        }
        return v;
    }

    std::string str() {
        const char q = s_[i_++];
        std::string out;
        while (ok_) {
            if (i_ >= s_.size()) {
                ok_ = false;
                break;
            }
            const char c = s_[i_++];
            if (c == q) break;
            if (c != '\\') {
                out += c;
                continue;
            }
            if (i_ >= s_.size()) {
                ok_ = false;
                break;
            }
            const char e = s_[i_++];
            switch (e) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                case 'b': out += '\b'; break;
                case 'f': out += '\f'; break;
                case '0': out += '\0'; break;
                case '\\': case '\'': case '"': case '/': out += e; break;
                case 'x': utf8(out, hex(2)); break;
                case 'u': {
                    unsigned cp = hex(4);
                    if (cp >= 0xD800 && cp < 0xDC00 && cur() == '\\' && i_ + 1 < s_.size() && s_[i_ + 1] == 'u') {
                        const std::size_t save = i_;
                        i_ += 2;
                        const unsigned lo = hex(4);
                        if (ok_ && lo >= 0xDC00 && lo < 0xE000) {
                            cp = 0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00);
                        } else {
                            i_ = save;
                        }
                    }
                    utf8(out, cp);
                    break;
                }
                default:
                    out += '\\';
                    out += e;
            }
        }
        return out;
    }

    std::string_view s_;
    std::size_t i_ = 0;
    bool ok_ = true;
};

inline std::optional<json> parse(std::string_view text) { return Reader(text).parse(); }

// The library AST in the same tree shape, for comparison.
inline json tree(const toolgt::Value& v);

inline json tree(const toolgt::FunctionCall& call) {
    json args = json::array();
    for (const auto& a : call.args) args.push_back(json::array({a.key, tree(a.value)}));
    return json{{"call", call.name}, {"args", args}};
}

inline json tree(const toolgt::Value& v) {
    if (v.is<toolgt::Null>()) return json{{"null", true}};
    if (auto* b = v.get_if<bool>()) return json{{"b", *b}};
    if (auto* n = v.get_if<toolgt::Number>()) return json{{"n", n->lexeme}};
    if (auto* s = v.get_if<std::string>()) return json{{"s", *s}};
    if (auto* l = v.get_if<toolgt::List>()) {
        json items = json::array();
        for (const auto& x : *l) items.push_back(tree(x));
        return json{{"list", items}};
    }
    if (auto* m = v.get_if<toolgt::Mapping>()) {
        json entries = json::array();
        for (const auto& e : *m) entries.push_back(json::array({e.key, tree(e.value)}));
        return json{{"map", entries}};
    }
    return tree(v.as<toolgt::FunctionCall>());
}

inline json tree(const toolgt::CallList& calls) {
    json out = json::array();
    for (const auto& c : calls.calls) out.push_back(tree(c));
    return out;
}

}  // namespace reference
