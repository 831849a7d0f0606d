#pragma once

// Random call lists, tool schemas and mutations for property tests.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "toolgt/call_grammar.hpp"
#include "toolgt/equivalence.hpp"
#include "toolgt/tool_registry.hpp"

namespace gen {

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
inline bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

template <typename T>
const T& choose(Rng& rng, const std::vector<T>& items) {
    return items[pick(rng, items.size())];
}

struct Options {
    std::size_t max_calls = 4;
    std::size_t max_args = 4;
    // Maximum call depth, counting the top-level call as 1.
    std::size_t max_depth = 3;
    bool spaced_names = true;
};

inline std::string identifier(Rng& rng) {
    static const std::vector<std::string> stems = {"city", "query", "limit", "unit", "lang", "x", "trend_type",
                                                   "country", "page", "verbose", "id", "max-results", "geo.lat",
                                                   "_private", "ÿname"};
    std::string s = choose(rng, stems);
    if (chance(rng, 0.3)) s += std::to_string(pick(rng, 100));
    return s;
}

inline std::string function_name(Rng& rng, bool spaced) {
    static const std::vector<std::string> words = {"get", "Market", "Trends", "API", "search", "weather",
                                                   "convert", "Flight", "lookup_v2", "cve.search", "stock-price"};
    std::string s = choose(rng, words);
    const std::size_t extra = spaced ? pick(rng, 3) : 0;
    for (std::size_t i = 0; i < extra; ++i) s += " " + choose(rng, words);
    if (!spaced && chance(rng, 0.3)) s += "_" + std::to_string(pick(rng, 10));
    return s;
}

inline std::string text(Rng& rng) {
    static const std::vector<std::string> pieces = {"us",   "New York", "MARKET_INDEXES", "",       "a\"b", "c:\\dir",
                                                    "x'y",  "line\nbreak", "tab\there",   "\x01",   "é",    "日本",
                                                    "{}[]()", "a, b=c", " padded "};
    std::string s;
    const std::size_t n = 1 + pick(rng, 2);
    for (std::size_t i = 0; i < n; ++i) s += choose(rng, pieces);
    return s;
}

inline toolgt::Number number(Rng& rng) {
    static const std::vector<std::string> lexemes = {"0",   "42",   "-3",    "2.5",      "1e10",  "-0.001",
                                                     "6.02E+23", "100", "3.14159", "+7", "1.0", "-12e-3"};
    return toolgt::Number{choose(rng, lexemes)};
}

inline toolgt::FunctionCall call(Rng& rng, const Options& opt, std::size_t depth_left, bool top);

inline toolgt::Value value(Rng& rng, const Options& opt, std::size_t call_depth_left, int container_depth) {
    const std::size_t kinds = container_depth < 2 ? 8 : 5;
    switch (pick(rng, kinds + (call_depth_left > 0 ? 1 : 0))) {
        case 0: return toolgt::Value(toolgt::Null{});
        case 1: return toolgt::Value(chance(rng, 0.5));
        case 2:
        case 3: return toolgt::Value(number(rng));
        case 4: return toolgt::Value(text(rng));
        case 5:
        case 6: {
            toolgt::List items;
            const std::size_t n = pick(rng, 4);
            for (std::size_t i = 0; i < n; ++i) items.push_back(value(rng, opt, call_depth_left, container_depth + 1));
            return toolgt::Value(std::move(items));
        }
        case 7: {
            toolgt::Mapping entries;
            std::set<std::string> keys;
            const std::size_t n = pick(rng, 4);
            for (std::size_t i = 0; i < n; ++i) {
                std::string k = text(rng);
                if (!keys.insert(k).second) continue;
                entries.push_back({k, value(rng, opt, call_depth_left, container_depth + 1)});
            }
            return toolgt::Value(std::move(entries));
        }
        default: return toolgt::Value(call(rng, opt, call_depth_left, false));
    }
}

// depth_left counts this call: 1 means no nested calls below it.
inline toolgt::FunctionCall call(Rng& rng, const Options& opt, std::size_t depth_left, bool top) {
    toolgt::FunctionCall c;
    c.name = top ? function_name(rng, opt.spaced_names) : function_name(rng, false);
    if (!top) std::replace(c.name.begin(), c.name.end(), ' ', '_');
    std::set<std::string> keys;
    const std::size_t n = pick(rng, opt.max_args + 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::string k = identifier(rng);
        if (!keys.insert(k).second) continue;
        c.args.push_back({k, value(rng, opt, depth_left - 1, 0)});
    }
    return c;
}

// A call whose nesting depth is exactly `depth`.
inline toolgt::FunctionCall deep_call(Rng& rng, std::size_t depth, bool top = true) {
    Options flat;
    flat.max_args = 2;
    toolgt::FunctionCall c = call(rng, flat, 1, top);
    if (depth > 1) {
        std::string key = "inner";
        while (c.find_arg(key)) key += "_";
        const std::size_t pos = pick(rng, c.args.size() + 1);
        c.args.insert(c.args.begin() + static_cast<std::ptrdiff_t>(pos),
                      toolgt::Argument{key, toolgt::Value(deep_call(rng, depth - 1, false))});
    }
    return c;
}

inline toolgt::CallList call_list(Rng& rng, const Options& opt) {
    toolgt::CallList cl;
    const std::size_t n = pick(rng, opt.max_calls + 1);
    for (std::size_t i = 0; i < n; ++i) cl.calls.push_back(call(rng, opt, 1 + pick(rng, opt.max_depth), true));
    return cl;
}

// Every call name (nested included) becomes a tool whose parameters are the
// union of the keys it is used with, all optional and without defaults.
inline void cover(const toolgt::Value& v, std::vector<toolgt::ToolSpec>& tools);

inline void cover(const toolgt::FunctionCall& c, std::vector<toolgt::ToolSpec>& tools) {
    auto it = std::find_if(tools.begin(), tools.end(), [&](const toolgt::ToolSpec& t) { return t.name == c.name; });
    if (it == tools.end()) {
        tools.push_back(toolgt::ToolSpec{c.name, "generated", {}, "object"});
        it = tools.end() - 1;
    }
    for (const auto& a : c.args) {
        if (!it->find_param(a.key)) {
            toolgt::ParamSpec p;
            p.name = a.key;
            it->params.push_back(p);
        }
        cover(a.value, tools);
    }
}

inline void cover(const toolgt::Value& v, std::vector<toolgt::ToolSpec>& tools) {
    if (const auto* c = v.get_if<toolgt::FunctionCall>()) {
        cover(*c, tools);
    } else if (const auto* l = v.get_if<toolgt::List>()) {
        for (const auto& x : *l) cover(x, tools);
    } else if (const auto* m = v.get_if<toolgt::Mapping>()) {
        for (const auto& e : *m) cover(e.value, tools);
    }
}

inline toolgt::ToolSet covering_tools(const std::vector<const toolgt::CallList*>& lists) {
    std::vector<toolgt::ToolSpec> specs;
    for (const auto* cl : lists) {
        for (const auto& c : cl->calls) cover(c, specs);
    }
    toolgt::ToolSet set;
    for (auto& s : specs) set.add(std::move(s));
    return set;
}

template <typename T>
void shuffle(Rng& rng, std::vector<T>& items) {
    std::shuffle(items.begin(), items.end(), rng);
}

// Reorders calls and the arguments of every top-level call.
inline toolgt::CallList permuted(Rng& rng, toolgt::CallList cl) {
    shuffle(rng, cl.calls);
    for (auto& c : cl.calls) shuffle(rng, c.args);
    return cl;
}

// A small schema world: a few tools with required parameters and optional
// parameters that declare defaults. Values come from tiny domains so that
// distinct calls frequently collide, which exercises the matcher.
struct World {
    toolgt::ToolSet tools;

    static toolgt::Value small_value(Rng& rng) {
        switch (pick(rng, 4)) {
            case 0: return toolgt::Value(toolgt::Number{choose(rng, std::vector<std::string>{"1", "2", "1.0"})});
            case 1: return toolgt::Value(choose(rng, std::vector<std::string>{"us", "US", "en"}));
            case 2: return toolgt::Value(chance(rng, 0.5));
            default: return toolgt::Value(toolgt::Null{});
        }
    }

    static World make(Rng& rng, std::size_t n_tools = 3) {
        World w;
        for (std::size_t t = 0; t < n_tools; ++t) {
            toolgt::ToolSpec spec;
            spec.name = t == 0 ? "Market Trends API" : "tool_" + std::to_string(t);
            spec.description = "generated";
            const std::size_t n_params = 2 + pick(rng, 3);
            for (std::size_t p = 0; p < n_params; ++p) {
                toolgt::ParamSpec param;
                param.name = "p" + std::to_string(p);
                param.required = p == 0 || chance(rng, 0.3);
                if (!param.required && chance(rng, 0.7)) param.default_value = small_value(rng);
                spec.params.push_back(std::move(param));
            }
            w.tools.add(std::move(spec));
        }
        return w;
    }

    toolgt::FunctionCall call(Rng& rng) const {
        const auto& spec = tools.tools()[pick(rng, tools.size())];
        toolgt::FunctionCall c;
        c.name = spec.name;
        for (const auto& p : spec.params) {
            if (p.required || chance(rng, 0.5)) c.args.push_back({p.name, small_value(rng)});
        }
        return c;
    }

    toolgt::CallList list(Rng& rng, std::size_t max_calls) const {
        toolgt::CallList cl;
        const std::size_t n = 1 + pick(rng, max_calls);
        for (std::size_t i = 0; i < n; ++i) cl.calls.push_back(call(rng));
        return cl;
    }

    // One random edit that may or may not preserve equivalence.
    toolgt::FunctionCall mutate(Rng& rng, toolgt::FunctionCall c) const {
        const auto* spec = tools.find(c.name);
        switch (pick(rng, 5)) {
            case 0:
                if (!c.args.empty()) c.args.erase(c.args.begin() + static_cast<std::ptrdiff_t>(pick(rng, c.args.size())));
                break;
            case 1:
                for (const auto& p : spec->params) {
                    if (c.find_arg(p.name)) continue;
                    c.args.push_back({p.name, p.default_value && chance(rng, 0.7) ? *p.default_value : small_value(rng)});
                    break;
                }
                break;
            case 2:
                if (!c.args.empty()) c.args[pick(rng, c.args.size())].value = small_value(rng);
                break;
            case 3: c.name = tools.tools()[pick(rng, tools.size())].name; break;
            default: shuffle(rng, c.args);
        }
        return c;
    }

    toolgt::CallList mutate(Rng& rng, toolgt::CallList cl, double p_edit) const {
        for (auto& c : cl.calls) {
            if (chance(rng, p_edit)) c = mutate(rng, c);
        }
        if (chance(rng, 0.05) && !cl.calls.empty()) cl.calls.pop_back();
        if (chance(rng, 0.05)) cl.calls.push_back(call(rng));
        shuffle(rng, cl.calls);
        return cl;
    }
};

// Reference matcher: tries every assignment of candidate calls to
// ground-truth calls.
inline bool brute_force_match(const toolgt::CallList& gt, const toolgt::CallList& cand, const toolgt::ToolSet& tools,
                              const toolgt::MatchPolicy& policy = {}) {
    if (gt.size() != cand.size()) return false;
    std::vector<std::size_t> perm(cand.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    do {
        bool all = true;
        for (std::size_t i = 0; i < perm.size() && all; ++i) {
            all = toolgt::calls_equivalent(gt.calls[i], cand.calls[perm[i]], tools, policy);
        }
        if (all) return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
}

}  // namespace gen
