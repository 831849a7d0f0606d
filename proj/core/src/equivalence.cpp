#include "toolgt/equivalence.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <set>

namespace toolgt {

namespace {

// A decimal literal as sign * 0.digits * 10^exponent, with no leading or
// trailing zeros in `digits`. Zero is {false, "", 0}.
struct Decimal {
    bool negative = false;
    std::string digits;
    std::int64_t exponent = 0;
    bool operator==(const Decimal&) const = default;
};

Decimal normalize(std::string_view lexeme) {
    Decimal d;
    std::size_t i = 0;
    if (i < lexeme.size() && (lexeme[i] == '+' || lexeme[i] == '-')) d.negative = lexeme[i++] == '-';

    std::string mantissa;
    std::int64_t point = -1;
    for (; i < lexeme.size() && lexeme[i] != 'e' && lexeme[i] != 'E'; ++i) {
        if (lexeme[i] == '.') {
            point = static_cast<std::int64_t>(mantissa.size());
        } else {
            mantissa.push_back(lexeme[i]);
        }
    }
    if (point < 0) point = static_cast<std::int64_t>(mantissa.size());

    std::int64_t exp10 = 0;
    if (i < lexeme.size()) {
        ++i;
        bool exp_negative = false;
        if (i < lexeme.size() && (lexeme[i] == '+' || lexeme[i] == '-')) exp_negative = lexeme[i++] == '-';
        constexpr std::int64_t kCap = std::numeric_limits<std::int64_t>::max() / 20;
        for (; i < lexeme.size(); ++i) {
            exp10 = std::min<std::int64_t>(kCap, exp10 * 10 + (lexeme[i] - '0'));
        }
        if (exp_negative) exp10 = -exp10;
    }

    const auto first = mantissa.find_first_not_of('0');
    if (first == std::string::npos) return Decimal{};
    const auto last = mantissa.find_last_not_of('0');
    d.digits = mantissa.substr(first, last - first + 1);
    d.exponent = point - static_cast<std::int64_t>(first) + exp10;
    return d;
}

bool numbers_equal(const Number& a, const Number& b, const MatchPolicy& policy) {
    if (normalize(a.lexeme) == normalize(b.lexeme)) return true;
    if (a.is_integer() && b.is_integer()) return false;
    const double x = std::strtod(a.lexeme.c_str(), nullptr);
    const double y = std::strtod(b.lexeme.c_str(), nullptr);
    if (!std::isfinite(x) || !std::isfinite(y)) return false;
    return std::fabs(x - y) <= policy.numeric_tolerance;
}

bool strings_equal(const std::string& a, const std::string& b, const MatchPolicy& policy) {
    if (!policy.case_insensitive_strings) return a == b;
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
               return std::tolower(x) == std::tolower(y);
           });
}

// Shared by value_equal (tools == nullptr) and schema-aware call comparison.
bool values_equal(const Value& a, const Value& b, const MatchPolicy& policy, const ToolSet* tools);

bool call_args_equivalent(const FunctionCall& a, const FunctionCall& b, const MatchPolicy& policy,
                          const ToolSet* tools, std::vector<std::string>* reasons) {
    auto note = [&](std::string reason) {
        if (reasons) reasons->push_back(a.name + ": " + std::move(reason));
    };
    if (a.name != b.name) {
        note("function name differs ('" + a.name + "' vs '" + b.name + "')");
        return false;
    }
    const ToolSpec* tool = tools ? tools->find(a.name) : nullptr;
    if (tools && !tool) {
        note("unknown tool '" + a.name + "'");
        return false;
    }

    // An argument present on one side only is acceptable when the schema
    // declares it optional and its value is the declared default (any value
    // under the permissive policy).
    auto one_sided_ok = [&](const Argument& arg) {
        if (!tool) return false;
        const ParamSpec* param = tool->find_param(arg.key);
        if (!param || param->required) return false;
        if (policy.permissive_optional_extras) return true;
        return param->default_value && values_equal(arg.value, *param->default_value, policy, tools);
    };

    bool ok = true;
    for (const auto& arg : a.args) {
        const Value* other = b.find_arg(arg.key);
        if (!other) {
            if (!one_sided_ok(arg)) {
                note("argument '" + arg.key + "' present on one side only and not an optional default");
                ok = false;
            }
        } else if (!values_equal(arg.value, *other, policy, tools)) {
            note("argument '" + arg.key + "' differs: " + render_value(arg.value) + " vs " + render_value(*other));
            ok = false;
        }
        if (!ok && !reasons) return false;
    }
    for (const auto& arg : b.args) {
        if (a.find_arg(arg.key)) continue;
        if (!one_sided_ok(arg)) {
            note("argument '" + arg.key + "' present on one side only and not an optional default");
            ok = false;
            if (!reasons) return false;
        }
    }
    return ok;
}

bool values_equal(const Value& a, const Value& b, const MatchPolicy& policy, const ToolSet* tools) {
    if (a.data.index() != b.data.index()) return false;

    if (const auto* x = a.get_if<Number>()) return numbers_equal(*x, b.as<Number>(), policy);
    if (const auto* x = a.get_if<std::string>()) return strings_equal(*x, b.as<std::string>(), policy);
    if (const auto* x = a.get_if<bool>()) return *x == b.as<bool>();
    if (a.is<Null>()) return true;
    if (const auto* x = a.get_if<List>()) {
        const auto& y = b.as<List>();
        if (x->size() != y.size()) return false;
        for (std::size_t i = 0; i < x->size(); ++i) {
            if (!values_equal((*x)[i], y[i], policy, tools)) return false;
        }
        return true;
    }
    if (const auto* x = a.get_if<Mapping>()) {
        const auto& y = b.as<Mapping>();
        if (x->size() != y.size()) return false;
        for (const auto& entry : *x) {
            auto it = std::find_if(y.begin(), y.end(), [&](const MappingEntry& e) { return e.key == entry.key; });
            if (it == y.end() || !values_equal(entry.value, it->value, policy, tools)) return false;
        }
        return true;
    }
    if (const auto* x = a.get_if<FunctionCall>()) {
        return call_args_equivalent(*x, b.as<FunctionCall>(), policy, tools, nullptr);
    }
    return false;
}

// Kuhn's augmenting-path bipartite matching.
bool try_augment(std::size_t row, const std::vector<std::vector<bool>>& adj, std::vector<bool>& seen,
                 std::vector<std::ptrdiff_t>& match_of_col) {
    for (std::size_t col = 0; col < adj[row].size(); ++col) {
        if (!adj[row][col] || seen[col]) continue;
        seen[col] = true;
        if (match_of_col[col] < 0 ||
            try_augment(static_cast<std::size_t>(match_of_col[col]), adj, seen, match_of_col)) {
            match_of_col[col] = static_cast<std::ptrdiff_t>(row);
            return true;
        }
    }
    return false;
}

void collect_unknown(const Value& v, const ToolSet& tools, std::set<std::string>& out);

void collect_unknown(const FunctionCall& call, const ToolSet& tools, std::set<std::string>& out) {
    if (!tools.find(call.name)) out.insert(call.name);
    for (const auto& arg : call.args) collect_unknown(arg.value, tools, out);
}

void collect_unknown(const Value& v, const ToolSet& tools, std::set<std::string>& out) {
    if (const auto* call = v.get_if<FunctionCall>()) {
        collect_unknown(*call, tools, out);
    } else if (const auto* items = v.get_if<List>()) {
        for (const auto& item : *items) collect_unknown(item, tools, out);
    } else if (const auto* entries = v.get_if<Mapping>()) {
        for (const auto& e : *entries) collect_unknown(e.value, tools, out);
    }
}

}  // namespace

void validate(const MatchPolicy& policy) {
    if (!(policy.numeric_tolerance >= 0.0)) throw ConfigError("numeric tolerance must be >= 0");
}

std::string_view to_string(MatchOutcome outcome) {
    switch (outcome) {
        case MatchOutcome::ExactMatch: return "ExactMatch";
        case MatchOutcome::AstMatch: return "AstMatch";
        case MatchOutcome::NoMatch: return "NoMatch";
    }
    return "NoMatch";
}

bool exact_match(std::string_view ground_truth, std::string_view candidate) {
    return trim(ground_truth) == trim(candidate);
}

bool value_equal(const Value& a, const Value& b, const MatchPolicy& policy) {
    return values_equal(a, b, policy, nullptr);
}

bool calls_equivalent(const FunctionCall& a, const FunctionCall& b, const ToolSet& tools,
                      const MatchPolicy& policy, std::vector<std::string>* reasons) {
    return call_args_equivalent(a, b, policy, &tools, reasons);
}

MatchVerdict ast_equivalent(const CallList& ground_truth, const CallList& candidate, const ToolSet& tools,
                            const MatchPolicy& policy) {
    validate(policy);
    MatchVerdict verdict;

    std::set<std::string> unknown;
    for (const auto& c : ground_truth.calls) collect_unknown(c, tools, unknown);
    for (const auto& c : candidate.calls) collect_unknown(c, tools, unknown);
    for (const auto& name : unknown) verdict.explanation.push_back("unknown tool '" + name + "'");

    const std::size_t n = ground_truth.size();
    if (n != candidate.size()) {
        verdict.explanation.push_back("call count differs: ground truth has " + std::to_string(n) +
                                      ", candidate has " + std::to_string(candidate.size()));
    }
    if (!verdict.explanation.empty()) return verdict;

    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            adj[i][j] = calls_equivalent(ground_truth.calls[i], candidate.calls[j], tools, policy);
        }
    }

    std::vector<std::ptrdiff_t> match_of_col(n, -1);
    std::size_t matched = 0;
    for (std::size_t row = 0; row < n; ++row) {
        std::vector<bool> seen(n, false);
        if (try_augment(row, adj, seen, match_of_col)) ++matched;
    }
    if (matched == n) {
        verdict.outcome = MatchOutcome::AstMatch;
        return verdict;
    }

    for (std::size_t i = 0; i < n; ++i) {
        const auto& gt_call = ground_truth.calls[i];
        if (std::find(adj[i].begin(), adj[i].end(), true) != adj[i].end()) continue;
        auto same_name = std::find_if(candidate.calls.begin(), candidate.calls.end(),
                                      [&](const FunctionCall& c) { return c.name == gt_call.name; });
        if (same_name == candidate.calls.end()) {
            verdict.explanation.push_back("no candidate call named '" + gt_call.name + "'");
        } else {
            calls_equivalent(gt_call, *same_name, tools, policy, &verdict.explanation);
        }
    }
    if (verdict.explanation.empty()) {
        verdict.explanation.push_back("no one-to-one pairing of ground-truth and candidate calls exists");
    }
    return verdict;
}

MatchVerdict verify(std::string_view ground_truth, std::string_view candidate, const ToolSet& tools,
                    const MatchPolicy& policy) {
    validate(policy);
    if (exact_match(ground_truth, candidate)) return MatchVerdict{MatchOutcome::ExactMatch, {}};

    CallList gt;
    CallList cand;
    try {
        gt = parse_call_list(ground_truth);
    } catch (const SyntaxError& e) {
        return MatchVerdict{MatchOutcome::NoMatch, {std::string("ground truth: ") + e.what()}};
    }
    try {
        cand = parse_call_list(candidate);
    } catch (const SyntaxError& e) {
        return MatchVerdict{MatchOutcome::NoMatch, {std::string("candidate: ") + e.what()}};
    }
    return ast_equivalent(gt, cand, tools, policy);
}

}  // namespace toolgt
