#include "toolgt/scorer.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace toolgt {

namespace {

using ojson = nlohmann::ordered_json;

ojson optional_number(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

// Averages over already-filled category scores (accuracy set, count > 0).
void fill_averages(SuiteReport& report, const SuiteConfig& config) {
    if (report.categories.empty()) return;

    double weighted_sum = 0.0;
    double total = 0.0;
    double plain_sum = 0.0;
    std::map<std::string, const CategoryScore*, std::less<>> by_name;
    for (const auto& c : report.categories) {
        weighted_sum += static_cast<double>(c.count) * c.accuracy;
        total += static_cast<double>(c.count);
        plain_sum += c.accuracy;
        by_name.emplace(c.category, &c);
    }
    report.weighted = weighted_sum / total;
    report.unweighted = plain_sum / static_cast<double>(report.categories.size());

    double group_sum = 0.0;
    std::size_t groups_scored = 0;
    for (const auto& [name, members] : config.groups) {
        GroupScore g{name, std::nullopt};
        double s = 0.0;
        double n = 0.0;
        for (const auto& m : members) {
            auto it = by_name.find(m);
            if (it == by_name.end()) continue;
            s += static_cast<double>(it->second->count) * it->second->accuracy;
            n += static_cast<double>(it->second->count);
        }
        if (n > 0.0) {
            g.average = s / n;
            group_sum += *g.average;
            ++groups_scored;
        }
        report.groups.push_back(std::move(g));
    }
    if (groups_scored > 0) report.grouped_overall = group_sum / static_cast<double>(groups_scored);
}

bool has_nonempty_calls(std::string_view output) {
    const auto section = extract_tagged(output, "FUNCTION");
    const std::string_view text = section ? std::string_view(section->content) : output;
    try {
        return !parse_call_list(text).empty();
    } catch (const SyntaxError&) {
        return false;
    }
}

}  // namespace

std::string_view to_string(CaseKind kind) {
    switch (kind) {
        case CaseKind::Call: return "call";
        case CaseKind::RelevanceExpectCall: return "relevance-expect-call";
        case CaseKind::RelevanceExpectNoCall: return "relevance-expect-no-call";
    }
    return "call";
}

std::optional<CaseKind> case_kind_from_string(std::string_view text) {
    if (text == "call") return CaseKind::Call;
    if (text == "relevance-expect-call") return CaseKind::RelevanceExpectCall;
    if (text == "relevance-expect-no-call") return CaseKind::RelevanceExpectNoCall;
    return std::nullopt;
}

std::vector<EvalCase> load_cases(std::istream& jsonl) {
    std::vector<EvalCase> cases;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(jsonl, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string where = "cases line " + std::to_string(line_no) + ": ";
        try {
            const auto j = ojson::parse(line);
            EvalCase c;
            c.id = j.at("id").is_string() ? j["id"].get<std::string>() : j["id"].dump();
            c.category = j.at("category").get<std::string>();
            if (j.contains("kind")) {
                auto kind = case_kind_from_string(j["kind"].get<std::string>());
                if (!kind) throw FormatError(where + "unknown kind " + j["kind"].dump());
                c.kind = *kind;
            }
            if (j.contains("tools") && !j["tools"].is_null()) c.tools = tools_from_json(j["tools"]);
            if (j.contains("gold") && !j["gold"].is_null()) c.gold = parse_call_list(j["gold"].get<std::string>());
            if (j.contains("output") && !j["output"].is_null()) c.output = j["output"].get<std::string>();
            if (c.kind == CaseKind::Call && (!c.gold || c.gold->empty())) {
                throw FormatError(where + "call case '" + c.id + "' has no gold call list");
            }
            cases.push_back(std::move(c));
        } catch (const ojson::exception& e) {
            throw FormatError(where + e.what());
        } catch (const SyntaxError& e) {
            throw FormatError(where + "gold: " + e.what());
        } catch (const FormatError& e) {
            const std::string msg = e.what();
            throw FormatError(msg.starts_with("cases line") ? msg : where + msg);
        }
    }
    return cases;
}

std::size_t attach_transcripts(std::vector<EvalCase>& cases, std::istream& jsonl) {
    std::unordered_map<std::string, std::string> outputs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(jsonl, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            const auto j = ojson::parse(line);
            std::string id = j.at("id").is_string() ? j["id"].get<std::string>() : j["id"].dump();
            outputs.insert_or_assign(std::move(id), j.at("output").get<std::string>());
        } catch (const ojson::exception& e) {
            throw FormatError("transcripts line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    std::size_t matched = 0;
    for (auto& c : cases) {
        auto it = outputs.find(c.id);
        if (it == outputs.end()) continue;
        c.output = it->second;
        ++matched;
    }
    return matched;
}

std::optional<std::size_t> SuiteConfig::count_of(std::string_view category) const {
    for (const auto& [name, n] : counts) {
        if (name == category) return n;
    }
    return std::nullopt;
}

SuiteConfig suite_config_from_json(const ojson& json) {
    try {
        SuiteConfig config;
        if (json.contains("suite")) config.suite_id = json["suite"].get<std::string>();
        std::set<std::string> seen;
        for (const auto& [name, n] : json.at("counts").items()) {
            if (name.starts_with('_')) continue;
            if (!n.is_number_integer() || n.get<long long>() <= 0) {
                throw ConfigError("suite config: count for '" + name + "' must be a positive integer");
            }
            config.counts.emplace_back(name, n.get<std::size_t>());
            seen.insert(name);
        }
        std::set<std::string> grouped;
        if (json.contains("groups")) {
            for (const auto& [name, members] : json["groups"].items()) {
                if (name.starts_with('_')) continue;
                std::vector<std::string> list;
                for (const auto& m : members) {
                    auto cat = m.get<std::string>();
                    if (!seen.contains(cat)) {
                        throw ConfigError("suite config: group '" + name + "' names unknown category '" + cat + "'");
                    }
                    if (!grouped.insert(cat).second) {
                        throw ConfigError("suite config: category '" + cat + "' is in more than one group");
                    }
                    list.push_back(std::move(cat));
                }
                config.groups.emplace_back(name, std::move(list));
            }
        }
        return config;
    } catch (const ojson::exception& e) {
        throw ConfigError(std::string("suite config: ") + e.what());
    }
}

SuiteConfig load_suite_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read suite config " + path.string());
    try {
        return suite_config_from_json(ojson::parse(in));
    } catch (const ojson::exception& e) {
        throw ConfigError("suite config " + path.string() + ": " + e.what());
    }
}

bool score_case(const EvalCase& c, const MatchPolicy& policy) {
    if (!c.output) return false;
    switch (c.kind) {
        case CaseKind::RelevanceExpectNoCall:
            return !has_nonempty_calls(*c.output);
        case CaseKind::RelevanceExpectCall:
            return has_nonempty_calls(*c.output);
        case CaseKind::Call:
            break;
    }
    if (!c.gold) return false;
    const auto section = extract_tagged(*c.output, "FUNCTION");
    const std::string_view text = section ? std::string_view(section->content) : std::string_view(*c.output);
    CallList candidate;
    try {
        candidate = parse_call_list(text);
    } catch (const SyntaxError&) {
        return false;
    }
    return ast_equivalent(*c.gold, candidate, c.tools, policy).matched();
}

SuiteReport aggregate(const std::vector<CaseResult>& results, const SuiteConfig& config) {
    std::map<std::string, std::size_t, std::less<>> correct;
    std::map<std::string, std::size_t, std::less<>> seen;
    for (const auto& r : results) {
        if (!config.count_of(r.category)) throw ConfigError("unknown category '" + r.category + "'");
        ++seen[r.category];
        if (r.correct) ++correct[r.category];
    }

    SuiteReport report;
    report.suite_id = config.suite_id;
    for (const auto& [name, count] : config.counts) {
        auto it = seen.find(name);
        if (it == seen.end()) continue;
        if (it->second > count) {
            throw ConfigError("category '" + name + "' has " + std::to_string(it->second) +
                              " results but a configured count of " + std::to_string(count));
        }
        const std::size_t ok = correct[name];
        report.categories.push_back(
            {name, count, ok, 100.0 * static_cast<double>(ok) / static_cast<double>(count)});
    }
    fill_averages(report, config);
    return report;
}

SuiteReport aggregate_accuracies(const std::vector<std::pair<std::string, double>>& accuracies,
                                 const SuiteConfig& config) {
    std::map<std::string, double, std::less<>> acc;
    for (const auto& [name, value] : accuracies) {
        if (!config.count_of(name)) throw ConfigError("unknown category '" + name + "'");
        if (!(value >= 0.0 && value <= 100.0)) {
            throw ConfigError("accuracy for '" + name + "' must be within [0, 100]");
        }
        acc[name] = value;
    }
    SuiteReport report;
    report.suite_id = config.suite_id;
    for (const auto& [name, count] : config.counts) {
        auto it = acc.find(name);
        if (it == acc.end()) continue;
        report.categories.push_back({name, count, std::nullopt, it->second});
    }
    fill_averages(report, config);
    return report;
}

std::vector<CaseResult> filter_subset(const std::vector<CaseResult>& results,
                                      const std::function<bool(std::string_view)>& keep_category) {
    std::vector<CaseResult> out;
    if (!keep_category) return out;
    std::copy_if(results.begin(), results.end(), std::back_inserter(out),
                 [&](const CaseResult& r) { return keep_category(r.category); });
    return out;
}

ojson to_json(const SuiteReport& report) {
    ojson categories = ojson::array();
    for (const auto& c : report.categories) {
        categories.push_back(
            {{"category", c.category},
             {"count", c.count},
             {"correct", c.correct ? ojson(*c.correct) : ojson(nullptr)},
             {"accuracy", c.accuracy}});
    }
    ojson groups = ojson::array();
    for (const auto& g : report.groups) groups.push_back({{"group", g.name}, {"average", optional_number(g.average)}});
    return {
        {"suite", report.suite_id},
        {"categories", std::move(categories)},
        {"groups", std::move(groups)},
        {"weighted_average", optional_number(report.weighted)},
        {"grouped_overall", optional_number(report.grouped_overall)},
        {"unweighted_average", optional_number(report.unweighted)},
    };
}

std::string format_table(const SuiteReport& report) {
    std::size_t width = 20;
    for (const auto& c : report.categories) width = std::max(width, c.category.size() + 2);
    for (const auto& g : report.groups) width = std::max(width, g.name.size() + 8);

    std::ostringstream out;
    out << std::fixed << std::setprecision(2);
    auto row = [&](std::string_view label, const std::optional<double>& value, std::string_view extra = {}) {
        out << std::left << std::setw(static_cast<int>(width)) << label << std::right << std::setw(8);
        if (value) {
            out << *value;
        } else {
            out << "-";
        }
        if (!extra.empty()) out << "  " << extra;
        out << '\n';
    };

    out << "suite: " << report.suite_id << '\n';
    if (report.categories.empty()) {
        out << "(no scored categories)\n";
        return out.str();
    }
    for (const auto& c : report.categories) {
        const std::string extra = c.correct ? std::to_string(*c.correct) + "/" + std::to_string(c.count)
                                            : "n=" + std::to_string(c.count);
        row(c.category, c.accuracy, extra);
    }
    for (const auto& g : report.groups) row("group " + g.name, g.average);
    row("weighted average", report.weighted);
    if (!report.groups.empty()) row("grouped overall", report.grouped_overall);
    row("unweighted average", report.unweighted);
    return out.str();
}

}  // namespace toolgt
