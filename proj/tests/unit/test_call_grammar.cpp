#include <gtest/gtest.h>

#include <random>
#include <string>

#include "generators.hpp"
#include "reference_parser.hpp"
#include "toolgt/call_grammar.hpp"

using namespace toolgt;
using nlohmann::json;

namespace {

std::size_t error_offset(std::string_view text) {
    try {
        parse_call_list(text);
    } catch (const SyntaxError& e) {
        return e.offset();
    }
    ADD_FAILURE() << "expected a syntax error for: " << text;
    return std::string::npos;
}

}  // namespace

TEST(CallGrammar, MarketTrendsExpression) {
    const auto cl = parse_call_list(R"([Market Trends API(trend_type="MARKET_INDEXES", country="us")])");
    ASSERT_EQ(cl.size(), 1u);
    const auto& call = cl.calls[0];
    EXPECT_EQ(call.name, "Market Trends API");
    ASSERT_EQ(call.args.size(), 2u);
    EXPECT_EQ(call.args[0].key, "trend_type");
    EXPECT_EQ(call.args[0].value, Value("MARKET_INDEXES"));
    EXPECT_EQ(call.args[1].key, "country");
    EXPECT_EQ(call.args[1].value, Value("us"));
}

TEST(CallGrammar, EmptyList) {
    EXPECT_TRUE(parse_call_list("[]").empty());
    EXPECT_TRUE(parse_call_list("  [ ]  ").empty());
    EXPECT_TRUE(parse_call_list("").empty());
    EXPECT_TRUE(parse_call_list(" \n").empty());
    EXPECT_EQ(render_call_list(CallList{}), "[]");
}

TEST(CallGrammar, NestedValuesMatchHandTree) {
    const auto cl = parse_call_list(R"([f(a=[1, 2.5], b=g(x=true), c={"k": null})])");
    const json expected = json::parse(R"([
        {"call": "f", "args": [
            ["a", {"list": [{"n": "1"}, {"n": "2.5"}]}],
            ["b", {"call": "g", "args": [["x", {"b": true}]]}],
            ["c", {"map": [["k", {"null": true}]]}]
        ]}
    ])");
    EXPECT_EQ(reference::tree(cl), expected);
    EXPECT_EQ(reference::parse(R"([f(a=[1, 2.5], b=g(x=true), c={"k": null})])"), expected);
    EXPECT_EQ(call_depth(cl.calls[0]), 2u);
}

TEST(CallGrammar, RenderIsCanonical) {
    FunctionCall f{"f", {{"a", Value(Number{"1"})}, {"b", Value("x")}}};
    EXPECT_EQ(render_call_list(CallList{{f}}), R"([f(a=1, b="x")])");

    const auto cl = parse_call_list(R"(f(a='it\'s', b=true, c=null, d=False, e=None,))");
    EXPECT_EQ(render_call_list(parse_call_list("[f(a=true, b=null, c=False)]")), "[f(a=True, b=None, c=False)]");
    EXPECT_EQ(cl.calls[0].args.size(), 5u);
}

TEST(CallGrammar, StringEscapes) {
    const auto cl = parse_call_list(R"([f(a="q\"b\\n\n\té\x41\/", b='single "inner"', c="\q")])");
    const auto& args = cl.calls[0].args;
    EXPECT_EQ(args[0].value, Value("q\"b\\n\n\té" "A/"));
    EXPECT_EQ(args[1].value, Value("single \"inner\""));
    EXPECT_EQ(args[2].value, Value("\\q"));
    EXPECT_EQ(render_value(Value("a\"b\\c\n\x01")), R"("a\"b\\c\n\u0001")");
    EXPECT_EQ(parse_call_list(render_call_list(cl)), cl);
}

TEST(CallGrammar, SurrogatePairs) {
    const auto cl = parse_call_list(R"([f(a="\ud83d\ude00", b="\u00e9")])");
    EXPECT_EQ(cl.calls[0].args[1].value, Value("\xC3\xA9"));
    EXPECT_EQ(cl.calls[0].args[0].value, Value("\xF0\x9F\x98\x80"));
}

TEST(CallGrammar, NumbersKeepLexeme) {
    const auto cl = parse_call_list("[f(a=1.50, b=-0, c=6.02E+23, d=+7, e=.5, f=5.)]");
    std::vector<std::string> lexemes;
    for (const auto& a : cl.calls[0].args) lexemes.push_back(a.value.as<Number>().lexeme);
    EXPECT_EQ(lexemes, (std::vector<std::string>{"1.50", "-0", "6.02E+23", "+7", ".5", "5."}));
    EXPECT_TRUE(Number{"-0"}.is_integer());
    EXPECT_FALSE(Number{"1.50"}.is_integer());
    EXPECT_FALSE(Number{"1e3"}.is_integer());
    EXPECT_EQ(render_call_list(cl), "[f(a=1.50, b=-0, c=6.02E+23, d=+7, e=.5, f=5.)]");
}

TEST(CallGrammar, UnbracketedAndMultiple) {
    const auto cl = parse_call_list(" f(a=1), get weather (city=\"Paris\") ");
    ASSERT_EQ(cl.size(), 2u);
    EXPECT_EQ(cl.calls[1].name, "get weather");
    EXPECT_EQ(render_call_list(cl), R"([f(a=1), get weather(city="Paris")])");
}

TEST(CallGrammar, ErrorsCarryOffsets) {
    EXPECT_EQ(error_offset("[f(1)]"), 3u);
    EXPECT_EQ(error_offset("[f(a=1, a=2)]"), 8u);
    EXPECT_EQ(error_offset("[f(a=1)"), 7u);
    EXPECT_EQ(error_offset("[f(a=1)] trailing"), 9u);
    EXPECT_EQ(error_offset("[f(a=1+2)]"), 6u);
    EXPECT_EQ(error_offset("[(a=1)]"), 1u);
    EXPECT_EQ(error_offset(R"([f(a="open)])"), 5u);
    EXPECT_EQ(error_offset("[f(a=[1, 2)]"), 10u);
    EXPECT_EQ(error_offset("[f(a=foo)]"), 5u);
    EXPECT_EQ(error_offset(R"([f(a={"k": 1, "k": 2})])"), 14u);

    try {
        parse_call_list("[f(1)]");
    } catch (const SyntaxError& e) {
        EXPECT_NE(e.expected().find("positional"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
    }
}

TEST(CallGrammar, RoundTripGenerated) {
    gen::Rng rng(20241);
    gen::Options opt;
    opt.max_depth = 5;
    for (int i = 0; i < 1000; ++i) {
        const CallList original = gen::call_list(rng, opt);
        const std::string text = render_call_list(original);
        const CallList parsed = parse_call_list(text);
        ASSERT_EQ(parsed, original) << text;
        ASSERT_EQ(render_call_list(parsed), text);
        ASSERT_EQ(reference::parse(text), reference::tree(original)) << text;
    }
}

TEST(CallGrammar, DepthPreserved) {
    gen::Rng rng(7);
    for (std::size_t k = 1; k <= 8; ++k) {
        const FunctionCall deep = gen::deep_call(rng, k);
        ASSERT_EQ(call_depth(deep), k);
        const auto cl = parse_call_list(render_call_list(CallList{{deep}}));
        EXPECT_EQ(call_depth(cl.calls[0]), k);
    }
}

TEST(CallGrammar, PathologicalNestingIsAnError) {
    const std::string deep = "[f(a=" + std::string(5000, '[') + std::string(5000, ']') + ")]";
    EXPECT_THROW(parse_call_list(deep), SyntaxError);
}

// Random edits of valid expressions: both parsers must agree on acceptance
// and on the resulting tree, and the main parser must never fail any other
// way.
TEST(CallGrammar, DifferentialFuzz) {
    gen::Rng rng(99);
    gen::Options opt;
    static const std::string alphabet = "()[]{},=:\"'\\ ab1.-+eTN_x\n";
    int accepted = 0;
    int rejected = 0;
    for (int i = 0; i < 4000; ++i) {
        std::string text = render_call_list(gen::call_list(rng, opt));
        const std::size_t edits = 1 + gen::pick(rng, 3);
        for (std::size_t e = 0; e < edits && !text.empty(); ++e) {
            const std::size_t pos = gen::pick(rng, text.size());
            switch (gen::pick(rng, 3)) {
                case 0: text.erase(pos, 1); break;
                case 1: text.insert(pos, 1, alphabet[gen::pick(rng, alphabet.size())]); break;
                default: text[pos] = alphabet[gen::pick(rng, alphabet.size())];
            }
        }
        const auto ref = reference::parse(text);
        try {
            const auto cl = parse_call_list(text);
            ++accepted;
            ASSERT_TRUE(ref.has_value()) << text;
            ASSERT_EQ(reference::tree(cl), *ref) << text;
        } catch (const SyntaxError& e) {
            ++rejected;
            ASSERT_FALSE(ref.has_value()) << text;
            ASSERT_LE(e.offset(), text.size());
        }
    }
    EXPECT_GT(accepted, 100);
    EXPECT_GT(rejected, 100);
}

TEST(CallGrammar, ArbitraryBytesNeverCrash) {
    gen::Rng rng(3);
    for (int i = 0; i < 5000; ++i) {
        std::string bytes(gen::pick(rng, 64), '\0');
        for (auto& b : bytes) b = static_cast<char>(gen::pick(rng, 256));
        if (gen::chance(rng, 0.5)) bytes = "[f(a=" + bytes;
        try {
            parse_call_list(bytes);
        } catch (const SyntaxError& e) {
            ASSERT_LE(e.offset(), bytes.size());
        }
    }
}

TEST(ExtractTagged, Basics) {
    auto f = extract_tagged("<FUNCTION>[f(a=1)]</FUNCTION>", "FUNCTION");
    ASSERT_TRUE(f);
    EXPECT_EQ(f->content, "[f(a=1)]");
    EXPECT_FALSE(f->truncated);

    EXPECT_FALSE(extract_tagged("no tags at all", "THINKING"));

    auto t = extract_tagged("<THINKING>\n step one\n", "THINKING");
    ASSERT_TRUE(t);
    EXPECT_TRUE(t->truncated);
    EXPECT_EQ(t->content, "step one");

    auto first = extract_tagged("<FUNCTION>[a()]</FUNCTION><FUNCTION>[b()]</FUNCTION>", "FUNCTION");
    EXPECT_EQ(first->content, "[a()]");
}

TEST(ExtractTagged, TrainingAssistantMessage) {
    const std::string assistant =
        "<THINKING>1. The user wants market index trends in the US.\n2. Market Trends API takes trend_type and "
        "country.</THINKING>\n"
        R"(<FUNCTION>[Market Trends API(trend_type="MARKET_INDEXES", country="us")]</FUNCTION>)";
    auto f = extract_tagged(assistant, "FUNCTION");
    ASSERT_TRUE(f);
    EXPECT_EQ(f->content, R"([Market Trends API(trend_type="MARKET_INDEXES", country="us")])");
    EXPECT_EQ(trim("  x y \n"), "x y");
}
