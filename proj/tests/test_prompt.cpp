#include <gtest/gtest.h>

#include <functional>
#include <random>
#include <set>

#include "lexclass/error.hpp"
#include "lexclass/prompt.hpp"
#include "lexclass/tokenizer.hpp"
#include "support.hpp"

using namespace lexclass;
using lexclass::support::broad13;
using lexclass::support::broad15;
using lexclass::support::fine279;
using lexclass::support::template_file;

namespace {

const LabelOntology& fine263() {
    static const LabelOntology o = LabelOntology::load(support::data("ontologies/fine263.json"));
    return o;
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected lexclass::Error";
    return ErrorCode::kIo;
}

}  // namespace

TEST(Template, FineNumericTemplateCarriesTheFiveExamples) {
    const auto t = PromptTemplate::load(template_file("scdb_fine_numeric.txt"));
    EXPECT_EQ(t.answer_format, AnswerFormat::kCategoryNumber);
    EXPECT_EQ(t.label_block_style, LabelBlockStyle::kNumberedNames);
    ASSERT_EQ(t.fewshot.size(), 5u);
    std::vector<LabelId> labels;
    for (const auto& ex : t.fewshot) labels.push_back(ex.label);
    EXPECT_EQ(labels, (std::vector<LabelId>{115, 120, 259, 226, 66}));
    EXPECT_NO_THROW(check_compatible(t, fine279()));
    EXPECT_NO_THROW(check_compatible(t, fine263()));
}

TEST(Template, BroadNumericExampleOutsideThirteenLabels) {
    const auto t = PromptTemplate::load(template_file("scdb_broad_numeric.txt"));
    EXPECT_NO_THROW(check_compatible(t, broad15()));
    EXPECT_EQ(code_of([&] { check_compatible(t, broad13()); }), ErrorCode::kOutOfRange);
}

TEST(Template, RejectsUnknownPlaceholdersAndSections) {
    EXPECT_EQ(code_of([] { PromptTemplate::parse("[[user]]\n{opinion} {mystery}\n"); }), ErrorCode::kParse);
    EXPECT_EQ(code_of([] { PromptTemplate::parse("[[system]]\nonly system\n"); }), ErrorCode::kParse);
    EXPECT_EQ(code_of([] { PromptTemplate::parse("[[user]]\nx\n[[bogus]]\ny\n"); }), ErrorCode::kParse);
    EXPECT_EQ(code_of([] { PromptTemplate::parse("[[options]]\nexcerpt_budget = 0\n[[user]]\nx\n"); }), ErrorCode::kParse);
}

TEST(Template, SubstitutionIsSinglePass) {
    const auto t = PromptTemplate::parse("[[user]]\n{opinion}\n");
    const auto p = build_prompt(t, broad15(), "Text mentioning {label_block} literally.", ChunkPlan{});
    EXPECT_NE(p.user.find("{label_block}"), std::string::npos);
}

TEST(Prompt, NumericPromptLayout) {
    const auto t = PromptTemplate::load(template_file("scdb_fine_numeric.txt"));
    const auto p = build_prompt(t, fine279(), "No. 15-001.\n\nThe statute is void.", ChunkPlan{});
    EXPECT_NE(p.user.find("one of the 279 known legal categories"), std::string::npos);
    EXPECT_NE(p.user.find("(e.g., 0-278)"), std::string::npos);
    EXPECT_NE(p.user.find("0: Search Standards,\n\n1: Seizure Standards,"), std::string::npos);
    EXPECT_NE(p.user.find("Category: (115)"), std::string::npos);
    EXPECT_NE(p.user.find("--- Opinion Start ---\nNo. 15-001.\n\nThe statute is void.\n--- Opinion End ---"),
              std::string::npos);
    EXPECT_EQ(p.user.find("{"), std::string::npos);
}

TEST(Prompt, ExcerptIsBoundedByTheChunkPlan) {
    const auto t = PromptTemplate::parse("[[user]]\n{opinion}\n");
    std::string text;
    for (int i = 0; i < 100; ++i) text += "word ";
    const auto p = build_prompt(t, broad15(), text, ChunkPlan{ChunkStrategy::kTruncate, 10, 0, 5000});
    EXPECT_EQ(count_tokens(p.user), 10u + count_tokens("--- Opinion Start ---") + count_tokens("--- Opinion End ---"));
}

TEST(Prompt, GlossLabelBlock) {
    const auto block = render_label_block(broad15(), LabelBlockStyle::kNamesWithGlosses, {6, 0});
    EXPECT_EQ(block.rfind("- Unions: ", 0), 0u);
    EXPECT_NE(block.find("\n\n- Criminal Procedure: "), std::string::npos);
}

TEST(Prompt, FewshotSelectionIsSeededAndCapped) {
    const auto corpus = load_corpus(support::fixture("mini15.jsonl"), CorpusFormat::kJsonl);
    const auto a = select_fewshot(corpus, Level::kBroad, 5, 42, 1, 50);
    const auto b = select_fewshot(corpus, Level::kBroad, 5, 42, 1, 50);
    ASSERT_EQ(a.size(), 5u);
    std::set<LabelId> labels;
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].excerpt, b[i].excerpt);
        EXPECT_LE(count_tokens(a[i].excerpt), 50u);
        labels.insert(a[i].label);
    }
    EXPECT_EQ(labels.size(), 5u);
    EXPECT_THROW(select_fewshot(corpus, Level::kBroad, 16, 1, 1, 50), Error);  // only 15 distinct labels
    EXPECT_NO_THROW(select_fewshot(corpus, Level::kBroad, 16, 1, 0, 50));
}

TEST(Parser, FewShotExampleAnswerStrings) {
    for (int id : {115, 120, 259, 226, 66}) {
        const auto r = parse_response("Category: (" + std::to_string(id) + ")", fine279(), AnswerFormat::kCategoryNumber);
        ASSERT_TRUE(r.ok());
        EXPECT_EQ(r.parsed->label, id);
        EXPECT_EQ(r.parsed->method, ParseMethod::kParenthesizedNumber);
    }
}

TEST(Parser, RoundTripsEveryLabelInBothFormats) {
    for (const auto* o : {&broad13(), &broad15(), &fine263(), &fine279()}) {
        for (const auto& l : o->labels()) {
            for (auto format : {AnswerFormat::kCategoryNumber, AnswerFormat::kCategoryName}) {
                const auto r = parse_response(render_answer(*o, l.id, format), *o, format);
                ASSERT_TRUE(r.ok()) << l.name;
                EXPECT_EQ(r.parsed->label, l.id) << l.name;
            }
        }
    }
}

TEST(Parser, PrecedenceAndFailures) {
    const auto& o = broad15();
    auto label = [&](std::string_view s) {
        const auto r = parse_response(s, o, AnswerFormat::kCategoryNumber);
        return r.ok() ? std::optional<LabelId>(r.parsed->label) : std::nullopt;
    };
    EXPECT_EQ(label("The answer is (3) because of 1 precedent"), 3);
    EXPECT_EQ(label("  7 "), 7);
    EXPECT_EQ(label("Category: Civil Rights"), 1);
    EXPECT_EQ(label("**unions.**"), 6);
    EXPECT_EQ(label("<think>maybe (2) or (4)</think>Category: (5)"), 5);
    EXPECT_EQ(label("(3) (3)"), 3);

    EXPECT_EQ(parse_response("(3) or (4)", o, AnswerFormat::kCategoryNumber).failure, ParseFailure::kMultipleCandidates);
    EXPECT_EQ(parse_response("3 or 4", o, AnswerFormat::kCategoryNumber).failure, ParseFailure::kMultipleCandidates);
    EXPECT_EQ(parse_response("Category: (15)", o, AnswerFormat::kCategoryNumber).failure, ParseFailure::kOutOfRange);
    EXPECT_EQ(parse_response("(-1)", o, AnswerFormat::kCategoryNumber).failure, ParseFailure::kOutOfRange);
    EXPECT_EQ(parse_response("99999999999999999999", o, AnswerFormat::kCategoryNumber).failure,
              ParseFailure::kOutOfRange);
    EXPECT_EQ(parse_response("I cannot tell.", o, AnswerFormat::kCategoryName).failure, ParseFailure::kNoParse);
    EXPECT_EQ(parse_response("", o, AnswerFormat::kCategoryName).failure, ParseFailure::kNoParse);
    EXPECT_EQ(parse_response("Section 1983 claim", o, AnswerFormat::kCategoryNumber).failure, ParseFailure::kOutOfRange);
    EXPECT_EQ(parse_response("best guess: 12", o, AnswerFormat::kCategoryNumber).parsed->method, ParseMethod::kBareNumber);
}

TEST(Parser, FuzzyNamesOnlyWhenEnabled) {
    const auto& o = broad15();
    EXPECT_FALSE(parse_response("Civil Rigths", o, AnswerFormat::kCategoryName).ok());
    ParseOptions fuzzy;
    fuzzy.fuzzy_names = true;
    const auto r = parse_response("Civil Rigths", o, AnswerFormat::kCategoryName, fuzzy);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r.parsed->label, 1);
    EXPECT_EQ(r.parsed->method, ParseMethod::kFuzzyName);
}

TEST(Parser, ConfidenceClause) {
    const auto r = parse_response("Category: (4) confidence: 0.85", broad15(), AnswerFormat::kCategoryNumber);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r.parsed->label, 4);
    ASSERT_TRUE(r.parsed->confidence.has_value());
    EXPECT_DOUBLE_EQ(*r.parsed->confidence, 0.85);
}

TEST(Parser, GarbageNeverEscapesTheOntology) {
    std::mt19937_64 rng(17);
    const std::string alphabet = "0123456789()-: abcXYZ.,\n<>/thinkCategory";
    for (int i = 0; i < 2000; ++i) {
        std::string s;
        const auto len = std::uniform_int_distribution<std::size_t>(0, 40)(rng);
        for (std::size_t j = 0; j < len; ++j) s += alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)];
        for (const auto* o : {&broad15(), &fine279()}) {
            const auto r = parse_response(s, *o, AnswerFormat::kCategoryNumber);
            if (r.ok()) {
                ASSERT_TRUE(o->contains(r.parsed->label)) << s;
            }
        }
    }
}
