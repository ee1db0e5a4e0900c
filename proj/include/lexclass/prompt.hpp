#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexclass/chunker.hpp"
#include "lexclass/corpus.hpp"
#include "lexclass/ontology.hpp"

namespace lexclass {

enum class LabelBlockStyle { kNumberedNames, kNamesWithGlosses };
enum class AnswerFormat { kCategoryNumber, kCategoryName };

std::string_view to_string(LabelBlockStyle s);
std::string_view to_string(AnswerFormat f);
LabelBlockStyle parse_label_block_style(std::string_view s);
AnswerFormat parse_answer_format(std::string_view s);

struct FewShotExample {
    std::string excerpt;
    LabelId label = 0;
};

/// Prompt template loaded from a sectioned text file:
///
///   [[options]]          key = value lines (label_block_style, answer_format, excerpt_budget)
///   [[system]]           system message (may be empty)
///   [[user]]             user message with {placeholders}
///   [[example <label>]]  few-shot excerpt, repeatable
///
/// Placeholders: {label_block} {fewshot_block} {opinion} {retrieved_block}
/// {label_count} {max_label_id}.
struct PromptTemplate {
    std::string system_text;
    std::string instruction_text;
    LabelBlockStyle label_block_style = LabelBlockStyle::kNumberedNames;
    std::vector<FewShotExample> fewshot;
    AnswerFormat answer_format = AnswerFormat::kCategoryNumber;
    std::size_t excerpt_budget = 5000;

    static PromptTemplate parse(std::string_view text);
    static PromptTemplate load(const std::filesystem::path& path);
};

struct Prompt {
    std::string system;
    std::string user;

    bool operator==(const Prompt&) const = default;
};

inline constexpr std::string_view kOpinionStart = "--- Opinion Start ---";
inline constexpr std::string_view kOpinionEnd = "--- Opinion End ---";

/// Renders one label per entry; `ids` restricts and orders the block (all labels when empty).
std::string render_label_block(const LabelOntology& ontology, LabelBlockStyle style, const std::vector<LabelId>& ids = {});

/// The canonical answer string for a label: "Category: (n)" or the bare name.
std::string render_answer(const LabelOntology& ontology, LabelId label, AnswerFormat format);

/// Checks template/ontology compatibility (names present, few-shot labels valid,
/// names usable as answers when the template asks for names).
void check_compatible(const PromptTemplate& tmpl, const LabelOntology& ontology);

/// Truncates `text` to at most `limit` reference tokens (chunker truncate path).
std::string truncate_excerpt(std::string_view text, std::size_t limit);

/// Assembles (system, user). The excerpt is capped at min(template budget,
/// plan limit) tokens and wrapped in the opinion delimiters.
Prompt build_prompt(const PromptTemplate& tmpl, const LabelOntology& ontology, std::string_view document_text,
                    const ChunkPlan& plan);

/// Lower-level renderer used by build_prompt and the retrieval prompt.
struct PromptFields {
    std::string label_block;
    std::string retrieved_block;
    std::string opinion_excerpt;
};
Prompt render_prompt(const PromptTemplate& tmpl, const LabelOntology& ontology, const PromptFields& fields);

// ---- response parsing -------------------------------------------------------

enum class ParseMethod { kParenthesizedNumber, kBareNumber, kExactName, kFuzzyName };
enum class ParseFailure { kNoParse, kOutOfRange, kMultipleCandidates };

std::string_view to_string(ParseMethod m);
std::string_view to_string(ParseFailure f);

struct ParsedLabel {
    LabelId label = 0;
    ParseMethod method = ParseMethod::kParenthesizedNumber;
    std::string raw;
    std::optional<double> confidence;  // from an optional "confidence: x" clause
};

struct ParseResult {
    std::optional<ParsedLabel> parsed;
    ParseFailure failure = ParseFailure::kNoParse;  // meaningful only when !parsed
    std::string raw;
    std::string detail;

    bool ok() const { return parsed.has_value(); }
};

struct ParseOptions {
    /// Edit-distance name matching; off by default so near-misses abstain.
    bool fuzzy_names = false;
    std::size_t max_edit_distance = 2;
};

/// Tries, in order: "(N)"; one distinct bare integer; an exact case-insensitive
/// ontology name of at most two words. Reasoning blocks (<think>...</think>)
/// are ignored. Never yields an id outside the ontology.
ParseResult parse_response(std::string_view raw, const LabelOntology& ontology, AnswerFormat format,
                           const ParseOptions& options = {});

// ---- few-shot selection -----------------------------------------------------

/// Deterministic under (corpus, k, seed): walks a seeded permutation of the
/// labeled documents and keeps those whose label is still under the cap.
std::vector<FewShotExample> select_fewshot(const Corpus& corpus, Level level, std::size_t k, std::uint64_t seed,
                                           std::size_t per_label_cap, std::size_t excerpt_budget);

}  // namespace lexclass
