#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lexclass/chunker.hpp"
#include "lexclass/corpus.hpp"
#include "lexclass/ontology.hpp"
#include "lexclass/prompt.hpp"

namespace lexclass {

/// Per-category keyword lists. Terms are case-folded phrases of 1..5 words,
/// unique within their category.
struct KeywordLexicon {
    std::map<LabelId, std::vector<std::string>> entries;

    std::size_t term_count() const;

    /// One line per category: `Category Name: term, term, multi word phrase`.
    /// Quotes around the name and list bullets are tolerated. With `strict`
    /// off, over-long terms are dropped instead of rejected (for generated
    /// lexicons).
    static KeywordLexicon parse(std::string_view text, const LabelOntology& ontology, bool strict = true);
    static KeywordLexicon load(const std::filesystem::path& path, const LabelOntology& ontology);

    std::string to_text(const LabelOntology& ontology) const;
};

enum class ScoringRule {
    kPhraseLength,  // sum of match counts weighted by phrase length in words
    kBinary,        // number of distinct terms present
    kTfIdf,         // match counts weighted by ln(1 + C / df) over categories
};

std::string_view to_string(ScoringRule r);
ScoringRule parse_scoring_rule(std::string_view s);

struct CategoryScore {
    LabelId label = 0;
    double score = 0.0;
    std::vector<std::pair<std::string, int>> matched_terms;  // sorted by term
};

/// Scores every lexicon category against `text`. Matching is case-insensitive
/// on reference tokens, leftmost-longest per category (a phrase consumes its
/// words), and never crosses a blank line. Sorted by descending score, ties
/// by ascending label id.
std::vector<CategoryScore> score_categories(std::string_view text, const KeywordLexicon& lexicon,
                                            ScoringRule rule = ScoringRule::kPhraseLength);

struct Segment {
    std::string doc_id;
    std::size_t ordinal = 0;
    std::optional<std::string> heading;
    std::string text;
    std::size_t begin = 0;  // byte offsets into the document text
    std::size_t end = 0;
};

struct StructureMarkers {
    std::vector<std::string> markers;

    static StructureMarkers defaults();
    static StructureMarkers load(const std::filesystem::path& path);
};

/// Splits at blank-line runs, all-caps heading lines, and lines opening with a
/// structural marker. Only whitespace lies between consecutive segments.
std::vector<Segment> segment_structure(const Document& doc, const StructureMarkers& markers = StructureMarkers::defaults());

struct RetrievalOptions {
    ScoringRule rule = ScoringRule::kPhraseLength;
    StructureMarkers markers = StructureMarkers::defaults();
};

/// Segment-summed category scores, padded with zero entries for ontology
/// labels the lexicon does not cover (when an ontology is given).
std::vector<CategoryScore> score_document(const Document& doc, const KeywordLexicon& lexicon,
                                          const RetrievalOptions& options = {},
                                          const LabelOntology* ontology = nullptr);

std::string render_retrieved_block(const std::vector<CategoryScore>& top, const LabelOntology& ontology);

/// RAG prompt: top-k categories (with matched terms) in {retrieved_block},
/// the same k labels in {label_block}, the excerpt in {opinion}.
Prompt retrieve_and_prompt(const Document& doc, const KeywordLexicon& lexicon, std::size_t k,
                           const PromptTemplate& tmpl, const LabelOntology& ontology, const ChunkPlan& plan,
                           const RetrievalOptions& options = {});

/// No-LLM baseline: arg-max of segment-summed scores, ties to the lowest id.
LabelId classify_direct(const Document& doc, const KeywordLexicon& lexicon, const RetrievalOptions& options = {});

}  // namespace lexclass
