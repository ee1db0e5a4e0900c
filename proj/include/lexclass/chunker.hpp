#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lexclass/corpus.hpp"

namespace lexclass {

enum class ChunkStrategy { kTruncate, kConcat, kStride, kSummarize, kPromptWindow };

std::string_view to_string(ChunkStrategy s);
ChunkStrategy parse_chunk_strategy(std::string_view s);

/// Half-open token index range [start, end).
struct TokenSpan {
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - start; }
    bool operator==(const TokenSpan&) const = default;
};

/// `window` bounds truncate/concat/stride chunks; `budget` bounds the
/// summarize and prompt_window outputs. Stride step is window - overlap.
struct ChunkPlan {
    ChunkStrategy strategy = ChunkStrategy::kTruncate;
    std::size_t window = 512;
    std::size_t overlap = 0;
    std::size_t budget = 5000;

    void validate() const;
    /// Token limit of a single chunk under this plan.
    std::size_t limit() const;
};

struct Chunk {
    std::string doc_id;
    std::size_t ordinal = 0;
    TokenSpan span;
    std::string text;
    /// Only for kSummarize: the sentence spans the summary was assembled
    /// from. `span` is then their hull and `text` their joined sentences.
    std::vector<TokenSpan> extracted;
    bool summary_fell_back_to_truncation = false;
};

/// Token spans for a document of `token_count` tokens. Not defined for
/// kSummarize, whose spans depend on the text.
std::vector<TokenSpan> plan_spans(std::size_t token_count, const ChunkPlan& plan);

struct SentenceRules {
    /// Words that end in '.' without ending the sentence ("v", "U.S", ...).
    std::vector<std::string> abbreviations;

    static SentenceRules defaults();
    static SentenceRules load(const std::filesystem::path& path);
};

/// Slices a document according to the plan. Throws on an empty (token-less) document.
std::vector<Chunk> chunk(const Document& doc, const ChunkPlan& plan,
                         const SentenceRules& rules = SentenceRules::defaults());

/// Byte ranges of sentences. A boundary is '.', '!' or '?' (optionally
/// followed by closing quotes/brackets), then whitespace, then an uppercase
/// letter; '.' after a listed abbreviation or a single-letter initial is not a
/// boundary.
std::vector<std::pair<std::size_t, std::size_t>> split_sentences(std::string_view text, const SentenceRules& rules);

struct Summary {
    std::string text;
    std::size_t token_count = 0;
    std::vector<std::size_t> sentences;  // selected sentence indices, ascending
    std::vector<TokenSpan> spans;        // token spans of the selected sentences in the source
    bool truncated = false;              // fell back to plain truncation
};

/// Greedy extractive summary within `budget` tokens. Sentences are ranked by
/// length-normalized in-document term frequency (ties: earlier sentence),
/// taken while they fit, and emitted in source order.
Summary summarize_extractive(std::string_view text, std::size_t budget,
                             const SentenceRules& rules = SentenceRules::defaults());

/// Audit dump: one {"doc_id","ordinal","start","end"} object per line.
std::string chunks_to_jsonl(const std::vector<Chunk>& chunks);

}  // namespace lexclass
