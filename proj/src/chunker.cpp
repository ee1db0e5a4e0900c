#include "lexclass/chunker.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lexclass/error.hpp"
#include "lexclass/tokenizer.hpp"

namespace lexclass {

std::string_view to_string(ChunkStrategy s) {
    switch (s) {
        case ChunkStrategy::kTruncate: return "truncate";
        case ChunkStrategy::kConcat: return "concat";
        case ChunkStrategy::kStride: return "stride";
        case ChunkStrategy::kSummarize: return "summarize";
        case ChunkStrategy::kPromptWindow: return "prompt_window";
    }
    return "?";
}

ChunkStrategy parse_chunk_strategy(std::string_view s) {
    for (auto v : {ChunkStrategy::kTruncate, ChunkStrategy::kConcat, ChunkStrategy::kStride,
                   ChunkStrategy::kSummarize, ChunkStrategy::kPromptWindow}) {
        if (to_string(v) == s) return v;
    }
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("unknown chunk strategy '{}' (truncate|concat|stride|summarize|prompt_window)", s));
}

void ChunkPlan::validate() const {
    if (window == 0) throw Error(ErrorCode::kInvalidArgument, "chunk window must be positive");
    if (overlap >= window) {
        throw Error(ErrorCode::kInvalidArgument,
                    fmt::format("chunk overlap {} must be smaller than the window {}", overlap, window));
    }
    if (budget == 0) throw Error(ErrorCode::kInvalidArgument, "token budget must be positive");
}

std::size_t ChunkPlan::limit() const {
    return strategy == ChunkStrategy::kSummarize || strategy == ChunkStrategy::kPromptWindow ? budget : window;
}

std::vector<TokenSpan> plan_spans(std::size_t n, const ChunkPlan& plan) {
    plan.validate();
    std::vector<TokenSpan> spans;
    if (n == 0) return spans;
    switch (plan.strategy) {
        case ChunkStrategy::kTruncate:
            spans.push_back({0, std::min(n, plan.window)});
            break;
        case ChunkStrategy::kPromptWindow:
            spans.push_back({0, std::min(n, plan.budget)});
            break;
        case ChunkStrategy::kConcat:
            for (std::size_t start = 0; start < n; start += plan.window) {
                spans.push_back({start, std::min(start + plan.window, n)});
            }
            break;
        case ChunkStrategy::kStride: {
            const std::size_t step = plan.window - plan.overlap;
            for (std::size_t start = 0;; start += step) {
                const std::size_t end = std::min(start + plan.window, n);
                spans.push_back({start, end});
                if (end == n) break;
            }
            break;
        }
        case ChunkStrategy::kSummarize:
            throw Error(ErrorCode::kInvalidArgument, "summarize spans depend on the text; use chunk()");
    }
    return spans;
}

std::vector<Chunk> chunk(const Document& doc, const ChunkPlan& plan, const SentenceRules& rules) {
    plan.validate();
    const auto tokens = tokenize_spans(doc.text);
    if (tokens.empty()) throw Error(ErrorCode::kInvalidArgument, fmt::format("document '{}' is empty", doc.doc_id));

    std::vector<Chunk> chunks;
    if (plan.strategy == ChunkStrategy::kSummarize) {
        auto summary = summarize_extractive(doc.text, plan.budget, rules);
        Chunk c;
        c.doc_id = doc.doc_id;
        c.span = {summary.spans.front().start, summary.spans.back().end};
        c.text = std::move(summary.text);
        c.extracted = std::move(summary.spans);
        c.summary_fell_back_to_truncation = summary.truncated;
        chunks.push_back(std::move(c));
        return chunks;
    }

    const std::string_view text = doc.text;
    std::size_t ordinal = 0;
    for (const auto& span : plan_spans(tokens.size(), plan)) {
        const std::size_t begin = tokens[span.start].begin;
        const std::size_t end = tokens[span.end - 1].end;
        chunks.push_back({doc.doc_id, ordinal++, span, std::string(text.substr(begin, end - begin)), {}, false});
    }
    return chunks;
}

std::string chunks_to_jsonl(const std::vector<Chunk>& chunks) {
    std::string out;
    for (const auto& c : chunks) {
        nlohmann::ordered_json row;
        row["doc_id"] = c.doc_id;
        row["ordinal"] = c.ordinal;
        row["start"] = c.span.start;
        row["end"] = c.span.end;
        out += row.dump();
        out += '\n';
    }
    return out;
}

}  // namespace lexclass
