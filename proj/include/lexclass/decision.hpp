#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexclass/ontology.hpp"

namespace lexclass {

struct ChunkPrediction {
    std::string doc_id;
    std::size_t chunk_ordinal = 0;
    std::optional<LabelId> label;  // unset = abstained
    std::optional<double> confidence;

    bool abstained() const { return !label.has_value(); }
};

enum class DecisionRule { kMajority, kBestConfidence, kFirstChunk, kFixedPosition };

std::string_view to_string(DecisionRule r);
DecisionRule parse_decision_rule(std::string_view s);

struct DocumentDecision {
    std::string doc_id;
    std::optional<LabelId> label;
    DecisionRule rule = DecisionRule::kMajority;
    std::size_t support = 0;
    bool abstained = false;

    bool operator==(const DocumentDecision&) const = default;
};

struct DecisionOptions {
    /// Vote weight per chunk ordinal for majority voting; ordinals past the
    /// end weigh 1. Empty = plain maximum vote.
    std::vector<double> ordinal_weights;
    /// Chunk ordinal used by the fixed-position rule.
    std::size_t fixed_position = 0;
};

/// Mode of the non-abstained labels. Ties go to the higher total confidence,
/// then to the lower label id. support = votes for the winner.
DocumentDecision majority_vote(const std::vector<ChunkPrediction>& preds, const DecisionOptions& options = {});

/// Label of the most confident non-abstained chunk, ties to the earliest
/// ordinal. Throws when labeled chunks exist but none carries a confidence.
DocumentDecision best_confidence(const std::vector<ChunkPrediction>& preds);

/// Label of the lowest-ordinal chunk (ordinal 0 for chunker output); an
/// abstention there propagates.
DocumentDecision first_chunk(const std::vector<ChunkPrediction>& preds);

/// Label of the chunk at a fixed ordinal chosen ahead of time (for example on a
/// validation split). Abstains when the document has no such chunk.
DocumentDecision fixed_position(const std::vector<ChunkPrediction>& preds, std::size_t ordinal);

DocumentDecision decide(DecisionRule rule, const std::vector<ChunkPrediction>& preds, const DecisionOptions& options = {});

/// Groups predictions by doc_id (first-appearance order) and decides each.
std::vector<DocumentDecision> decide_all(DecisionRule rule, const std::vector<ChunkPrediction>& preds,
                                         const DecisionOptions& options = {});

nlohmann::ordered_json to_json(const DocumentDecision& d);
DocumentDecision decision_from_json(const nlohmann::json& j);
std::string decisions_to_jsonl(const std::vector<DocumentDecision>& decisions);
std::vector<DocumentDecision> parse_decisions_jsonl(std::string_view jsonl);

}  // namespace lexclass
