#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexclass/chunker.hpp"
#include "lexclass/corpus.hpp"
#include "lexclass/decision.hpp"
#include "lexclass/eval.hpp"
#include "lexclass/llm_client.hpp"
#include "lexclass/ontology.hpp"
#include "lexclass/prompt.hpp"
#include "lexclass/retrieval.hpp"

namespace lexclass {

enum class Backend { kLlm, kLexicon };

std::string_view to_string(Backend b);
Backend parse_backend(std::string_view s);

struct ClassifyOptions {
    Level level = Level::kBroad;
    ChunkPlan plan;
    DecisionRule rule = DecisionRule::kMajority;
    DecisionOptions decision;
    ParseOptions parse;
    EndpointConfig endpoint;
    Backend backend = Backend::kLlm;
    /// RAG: number of retrieved categories placed in the prompt (when a lexicon is given).
    std::size_t retrieve_k = 5;
    RetrievalOptions retrieval;
};

struct PredictionRecord {
    ChunkPrediction prediction;
    TokenSpan span;
    std::string request_id;
    std::string response_text;
    std::optional<std::string> parse_method;
    std::optional<std::string> failure;  // parse failure or endpoint error

    nlohmann::ordered_json to_json() const;
};

struct ClassifyResult {
    std::vector<PredictionRecord> predictions;
    std::vector<DocumentDecision> decisions;
    std::vector<CompletionExchange> exchanges;
};

/// chunk -> prompt (RAG block when `lexicon` is set) -> endpoint -> parse ->
/// decision rule. Endpoint and parse failures become abstentions. With the
/// lexicon backend no endpoint is contacted: every chunk gets the lexicon's
/// arg-max label.
ClassifyResult classify_corpus(const Corpus& docs, const LabelOntology& ontology, const PromptTemplate& tmpl,
                               const KeywordLexicon* lexicon, const ClassifyOptions& options);

/// Short technique label for comparison tables, e.g. "stride-512/64+majority".
std::string technique_label(const ClassifyOptions& options, bool rag);

struct RunArtifacts {
    std::filesystem::path dir;
    std::string config_text;         // resolved configuration snapshot
    nlohmann::ordered_json config;   // same, as JSON
    std::map<std::string, std::filesystem::path> inputs;  // role -> file, digested into the manifest
};

/// Writes config.ini, config.json, predictions.jsonl, decisions.jsonl,
/// exchanges.jsonl and manifest.json (tool version, input SHA-256 digests,
/// output digests). Returns the manifest.
nlohmann::ordered_json write_run_artifacts(const RunArtifacts& run, const ClassifyResult& result);

}  // namespace lexclass
