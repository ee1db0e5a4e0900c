#include "lexclass/pipeline.hpp"

#include <fmt/format.h>

#include "lexclass/digest.hpp"
#include "lexclass/error.hpp"
#include "text_util.hpp"

namespace lexclass {

namespace {

struct PendingChunk {
    std::size_t doc_index = 0;
    Chunk chunk;
};

template <typename Rows>
std::string to_jsonl(const Rows& rows) {
    std::string out;
    for (const auto& r : rows) {
        out += r.to_json().dump();
        out += '\n';
    }
    return out;
}

}  // namespace

std::string_view to_string(Backend b) { return b == Backend::kLexicon ? "lexicon" : "llm"; }

Backend parse_backend(std::string_view s) {
    if (s == "llm") return Backend::kLlm;
    if (s == "lexicon") return Backend::kLexicon;
    throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown backend '{}' (llm|lexicon)", s));
}

nlohmann::ordered_json PredictionRecord::to_json() const {
    nlohmann::ordered_json j;
    j["doc_id"] = prediction.doc_id;
    j["chunk_ordinal"] = prediction.chunk_ordinal;
    j["start"] = span.start;
    j["end"] = span.end;
    j["label"] = prediction.label ? nlohmann::ordered_json(*prediction.label) : nlohmann::ordered_json(nullptr);
    j["confidence"] = prediction.confidence ? nlohmann::ordered_json(*prediction.confidence) : nlohmann::ordered_json(nullptr);
    j["abstained"] = prediction.abstained();
    j["request_id"] = request_id;
    j["response"] = response_text;
    j["parse_method"] = parse_method ? nlohmann::ordered_json(*parse_method) : nlohmann::ordered_json(nullptr);
    j["failure"] = failure ? nlohmann::ordered_json(*failure) : nlohmann::ordered_json(nullptr);
    return j;
}

ClassifyResult classify_corpus(const Corpus& docs, const LabelOntology& ontology, const PromptTemplate& tmpl,
                               const KeywordLexicon* lexicon, const ClassifyOptions& options) {
    options.plan.validate();
    if (docs.empty()) throw Error(ErrorCode::kInvalidArgument, "no documents to classify");
    if (options.backend == Backend::kLexicon && lexicon == nullptr) {
        throw Error(ErrorCode::kConfig, "the lexicon backend needs a keyword lexicon");
    }
    if (options.backend == Backend::kLlm) {
        check_compatible(tmpl, ontology);
        options.endpoint.validate();
    }

    std::vector<PendingChunk> pending;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        for (auto& c : chunk(docs[i], options.plan)) pending.push_back({i, std::move(c)});
    }

    ClassifyResult result;
    result.predictions.resize(pending.size());
    for (std::size_t i = 0; i < pending.size(); ++i) {
        auto& rec = result.predictions[i];
        rec.prediction.doc_id = pending[i].chunk.doc_id;
        rec.prediction.chunk_ordinal = pending[i].chunk.ordinal;
        rec.span = pending[i].chunk.span;
        rec.request_id = fmt::format("{}#{}", rec.prediction.doc_id, rec.prediction.chunk_ordinal);
    }

    if (options.backend == Backend::kLexicon) {
        for (std::size_t i = 0; i < pending.size(); ++i) {
            const Document view{pending[i].chunk.doc_id, pending[i].chunk.text, std::nullopt, std::nullopt};
            const auto label = classify_direct(view, *lexicon, options.retrieval);
            result.predictions[i].prediction.label = label;
            result.predictions[i].parse_method = "lexicon";
        }
    } else {
        std::vector<CompletionJob> jobs;
        jobs.reserve(pending.size());
        for (std::size_t i = 0; i < pending.size(); ++i) {
            const auto& c = pending[i].chunk;
            Prompt prompt;
            if (lexicon != nullptr) {
                const Document view{c.doc_id, c.text, std::nullopt, std::nullopt};
                const std::size_t k = std::min(options.retrieve_k, ontology.size());
                prompt = retrieve_and_prompt(view, *lexicon, k, tmpl, ontology, options.plan, options.retrieval);
            } else {
                prompt = build_prompt(tmpl, ontology, c.text, options.plan);
            }
            jobs.push_back({result.predictions[i].request_id, std::move(prompt.system), std::move(prompt.user)});
        }
        result.exchanges = classify_batch(options.endpoint, jobs);

        for (std::size_t i = 0; i < pending.size(); ++i) {
            auto& rec = result.predictions[i];
            const auto& ex = result.exchanges[i];
            rec.response_text = ex.response_text;
            if (!ex.ok()) {
                rec.failure = "endpoint: " + *ex.endpoint_error;
                continue;
            }
            const auto parsed = parse_response(ex.response_text, ontology, tmpl.answer_format, options.parse);
            if (!parsed.ok()) {
                rec.failure = fmt::format("parse: {}", to_string(parsed.failure));
                continue;
            }
            rec.prediction.label = parsed.parsed->label;
            rec.prediction.confidence = parsed.parsed->confidence;
            rec.parse_method = std::string(to_string(parsed.parsed->method));
        }
    }

    std::vector<ChunkPrediction> preds;
    preds.reserve(result.predictions.size());
    for (const auto& rec : result.predictions) preds.push_back(rec.prediction);
    result.decisions = decide_all(options.rule, preds, options.decision);
    return result;
}

std::string technique_label(const ClassifyOptions& options, bool rag) {
    const auto& p = options.plan;
    std::string chunking;
    switch (p.strategy) {
        case ChunkStrategy::kStride: chunking = fmt::format("stride-{}/{}", p.window, p.overlap); break;
        case ChunkStrategy::kSummarize:
        case ChunkStrategy::kPromptWindow: chunking = fmt::format("{}-{}", to_string(p.strategy), p.budget); break;
        default: chunking = fmt::format("{}-{}", to_string(p.strategy), p.window); break;
    }
    std::string out = fmt::format("{}+{}", chunking, to_string(options.rule));
    if (options.backend == Backend::kLexicon) {
        out += "+lexicon";
    } else if (rag) {
        out += fmt::format("+rag{}", options.retrieve_k);
    }
    return out;
}

nlohmann::ordered_json write_run_artifacts(const RunArtifacts& run, const ClassifyResult& result) {
    std::filesystem::create_directories(run.dir);
    const std::map<std::string, std::string> outputs = {
        {"config.ini", run.config_text},
        {"config.json", run.config.dump(2) + "\n"},
        {"predictions.jsonl", to_jsonl(result.predictions)},
        {"decisions.jsonl", decisions_to_jsonl(result.decisions)},
        {"exchanges.jsonl", to_jsonl(result.exchanges)},
    };
    nlohmann::ordered_json manifest;
    manifest["tool"] = "lexclass";
    manifest["version"] = LEXCLASS_VERSION;
    auto& inputs = manifest["inputs"] = nlohmann::ordered_json::object();
    for (const auto& [role, path] : run.inputs) {
        inputs[role] = {{"path", path.string()}, {"sha256", sha256_file(path)}};
    }
    auto& outs = manifest["outputs"] = nlohmann::ordered_json::object();
    for (const auto& [name, contents] : outputs) {
        detail::write_file(run.dir / name, contents);
        outs[name] = sha256_hex(contents);
    }
    detail::write_file(run.dir / "manifest.json", manifest.dump(2) + "\n");
    return manifest;
}

}  // namespace lexclass
