#include "lexclass/decision.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "lexclass/error.hpp"
#include "text_util.hpp"

namespace lexclass {

namespace {

void check_input(const std::vector<ChunkPrediction>& preds) {
    if (preds.empty()) throw Error(ErrorCode::kInvalidArgument, "no chunk predictions to decide on");
    for (const auto& p : preds) {
        if (p.doc_id != preds.front().doc_id) {
            throw Error(ErrorCode::kInvalidArgument,
                        fmt::format("predictions mix documents '{}' and '{}'", preds.front().doc_id, p.doc_id));
        }
    }
}

DocumentDecision abstain(const std::string& doc_id, DecisionRule rule) {
    return {doc_id, std::nullopt, rule, 0, true};
}

}  // namespace

std::string_view to_string(DecisionRule r) {
    switch (r) {
        case DecisionRule::kMajority: return "majority";
        case DecisionRule::kBestConfidence: return "best_confidence";
        case DecisionRule::kFirstChunk: return "first_chunk";
        case DecisionRule::kFixedPosition: return "fixed_position";
    }
    return "?";
}

DecisionRule parse_decision_rule(std::string_view s) {
    if (s == "majority") return DecisionRule::kMajority;
    if (s == "best_confidence") return DecisionRule::kBestConfidence;
    if (s == "first_chunk") return DecisionRule::kFirstChunk;
    if (s == "fixed_position") return DecisionRule::kFixedPosition;
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("unknown decision rule '{}' (majority|best_confidence|first_chunk|fixed_position)", s));
}

DocumentDecision majority_vote(const std::vector<ChunkPrediction>& preds, const DecisionOptions& options) {
    check_input(preds);
    struct Tally {
        double weight = 0.0;
        std::size_t votes = 0;
        double confidence = 0.0;
    };
    std::map<LabelId, Tally> tally;
    for (const auto& p : preds) {
        if (p.abstained()) continue;
        auto& t = tally[*p.label];
        t.weight += p.chunk_ordinal < options.ordinal_weights.size() ? options.ordinal_weights[p.chunk_ordinal] : 1.0;
        ++t.votes;
        t.confidence += p.confidence.value_or(0.0);
    }
    if (tally.empty()) return abstain(preds.front().doc_id, DecisionRule::kMajority);

    // std::map iterates ascending ids, so strict comparisons keep the lowest id on full ties.
    auto best = tally.begin();
    for (auto it = std::next(tally.begin()); it != tally.end(); ++it) {
        const auto& a = it->second;
        const auto& b = best->second;
        if (a.weight > b.weight || (a.weight == b.weight && a.confidence > b.confidence)) best = it;
    }
    return {preds.front().doc_id, best->first, DecisionRule::kMajority, best->second.votes, false};
}

DocumentDecision best_confidence(const std::vector<ChunkPrediction>& preds) {
    check_input(preds);
    const ChunkPrediction* best = nullptr;
    std::size_t labeled = 0;
    for (const auto& p : preds) {
        if (p.abstained()) continue;
        ++labeled;
        if (!p.confidence) continue;
        if (best == nullptr || *p.confidence > *best->confidence ||
            (*p.confidence == *best->confidence && p.chunk_ordinal < best->chunk_ordinal)) {
            best = &p;
        }
    }
    if (labeled == 0) return abstain(preds.front().doc_id, DecisionRule::kBestConfidence);
    if (best == nullptr) {
        throw Error(ErrorCode::kInvalidArgument,
                    fmt::format("best_confidence needs chunk confidences; none were reported for '{}'",
                                preds.front().doc_id));
    }
    return {preds.front().doc_id, best->label, DecisionRule::kBestConfidence, labeled, false};
}

DocumentDecision first_chunk(const std::vector<ChunkPrediction>& preds) {
    check_input(preds);
    const auto first = std::min_element(preds.begin(), preds.end(), [](const auto& a, const auto& b) {
        return a.chunk_ordinal < b.chunk_ordinal;
    });
    if (first->abstained()) return abstain(first->doc_id, DecisionRule::kFirstChunk);
    return {first->doc_id, first->label, DecisionRule::kFirstChunk, 1, false};
}

DocumentDecision fixed_position(const std::vector<ChunkPrediction>& preds, std::size_t ordinal) {
    check_input(preds);
    for (const auto& p : preds) {
        if (p.chunk_ordinal != ordinal) continue;
        if (p.abstained()) break;
        return {p.doc_id, p.label, DecisionRule::kFixedPosition, 1, false};
    }
    return abstain(preds.front().doc_id, DecisionRule::kFixedPosition);
}

DocumentDecision decide(DecisionRule rule, const std::vector<ChunkPrediction>& preds, const DecisionOptions& options) {
    switch (rule) {
        case DecisionRule::kMajority: return majority_vote(preds, options);
        case DecisionRule::kBestConfidence: return best_confidence(preds);
        case DecisionRule::kFirstChunk: return first_chunk(preds);
        case DecisionRule::kFixedPosition: return fixed_position(preds, options.fixed_position);
    }
    throw Error(ErrorCode::kInvalidArgument, "unknown decision rule");
}

std::vector<DocumentDecision> decide_all(DecisionRule rule, const std::vector<ChunkPrediction>& preds,
                                         const DecisionOptions& options) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<ChunkPrediction>> groups;
    for (const auto& p : preds) {
        auto [it, inserted] = groups.try_emplace(p.doc_id);
        if (inserted) order.push_back(p.doc_id);
        it->second.push_back(p);
    }
    std::vector<DocumentDecision> out;
    out.reserve(order.size());
    for (const auto& id : order) out.push_back(decide(rule, groups[id], options));
    return out;
}

nlohmann::ordered_json to_json(const DocumentDecision& d) {
    nlohmann::ordered_json j;
    j["doc_id"] = d.doc_id;
    j["label"] = d.label ? nlohmann::ordered_json(*d.label) : nlohmann::ordered_json(nullptr);
    j["rule"] = to_string(d.rule);
    j["support"] = d.support;
    j["abstained"] = d.abstained;
    return j;
}

DocumentDecision decision_from_json(const nlohmann::json& j) {
    DocumentDecision d;
    d.doc_id = j.at("doc_id").get<std::string>();
    if (!j.at("label").is_null()) d.label = j.at("label").get<LabelId>();
    d.rule = parse_decision_rule(j.at("rule").get<std::string>());
    d.support = j.at("support").get<std::size_t>();
    d.abstained = j.at("abstained").get<bool>();
    if (d.abstained == d.label.has_value()) {
        throw Error(ErrorCode::kParse, fmt::format("decision '{}' must have a label iff not abstained", d.doc_id));
    }
    return d;
}

std::string decisions_to_jsonl(const std::vector<DocumentDecision>& decisions) {
    std::string out;
    for (const auto& d : decisions) {
        out += to_json(d).dump();
        out += '\n';
    }
    return out;
}

std::vector<DocumentDecision> parse_decisions_jsonl(std::string_view jsonl) {
    std::vector<DocumentDecision> out;
    std::size_t line_no = 0;
    for (auto line : detail::split(jsonl, '\n')) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        try {
            out.push_back(decision_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::kParse, fmt::format("decisions line {}: {}", line_no, e.what()));
        } catch (const Error& e) {
            throw Error(e.code(), fmt::format("decisions line {}: {}", line_no, e.what()));
        }
    }
    return out;
}

}  // namespace lexclass
