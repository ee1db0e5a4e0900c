#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexclass/corpus.hpp"
#include "lexclass/decision.hpp"
#include "lexclass/ontology.hpp"

namespace lexclass {

struct GoldLabel {
    std::string doc_id;
    LabelId label = 0;
};

/// Gold labels of every document at `level`; throws on unlabeled documents.
std::vector<GoldLabel> gold_labels(const Corpus& corpus, Level level);

struct ConfusionMatrix {
    std::size_t k = 0;
    std::vector<std::uint64_t> counts;  // row-major, rows = gold, columns = predicted
    std::uint64_t abstain_count = 0;
    std::vector<std::uint64_t> abstain_by_gold;

    explicit ConfusionMatrix(std::size_t k_ = 0) : k(k_), counts(k_ * k_, 0), abstain_by_gold(k_, 0) {}

    std::uint64_t& at(std::size_t gold, std::size_t predicted) { return counts[gold * k + predicted]; }
    std::uint64_t at(std::size_t gold, std::size_t predicted) const { return counts[gold * k + predicted]; }
    std::uint64_t counted() const;
    std::uint64_t total() const { return counted() + abstain_count; }
};

/// Aligns decisions with gold by doc_id. Both sides must cover the same
/// documents exactly once.
ConfusionMatrix confusion(const std::vector<GoldLabel>& golds, const std::vector<DocumentDecision>& decisions,
                          std::size_t k);

enum class AbstainPolicy { kCountAsError, kExclude };

std::string_view to_string(AbstainPolicy p);
AbstainPolicy parse_abstain_policy(std::string_view s);

struct ClassMetrics {
    LabelId label = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;  // gold documents of this class, abstained ones included
};

struct MetricsReport {
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double micro_f1 = 0.0;
    double abstain_rate = 0.0;
    std::vector<ClassMetrics> per_class;
    AbstainPolicy policy = AbstainPolicy::kCountAsError;
    std::uint64_t documents = 0;
};

/// Under count_as_error an abstention is a miss: it enters the accuracy
/// denominator and its gold class's recall denominator. micro_f1 is the
/// accuracy over non-abstained documents. Macro means run over classes with a
/// nonzero recall denominator.
MetricsReport metrics(const ConfusionMatrix& cm, AbstainPolicy policy = AbstainPolicy::kCountAsError);

nlohmann::ordered_json report_to_json(const std::string& run, const MetricsReport& report);

struct RunSummary {
    std::string run;
    std::string model;
    std::string technique;
    MetricsReport report;

    static RunSummary from_json(const nlohmann::json& j);
};

enum class Averaging { kMacro, kMicro };

std::string_view to_string(Averaging a);
Averaging parse_averaging(std::string_view s);

/// Model | Technique | Accuracy | Precision | Recall | F1, three decimals, best
/// value per metric column marked with '*'.
std::string compare_runs(const std::vector<RunSummary>& runs, Averaging averaging = Averaging::kMacro);
std::string compare_runs_csv(const std::vector<RunSummary>& runs, Averaging averaging = Averaging::kMacro);
nlohmann::ordered_json compare_runs_json(const std::vector<RunSummary>& runs, Averaging averaging = Averaging::kMacro);

}  // namespace lexclass
