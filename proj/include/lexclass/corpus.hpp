#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lexclass/ontology.hpp"

namespace lexclass {

struct Document {
    std::string doc_id;
    std::string text;
    std::optional<LabelId> broad_label;
    std::optional<LabelId> fine_label;

    std::optional<LabelId> label(Level level) const { return level == Level::kBroad ? broad_label : fine_label; }

    bool operator==(const Document&) const = default;
};

using Corpus = std::vector<Document>;

enum class CorpusFormat { kJsonl, kCsv };

CorpusFormat parse_corpus_format(std::string_view s);

/// Ontologies used to range-check labels while loading. A null pointer skips
/// the check for that level.
struct OntologyRefs {
    const LabelOntology* broad = nullptr;
    const LabelOntology* fine = nullptr;
};

/// Loads a corpus, preserving row order. Unlabeled documents are admitted;
/// operations that need labels reject them later. Errors carry the 1-based
/// line (JSONL) or record (CSV) number.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format, OntologyRefs ontologies = {});
Corpus parse_corpus_jsonl(std::string_view contents, OntologyRefs ontologies = {});
Corpus parse_corpus_csv(std::string_view contents, OntologyRefs ontologies = {});

std::string corpus_to_jsonl(const Corpus& corpus);
void write_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path);

struct CorpusSplit {
    std::vector<std::string> train;
    std::vector<std::string> validation;
    std::vector<std::string> test;
    std::uint64_t seed = 0;
    std::array<double, 3> ratios{};
};

/// Seeded partition into train/validation/test. Set sizes are the
/// largest-remainder apportionment of |corpus| by `ratios`; each set lists
/// its doc_ids in corpus order.
CorpusSplit split_corpus(const Corpus& corpus, std::array<double, 3> ratios, std::uint64_t seed);

/// Largest-remainder apportionment of n items by the given ratios. Ties in the
/// fractional parts go to the earlier entry.
std::array<std::size_t, 3> apportion(std::size_t n, std::array<double, 3> ratios);

/// Per-label document counts at one level; index = label id.
std::vector<std::size_t> label_histogram(const Corpus& corpus, Level level, std::size_t label_count);

/// Subset of `corpus` whose ids appear in `ids`, in corpus order. Unknown ids throw.
Corpus select_documents(const Corpus& corpus, const std::vector<std::string>& ids);

}  // namespace lexclass
