#include "lexclass/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lexclass/error.hpp"
#include "text_util.hpp"

namespace lexclass {

namespace {

void check_label(const std::optional<LabelId>& label, const LabelOntology* ontology, std::string_view level,
                 std::size_t record) {
    if (!label || ontology == nullptr) return;
    if (!ontology->contains(*label)) {
        throw Error(ErrorCode::kOutOfRange,
                    fmt::format("line {}: {} label {} out of range (ontology has {} labels)", record, level, *label,
                                ontology->size()));
    }
}

void validate_document(const Document& doc, OntologyRefs ontologies, std::unordered_set<std::string>& ids,
                       std::size_t record) {
    if (doc.doc_id.empty()) throw Error(ErrorCode::kParse, fmt::format("line {}: empty doc_id", record));
    if (doc.text.empty()) throw Error(ErrorCode::kParse, fmt::format("line {}: empty text for {}", record, doc.doc_id));
    if (!ids.insert(doc.doc_id).second) {
        throw Error(ErrorCode::kDuplicate, fmt::format("line {}: duplicate doc_id '{}'", record, doc.doc_id));
    }
    check_label(doc.broad_label, ontologies.broad, "broad", record);
    check_label(doc.fine_label, ontologies.fine, "fine", record);
}

std::optional<LabelId> json_label(const nlohmann::json& row, const char* key) {
    if (!row.contains(key) || row.at(key).is_null()) return std::nullopt;
    if (!row.at(key).is_number_integer()) throw Error(ErrorCode::kParse, fmt::format("{} must be an integer or null", key));
    return row.at(key).get<LabelId>();
}

std::optional<LabelId> csv_label(std::string_view field, const char* key) {
    field = detail::trim(field);
    if (field.empty() || field == "null") return std::nullopt;
    LabelId value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw Error(ErrorCode::kParse, fmt::format("{} '{}' is not an integer", key, field));
    }
    return value;
}

// RFC 4180 records. Returns (records, starting line of each record).
std::pair<std::vector<std::vector<std::string>>, std::vector<std::size_t>> read_csv(std::string_view s) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::size_t> lines;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    std::size_t line = 1;
    std::size_t record_line = 1;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        if (!(record.size() == 1 && record[0].empty())) {
            records.push_back(std::move(record));
            lines.push_back(record_line);
        }
        record.clear();
    };

    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < s.size() && s[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field_started) throw Error(ErrorCode::kParse, fmt::format("line {}: stray quote in field", line));
                quoted = true;
                field_started = true;
                break;
            case ',':
                end_field();
                break;
            case '\r':
                break;
            case '\n':
                end_record();
                ++line;
                record_line = line;
                break;
            default:
                field.push_back(c);
                field_started = true;
        }
    }
    if (quoted) throw Error(ErrorCode::kParse, fmt::format("line {}: unterminated quoted field", record_line));
    if (field_started || !record.empty()) end_record();
    return {std::move(records), std::move(lines)};
}

}  // namespace

CorpusFormat parse_corpus_format(std::string_view s) {
    if (s == "jsonl") return CorpusFormat::kJsonl;
    if (s == "csv") return CorpusFormat::kCsv;
    throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown corpus format '{}' (expected jsonl|csv)", s));
}

Corpus parse_corpus_jsonl(std::string_view contents, OntologyRefs ontologies) {
    Corpus corpus;
    std::unordered_set<std::string> ids;
    std::size_t line_no = 0;
    for (auto line : detail::split(contents, '\n')) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        Document doc;
        try {
            const auto row = nlohmann::json::parse(line);
            if (!row.is_object()) throw Error(ErrorCode::kParse, "expected a JSON object");
            doc.doc_id = row.at("doc_id").get<std::string>();
            doc.text = row.at("text").get<std::string>();
            doc.broad_label = json_label(row, "broad_label");
            doc.fine_label = json_label(row, "fine_label");
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::kParse, fmt::format("line {}: {}", line_no, e.what()));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::kParse) throw;
            throw Error(ErrorCode::kParse, fmt::format("line {}: {}", line_no, e.what()));
        }
        validate_document(doc, ontologies, ids, line_no);
        corpus.push_back(std::move(doc));
    }
    return corpus;
}

Corpus parse_corpus_csv(std::string_view contents, OntologyRefs ontologies) {
    auto [records, lines] = read_csv(contents);
    if (records.empty()) throw Error(ErrorCode::kParse, "line 1: missing CSV header");

    const auto& header = records.front();
    std::unordered_map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < header.size(); ++i) column[std::string(detail::trim(header[i]))] = i;
    for (const char* required : {"doc_id", "text", "broad_label", "fine_label"}) {
        if (!column.contains(required)) {
            throw Error(ErrorCode::kParse, fmt::format("line 1: CSV header lacks column '{}'", required));
        }
    }

    Corpus corpus;
    std::unordered_set<std::string> ids;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() != header.size()) {
            throw Error(ErrorCode::kParse,
                        fmt::format("line {}: expected {} fields, got {}", lines[r], header.size(), rec.size()));
        }
        Document doc;
        try {
            doc.doc_id = rec[column["doc_id"]];
            doc.text = rec[column["text"]];
            doc.broad_label = csv_label(rec[column["broad_label"]], "broad_label");
            doc.fine_label = csv_label(rec[column["fine_label"]], "fine_label");
        } catch (const Error& e) {
            throw Error(e.code(), fmt::format("line {}: {}", lines[r], e.what()));
        }
        validate_document(doc, ontologies, ids, lines[r]);
        corpus.push_back(std::move(doc));
    }
    return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format, OntologyRefs ontologies) {
    const std::string contents = detail::read_file(path);
    return format == CorpusFormat::kJsonl ? parse_corpus_jsonl(contents, ontologies)
                                          : parse_corpus_csv(contents, ontologies);
}

std::string corpus_to_jsonl(const Corpus& corpus) {
    std::string out;
    for (const auto& doc : corpus) {
        nlohmann::ordered_json row;
        row["doc_id"] = doc.doc_id;
        row["text"] = doc.text;
        row["broad_label"] = doc.broad_label ? nlohmann::ordered_json(*doc.broad_label) : nlohmann::ordered_json(nullptr);
        row["fine_label"] = doc.fine_label ? nlohmann::ordered_json(*doc.fine_label) : nlohmann::ordered_json(nullptr);
        out += row.dump();
        out += '\n';
    }
    return out;
}

void write_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
    detail::write_file(path, corpus_to_jsonl(corpus));
}

std::array<std::size_t, 3> apportion(std::size_t n, std::array<double, 3> ratios) {
    std::array<std::size_t, 3> sizes{};
    std::array<double, 3> remainders{};
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double quota = ratios[i] * static_cast<double>(n);
        sizes[i] = static_cast<std::size_t>(std::floor(quota));
        remainders[i] = quota - std::floor(quota);
        assigned += sizes[i];
    }
    std::array<std::size_t, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++sizes[order[k % 3]];
    return sizes;
}

CorpusSplit split_corpus(const Corpus& corpus, std::array<double, 3> ratios, std::uint64_t seed) {
    for (double r : ratios) {
        if (!(r > 0.0)) throw Error(ErrorCode::kInvalidArgument, "split ratios must be positive");
    }
    const double sum = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(sum - 1.0) > 1e-9) {
        throw Error(ErrorCode::kInvalidArgument, fmt::format("split ratios sum to {} (expected 1.0)", sum));
    }
    if (corpus.size() < 3) {
        throw Error(ErrorCode::kInvalidArgument, fmt::format("cannot split a corpus of {} documents", corpus.size()));
    }

    const auto sizes = apportion(corpus.size(), ratios);
    const auto perm = detail::seeded_permutation(corpus.size(), seed);

    // bucket[i] = which set document i falls into
    std::vector<int> bucket(corpus.size());
    std::size_t pos = 0;
    for (int set = 0; set < 3; ++set) {
        for (std::size_t k = 0; k < sizes[static_cast<std::size_t>(set)]; ++k) bucket[perm[pos++]] = set;
    }

    CorpusSplit split;
    split.seed = seed;
    split.ratios = ratios;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        auto& target = bucket[i] == 0 ? split.train : bucket[i] == 1 ? split.validation : split.test;
        target.push_back(corpus[i].doc_id);
    }
    return split;
}

std::vector<std::size_t> label_histogram(const Corpus& corpus, Level level, std::size_t label_count) {
    if (corpus.empty()) throw Error(ErrorCode::kInvalidArgument, "histogram of an empty corpus");
    std::vector<std::size_t> counts(label_count, 0);
    for (const auto& doc : corpus) {
        const auto label = doc.label(level);
        if (!label) {
            throw Error(ErrorCode::kInvalidArgument,
                        fmt::format("document '{}' has no {} label", doc.doc_id, to_string(level)));
        }
        if (*label < 0 || static_cast<std::size_t>(*label) >= label_count) {
            throw Error(ErrorCode::kOutOfRange, fmt::format("document '{}' label {} out of range", doc.doc_id, *label));
        }
        ++counts[static_cast<std::size_t>(*label)];
    }
    return counts;
}

Corpus select_documents(const Corpus& corpus, const std::vector<std::string>& ids) {
    std::unordered_set<std::string> wanted(ids.begin(), ids.end());
    Corpus out;
    for (const auto& doc : corpus) {
        if (wanted.erase(doc.doc_id) > 0) out.push_back(doc);
    }
    if (!wanted.empty()) {
        throw Error(ErrorCode::kNotFound, fmt::format("doc_id '{}' is not in the corpus", *wanted.begin()));
    }
    return out;
}

}  // namespace lexclass
