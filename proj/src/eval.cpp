#include "lexclass/eval.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "lexclass/error.hpp"

namespace lexclass {

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

struct DisplayRow {
    std::string model;
    std::string technique;
    std::array<double, 4> values;  // accuracy, precision, recall, f1
};

constexpr std::array<const char*, 4> kMetricHeaders = {"Accuracy", "Precision", "Recall", "F1"};

std::vector<DisplayRow> display_rows(const std::vector<RunSummary>& runs, Averaging averaging) {
    if (runs.empty()) throw Error(ErrorCode::kInvalidArgument, "nothing to compare");
    std::vector<DisplayRow> rows;
    for (const auto& r : runs) {
        const auto& m = r.report;
        DisplayRow row{r.model.empty() ? r.run : r.model, r.technique, {}};
        if (averaging == Averaging::kMacro) {
            row.values = {m.accuracy, m.macro_precision, m.macro_recall, m.macro_f1};
        } else {
            row.values = {m.accuracy, m.micro_f1, m.micro_f1, m.micro_f1};
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::array<std::string, 4> best_marks(const std::vector<DisplayRow>& rows, std::size_t i) {
    std::array<std::string, 4> out;
    for (std::size_t c = 0; c < 4; ++c) {
        double best = rows.front().values[c];
        for (const auto& r : rows) best = std::max(best, r.values[c]);
        out[c] = fmt::format("{:.3f}{}", rows[i].values[c], rows[i].values[c] == best ? "*" : "");
    }
    return out;
}

}  // namespace

std::vector<GoldLabel> gold_labels(const Corpus& corpus, Level level) {
    std::vector<GoldLabel> out;
    out.reserve(corpus.size());
    for (const auto& d : corpus) {
        const auto label = d.label(level);
        if (!label) {
            throw Error(ErrorCode::kNotFound, fmt::format("document '{}' has no {} gold label", d.doc_id, to_string(level)));
        }
        out.push_back({d.doc_id, *label});
    }
    return out;
}

std::uint64_t ConfusionMatrix::counted() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

ConfusionMatrix confusion(const std::vector<GoldLabel>& golds, const std::vector<DocumentDecision>& decisions,
                          std::size_t k) {
    if (k < 2) throw Error(ErrorCode::kInvalidArgument, "confusion matrix needs at least 2 classes");
    if (golds.size() != decisions.size()) {
        throw Error(ErrorCode::kInvalidArgument,
                    fmt::format("{} gold labels but {} decisions", golds.size(), decisions.size()));
    }
    std::map<std::string, LabelId> gold_by_id;
    for (const auto& g : golds) {
        if (g.label < 0 || static_cast<std::size_t>(g.label) >= k) {
            throw Error(ErrorCode::kOutOfRange, fmt::format("gold label {} of '{}' outside 0..{}", g.label, g.doc_id, k - 1));
        }
        if (!gold_by_id.emplace(g.doc_id, g.label).second) {
            throw Error(ErrorCode::kDuplicate, fmt::format("duplicate gold doc_id '{}'", g.doc_id));
        }
    }
    ConfusionMatrix cm(k);
    std::map<std::string, bool> seen;
    for (const auto& d : decisions) {
        const auto it = gold_by_id.find(d.doc_id);
        if (it == gold_by_id.end()) throw Error(ErrorCode::kNotFound, fmt::format("no gold label for '{}'", d.doc_id));
        if (!seen.emplace(d.doc_id, true).second) {
            throw Error(ErrorCode::kDuplicate, fmt::format("duplicate decision for '{}'", d.doc_id));
        }
        const auto gold = static_cast<std::size_t>(it->second);
        if (d.abstained || !d.label) {
            ++cm.abstain_count;
            ++cm.abstain_by_gold[gold];
            continue;
        }
        if (*d.label < 0 || static_cast<std::size_t>(*d.label) >= k) {
            throw Error(ErrorCode::kOutOfRange,
                        fmt::format("decision label {} of '{}' outside the {}-label ontology", *d.label, d.doc_id, k));
        }
        ++cm.at(gold, static_cast<std::size_t>(*d.label));
    }
    return cm;
}

std::string_view to_string(AbstainPolicy p) { return p == AbstainPolicy::kExclude ? "exclude" : "count_as_error"; }

AbstainPolicy parse_abstain_policy(std::string_view s) {
    if (s == "count_as_error") return AbstainPolicy::kCountAsError;
    if (s == "exclude") return AbstainPolicy::kExclude;
    throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown abstain policy '{}' (count_as_error|exclude)", s));
}

MetricsReport metrics(const ConfusionMatrix& cm, AbstainPolicy policy) {
    if (cm.k < 2) throw Error(ErrorCode::kInvalidArgument, "metrics need at least 2 classes");
    if (cm.counts.size() != cm.k * cm.k || cm.abstain_by_gold.size() != cm.k) {
        throw Error(ErrorCode::kInvalidArgument, "confusion matrix shape does not match k");
    }
    const std::uint64_t total = cm.total();
    if (total == 0) throw Error(ErrorCode::kInvalidArgument, "confusion matrix is empty");

    const bool penalize = policy == AbstainPolicy::kCountAsError;
    const std::uint64_t counted = cm.counted();
    std::uint64_t trace = 0;
    for (std::size_t c = 0; c < cm.k; ++c) trace += cm.at(c, c);

    MetricsReport r;
    r.policy = policy;
    r.documents = total;
    r.accuracy = ratio(trace, penalize ? total : counted);
    r.micro_f1 = ratio(trace, counted);
    r.abstain_rate = ratio(cm.abstain_count, total);

    std::size_t present = 0;
    for (std::size_t c = 0; c < cm.k; ++c) {
        std::uint64_t row = 0;
        std::uint64_t col = 0;
        for (std::size_t j = 0; j < cm.k; ++j) {
            row += cm.at(c, j);
            col += cm.at(j, c);
        }
        const std::uint64_t recall_den = row + (penalize ? cm.abstain_by_gold[c] : 0);
        ClassMetrics m;
        m.label = static_cast<LabelId>(c);
        m.precision = ratio(cm.at(c, c), col);
        m.recall = ratio(cm.at(c, c), recall_den);
        m.f1 = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
        m.support = row + cm.abstain_by_gold[c];
        if (recall_den > 0) {
            ++present;
            r.macro_precision += m.precision;
            r.macro_recall += m.recall;
            r.macro_f1 += m.f1;
        }
        r.per_class.push_back(m);
    }
    if (present > 0) {
        r.macro_precision /= static_cast<double>(present);
        r.macro_recall /= static_cast<double>(present);
        r.macro_f1 /= static_cast<double>(present);
    }
    return r;
}

nlohmann::ordered_json report_to_json(const std::string& run, const MetricsReport& report) {
    nlohmann::ordered_json j;
    j["run"] = run;
    j["accuracy"] = report.accuracy;
    j["macro_precision"] = report.macro_precision;
    j["macro_recall"] = report.macro_recall;
    j["macro_f1"] = report.macro_f1;
    j["micro_f1"] = report.micro_f1;
    j["abstain_rate"] = report.abstain_rate;
    j["abstain_policy"] = to_string(report.policy);
    j["documents"] = report.documents;
    auto& per_class = j["per_class"] = nlohmann::ordered_json::array();
    for (const auto& c : report.per_class) {
        per_class.push_back(
            {{"label", c.label}, {"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}});
    }
    return j;
}

RunSummary RunSummary::from_json(const nlohmann::json& j) {
    try {
        RunSummary s;
        s.run = j.at("run").get<std::string>();
        s.model = j.value("model", "");
        s.technique = j.value("technique", "");
        auto& r = s.report;
        r.accuracy = j.at("accuracy").get<double>();
        r.macro_precision = j.at("macro_precision").get<double>();
        r.macro_recall = j.at("macro_recall").get<double>();
        r.macro_f1 = j.at("macro_f1").get<double>();
        r.micro_f1 = j.at("micro_f1").get<double>();
        r.abstain_rate = j.at("abstain_rate").get<double>();
        if (j.contains("abstain_policy")) r.policy = parse_abstain_policy(j.at("abstain_policy").get<std::string>());
        r.documents = j.value("documents", std::uint64_t{0});
        for (const auto& c : j.at("per_class")) {
            r.per_class.push_back({c.at("label").get<LabelId>(), c.at("precision").get<double>(),
                                   c.at("recall").get<double>(), c.at("f1").get<double>(),
                                   c.at("support").get<std::uint64_t>()});
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kParse, std::string("malformed metrics report: ") + e.what());
    }
}

std::string_view to_string(Averaging a) { return a == Averaging::kMacro ? "macro" : "micro"; }

Averaging parse_averaging(std::string_view s) {
    if (s == "macro") return Averaging::kMacro;
    if (s == "micro") return Averaging::kMicro;
    throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown averaging '{}' (macro|micro)", s));
}

std::string compare_runs(const std::vector<RunSummary>& runs, Averaging averaging) {
    const auto rows = display_rows(runs, averaging);
    std::vector<std::array<std::string, 6>> cells;
    cells.push_back({"Model", "Technique", kMetricHeaders[0], kMetricHeaders[1], kMetricHeaders[2], kMetricHeaders[3]});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto marks = best_marks(rows, i);
        cells.push_back({rows[i].model, rows[i].technique, marks[0], marks[1], marks[2], marks[3]});
    }
    std::array<std::size_t, 6> width{};
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < 6; ++c) width[c] = std::max(width[c], row[c].size());
    }
    std::string out;
    for (std::size_t r = 0; r < cells.size(); ++r) {
        std::string line;
        for (std::size_t c = 0; c < 6; ++c) {
            if (c > 0) line += "  ";
            line += c < 2 ? fmt::format("{:<{}}", cells[r][c], width[c]) : fmt::format("{:>{}}", cells[r][c], width[c]);
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line + '\n';
        if (r == 0) {
            std::size_t rule = 10;
            for (auto w : width) rule += w;
            out += std::string(rule, '-') + '\n';
        }
    }
    out += fmt::format("Precision/Recall/F1: {} average; * = best per column\n", to_string(averaging));
    return out;
}

std::string compare_runs_csv(const std::vector<RunSummary>& runs, Averaging averaging) {
    const auto rows = display_rows(runs, averaging);
    std::string out = "model,technique,accuracy,precision,recall,f1,averaging\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{:.3f},{:.3f},{:.3f},{:.3f},{}\n", r.model, r.technique, r.values[0], r.values[1],
                           r.values[2], r.values[3], to_string(averaging));
    }
    return out;
}

nlohmann::ordered_json compare_runs_json(const std::vector<RunSummary>& runs, Averaging averaging) {
    const auto rows = display_rows(runs, averaging);
    nlohmann::ordered_json j;
    j["averaging"] = to_string(averaging);
    auto& arr = j["rows"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        nlohmann::ordered_json row;
        row["run"] = runs[i].run;
        row["model"] = rows[i].model;
        row["technique"] = rows[i].technique;
        for (std::size_t c = 0; c < 4; ++c) {
            double best = rows.front().values[c];
            for (const auto& r : rows) best = std::max(best, r.values[c]);
            std::string key = kMetricHeaders[c];
            std::transform(key.begin(), key.end(), key.begin(), [](unsigned char ch) { return std::tolower(ch); });
            row[key] = rows[i].values[c];
            row[key + "_best"] = rows[i].values[c] == best;
        }
        arr.push_back(std::move(row));
    }
    return j;
}

}  // namespace lexclass
