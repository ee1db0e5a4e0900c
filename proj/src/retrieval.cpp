#include "lexclass/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "lexclass/error.hpp"
#include "lexclass/tokenizer.hpp"
#include "text_util.hpp"

namespace lexclass {

namespace {

constexpr std::size_t kMaxTermWords = 5;

// Mirrors data/structure_markers.txt.
const char* const kDefaultMarkers[] = {"Syllabus",          "Held:",           "Opinion of the Court", "Footnote",
                                       "PER CURIAM",        "Dissenting opinion", "Concurring opinion"};

struct TokenizedTerm {
    std::vector<std::string> tokens;
    std::size_t words = 0;
};

TokenizedTerm tokenize_term(std::string_view term) {
    TokenizedTerm out;
    for (const auto& t : tokenize_spans(term)) {
        out.tokens.push_back(detail::ascii_lower(term.substr(t.begin, t.end - t.begin)));
        if (!t.punctuation) ++out.words;
    }
    return out;
}

std::string clean_term(std::string_view raw) {
    auto t = detail::trim(raw);
    while (!t.empty() && (t.front() == '\'' || t.front() == '"' || t.front() == '*')) t.remove_prefix(1);
    while (!t.empty() && (t.back() == '\'' || t.back() == '"' || t.back() == '.' || t.back() == '*')) t.remove_suffix(1);
    return detail::normalize_key(t);
}

bool is_all_caps_heading(std::string_view line) {
    if (line.size() > 80) return false;
    std::size_t letters = 0;
    for (char c : line) {
        if (c >= 'a' && c <= 'z') return false;
        if (c >= 'A' && c <= 'Z') ++letters;
    }
    return letters >= 2;
}

bool opens_with_marker(std::string_view line, const StructureMarkers& markers) {
    for (const auto& m : markers.markers) {
        if (!line.starts_with(m)) continue;
        if (line.size() == m.size()) return true;
        const char next = line[m.size()];
        if (!((next >= 'a' && next <= 'z') || (next >= 'A' && next <= 'Z'))) return true;
    }
    return false;
}

}  // namespace

std::size_t KeywordLexicon::term_count() const {
    std::size_t n = 0;
    for (const auto& [label, terms] : entries) n += terms.size();
    return n;
}

KeywordLexicon KeywordLexicon::parse(std::string_view text, const LabelOntology& ontology, bool strict) {
    KeywordLexicon lex;
    std::size_t line_no = 0;
    for (auto line : detail::split(text, '\n')) {
        ++line_no;
        line = detail::trim(line);
        if (line.empty() || line.front() == '#') continue;
        while (!line.empty() && (line.front() == '-' || line.front() == '*' || line.front() == ' ')) line.remove_prefix(1);

        const auto colon = line.find(':');
        if (colon == std::string_view::npos) {
            if (strict) throw Error(ErrorCode::kParse, fmt::format("lexicon line {}: expected 'Category: terms'", line_no));
            continue;
        }
        auto name = detail::trim(line.substr(0, colon));
        while (!name.empty() && (name.front() == '\'' || name.front() == '"' || name.front() == '*')) name.remove_prefix(1);
        while (!name.empty() && (name.back() == '\'' || name.back() == '"' || name.back() == '*')) name.remove_suffix(1);
        const auto id = ontology.find(name);
        if (!id) {
            if (strict) throw Error(ErrorCode::kNotFound, fmt::format("lexicon line {}: unknown category '{}'", line_no, name));
            continue;
        }

        auto& terms = lex.entries[*id];
        for (auto raw : detail::split(line.substr(colon + 1), ',')) {
            std::string term = clean_term(raw);
            if (term.empty()) continue;
            const auto words = tokenize_term(term).words;
            if (words == 0 || words > kMaxTermWords) {
                if (strict) {
                    throw Error(ErrorCode::kParse,
                                fmt::format("lexicon line {}: term '{}' must have 1..{} words", line_no, term, kMaxTermWords));
                }
                continue;
            }
            if (std::find(terms.begin(), terms.end(), term) == terms.end()) terms.push_back(std::move(term));
        }
    }
    for (const auto& [label, terms] : lex.entries) {
        if (terms.empty()) {
            throw Error(ErrorCode::kInvalidArgument, fmt::format("lexicon category '{}' has no terms", ontology.name(label)));
        }
    }
    if (lex.entries.empty()) throw Error(ErrorCode::kInvalidArgument, "lexicon is empty");
    return lex;
}

KeywordLexicon KeywordLexicon::load(const std::filesystem::path& path, const LabelOntology& ontology) {
    try {
        return parse(detail::read_file(path), ontology);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::kIo) throw;
        throw Error(e.code(), fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::string KeywordLexicon::to_text(const LabelOntology& ontology) const {
    std::string out;
    for (const auto& [label, terms] : entries) {
        out += fmt::format("'{}': {}\n", ontology.name(label), fmt::join(terms, ", "));
    }
    return out;
}

std::string_view to_string(ScoringRule r) {
    switch (r) {
        case ScoringRule::kPhraseLength: return "phrase_length";
        case ScoringRule::kBinary: return "binary";
        case ScoringRule::kTfIdf: return "tfidf";
    }
    return "?";
}

ScoringRule parse_scoring_rule(std::string_view s) {
    if (s == "phrase_length") return ScoringRule::kPhraseLength;
    if (s == "binary") return ScoringRule::kBinary;
    if (s == "tfidf") return ScoringRule::kTfIdf;
    throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown scoring rule '{}' (phrase_length|binary|tfidf)", s));
}

std::vector<CategoryScore> score_categories(std::string_view text, const KeywordLexicon& lexicon, ScoringRule rule) {
    if (lexicon.entries.empty()) throw Error(ErrorCode::kInvalidArgument, "lexicon is empty");

    const auto spans = tokenize_spans(text);
    std::vector<std::string> tokens;
    std::vector<bool> barrier_before;  // blank line between token i-1 and i
    tokens.reserve(spans.size());
    for (std::size_t i = 0; i < spans.size(); ++i) {
        tokens.push_back(detail::ascii_lower(text.substr(spans[i].begin, spans[i].end - spans[i].begin)));
        bool barrier = false;
        if (i > 0) {
            const auto gap = text.substr(spans[i - 1].end, spans[i].begin - spans[i - 1].end);
            barrier = std::count(gap.begin(), gap.end(), '\n') >= 2;
        }
        barrier_before.push_back(barrier);
    }
    // paragraph_end[i] = first index >= i+1 that starts a new paragraph
    std::vector<std::size_t> paragraph_end(tokens.size());
    for (std::size_t i = tokens.size(); i-- > 0;) {
        paragraph_end[i] = (i + 1 == tokens.size() || barrier_before[i + 1]) ? i + 1 : paragraph_end[i + 1];
    }

    std::map<std::string, std::size_t> document_frequency;
    if (rule == ScoringRule::kTfIdf) {
        for (const auto& [label, terms] : lexicon.entries) {
            for (const auto& t : terms) ++document_frequency[t];
        }
    }
    const double categories = static_cast<double>(lexicon.entries.size());

    std::vector<CategoryScore> scores;
    for (const auto& [label, terms] : lexicon.entries) {
        std::vector<TokenizedTerm> tokenized;
        std::unordered_map<std::string, std::vector<std::size_t>> by_first;
        for (std::size_t k = 0; k < terms.size(); ++k) {
            tokenized.push_back(tokenize_term(terms[k]));
            if (!tokenized.back().tokens.empty()) by_first[tokenized.back().tokens.front()].push_back(k);
        }

        std::vector<int> counts(terms.size(), 0);
        for (std::size_t i = 0; i < tokens.size();) {
            const auto it = by_first.find(tokens[i]);
            std::optional<std::size_t> best;
            if (it != by_first.end()) {
                for (std::size_t k : it->second) {
                    const auto& tt = tokenized[k].tokens;
                    if (i + tt.size() > paragraph_end[i]) continue;
                    if (!std::equal(tt.begin(), tt.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) continue;
                    if (!best || tt.size() > tokenized[*best].tokens.size()) best = k;
                }
            }
            if (best) {
                ++counts[*best];
                i += tokenized[*best].tokens.size();
            } else {
                ++i;
            }
        }

        CategoryScore cs;
        cs.label = label;
        for (std::size_t k = 0; k < terms.size(); ++k) {
            if (counts[k] == 0) continue;
            cs.matched_terms.emplace_back(terms[k], counts[k]);
            switch (rule) {
                case ScoringRule::kPhraseLength:
                    cs.score += counts[k] * static_cast<double>(tokenized[k].words);
                    break;
                case ScoringRule::kBinary:
                    cs.score += 1.0;
                    break;
                case ScoringRule::kTfIdf:
                    cs.score += counts[k] * std::log1p(categories / static_cast<double>(document_frequency[terms[k]]));
                    break;
            }
        }
        std::sort(cs.matched_terms.begin(), cs.matched_terms.end());
        scores.push_back(std::move(cs));
    }
    std::stable_sort(scores.begin(), scores.end(), [](const CategoryScore& a, const CategoryScore& b) {
        return a.score != b.score ? a.score > b.score : a.label < b.label;
    });
    return scores;
}

StructureMarkers StructureMarkers::defaults() {
    StructureMarkers m;
    m.markers.assign(std::begin(kDefaultMarkers), std::end(kDefaultMarkers));
    return m;
}

StructureMarkers StructureMarkers::load(const std::filesystem::path& path) {
    StructureMarkers m;
    m.markers = detail::read_list_file(path);
    return m;
}

std::vector<Segment> segment_structure(const Document& doc, const StructureMarkers& markers) {
    const std::string_view text = doc.text;
    std::vector<Segment> segments;
    std::optional<std::size_t> seg_begin;
    std::size_t seg_end = 0;
    std::optional<std::string> heading;

    auto close = [&] {
        if (!seg_begin) return;
        Segment s;
        s.doc_id = doc.doc_id;
        s.ordinal = segments.size();
        s.heading = heading;
        s.begin = *seg_begin;
        s.end = seg_end;
        s.text = std::string(text.substr(s.begin, s.end - s.begin));
        segments.push_back(std::move(s));
        seg_begin.reset();
        heading.reset();
    };

    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const auto raw = text.substr(pos, nl - pos);
        const auto line = detail::trim(raw);
        if (line.empty()) {
            close();
        } else {
            const std::size_t line_begin = static_cast<std::size_t>(line.data() - text.data());
            const bool is_heading = opens_with_marker(line, markers) || is_all_caps_heading(line);
            if (is_heading) close();
            if (!seg_begin) {
                seg_begin = line_begin;
                if (is_heading) heading = std::string(line);
            }
            seg_end = line_begin + line.size();
        }
        if (nl == text.size()) break;
        pos = nl + 1;
    }
    close();
    return segments;
}

std::vector<CategoryScore> score_document(const Document& doc, const KeywordLexicon& lexicon,
                                          const RetrievalOptions& options, const LabelOntology* ontology) {
    std::map<LabelId, CategoryScore> merged;
    std::map<LabelId, std::map<std::string, int>> terms;
    for (const auto& [label, unused] : lexicon.entries) merged[label].label = label;
    if (ontology != nullptr) {
        for (const auto& l : ontology->labels()) merged[l.id].label = l.id;
    }
    for (const auto& seg : segment_structure(doc, options.markers)) {
        for (const auto& cs : score_categories(seg.text, lexicon, options.rule)) {
            merged[cs.label].score += cs.score;
            for (const auto& [term, count] : cs.matched_terms) terms[cs.label][term] += count;
        }
    }
    std::vector<CategoryScore> out;
    for (auto& [label, cs] : merged) {
        for (const auto& tc : terms[label]) cs.matched_terms.emplace_back(tc.first, tc.second);
        out.push_back(std::move(cs));
    }
    std::stable_sort(out.begin(), out.end(), [](const CategoryScore& a, const CategoryScore& b) {
        return a.score != b.score ? a.score > b.score : a.label < b.label;
    });
    return out;
}

std::string render_retrieved_block(const std::vector<CategoryScore>& top, const LabelOntology& ontology) {
    std::string out;
    for (std::size_t i = 0; i < top.size(); ++i) {
        const auto& cs = top[i];
        if (i > 0) out += "\n\n";
        out += fmt::format("- {}: {} (score {:g}); matched terms: ", cs.label, ontology.name(cs.label), cs.score);
        if (cs.matched_terms.empty()) {
            out += "none";
        } else {
            for (std::size_t k = 0; k < cs.matched_terms.size(); ++k) {
                if (k > 0) out += ", ";
                out += fmt::format("{} x{}", cs.matched_terms[k].first, cs.matched_terms[k].second);
            }
        }
    }
    return out;
}

Prompt retrieve_and_prompt(const Document& doc, const KeywordLexicon& lexicon, std::size_t k,
                           const PromptTemplate& tmpl, const LabelOntology& ontology, const ChunkPlan& plan,
                           const RetrievalOptions& options) {
    if (k < 1 || k > ontology.size()) {
        throw Error(ErrorCode::kInvalidArgument, fmt::format("retrieval k must lie in 1..{} (got {})", ontology.size(), k));
    }
    for (const auto& [label, terms] : lexicon.entries) {
        if (!ontology.contains(label)) {
            throw Error(ErrorCode::kOutOfRange, fmt::format("lexicon label {} is not in the ontology", label));
        }
    }
    plan.validate();
    if (detail::trim(doc.text).empty()) throw Error(ErrorCode::kInvalidArgument, "document text is empty");

    auto scores = score_document(doc, lexicon, options, &ontology);
    scores.resize(k);

    std::vector<LabelId> ids;
    for (const auto& cs : scores) ids.push_back(cs.label);

    PromptFields fields;
    fields.retrieved_block = render_retrieved_block(scores, ontology);
    fields.label_block = render_label_block(ontology, tmpl.label_block_style, ids);
    fields.opinion_excerpt = truncate_excerpt(doc.text, std::min(tmpl.excerpt_budget, plan.limit()));
    return render_prompt(tmpl, ontology, fields);
}

LabelId classify_direct(const Document& doc, const KeywordLexicon& lexicon, const RetrievalOptions& options) {
    return score_document(doc, lexicon, options).front().label;
}

}  // namespace lexclass
