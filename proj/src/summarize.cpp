#include <algorithm>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "lexclass/chunker.hpp"
#include "lexclass/error.hpp"
#include "lexclass/tokenizer.hpp"
#include "text_util.hpp"

namespace lexclass {

namespace {

// Mirrors data/abbreviations.txt.
const char* const kDefaultAbbreviations[] = {
    "v",    "U.S",  "U.S.C", "S.Ct", "L.Ed", "F",    "F.2d", "F.3d", "F.Supp", "Supp", "No",   "Nos",  "Mr",
    "Mrs",  "Ms",   "Dr",    "Inc",  "Co",   "Corp", "Ltd",  "St",   "Stat",   "Cong", "Sess", "Rev",  "Cir",
    "App",  "Art",  "Amend", "Pp",   "p",    "pp",   "cl",   "ch",   "al",     "e.g",  "i.e",  "id",   "Id",
    "ibid", "cf",   "Cf",    "etc",  "Jr",   "Sr",   "J",    "JJ",   "C.J",    "Gen",  "Atty", "Dept",
};

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }
bool is_ascii_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

}  // namespace

SentenceRules SentenceRules::defaults() {
    SentenceRules rules;
    rules.abbreviations.assign(std::begin(kDefaultAbbreviations), std::end(kDefaultAbbreviations));
    return rules;
}

SentenceRules SentenceRules::load(const std::filesystem::path& path) {
    SentenceRules rules;
    rules.abbreviations = detail::read_list_file(path);
    return rules;
}

std::vector<std::pair<std::size_t, std::size_t>> split_sentences(std::string_view text, const SentenceRules& rules) {
    const std::unordered_set<std::string_view> abbrev(rules.abbreviations.begin(), rules.abbreviations.end());
    std::vector<std::pair<std::size_t, std::size_t>> out;

    auto push = [&](std::size_t b, std::size_t e) {
        const auto piece = detail::trim(text.substr(b, e - b));
        if (piece.empty()) return;
        const std::size_t begin = static_cast<std::size_t>(piece.data() - text.data());
        out.emplace_back(begin, begin + piece.size());
    };

    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c != '.' && c != '!' && c != '?') continue;

        std::size_t j = i + 1;
        while (j < text.size() && is_closer(text[j])) ++j;
        std::size_t k = j;
        while (k < text.size() && is_ascii_space(text[k])) ++k;
        if (k == j || k >= text.size() || !is_upper(text[k])) continue;

        if (c == '.') {
            std::size_t w = i;
            while (w > start && !is_ascii_space(text[w - 1])) --w;
            std::string_view word = text.substr(w, i - w);
            while (!word.empty() && (word.front() == '(' || word.front() == '[' || word.front() == '"')) {
                word.remove_prefix(1);
            }
            if (abbrev.contains(word)) continue;
            if (word.size() == 1 && is_upper(word.front())) continue;  // initials: "Mark I. Levy"
        }
        push(start, j);
        start = k;
        i = k - 1;
    }
    push(start, text.size());
    return out;
}

Summary summarize_extractive(std::string_view text, std::size_t budget, const SentenceRules& rules) {
    if (budget == 0) throw Error(ErrorCode::kInvalidArgument, "summary budget must be positive");

    Summary summary;
    const auto tokens = tokenize_spans(text);
    if (tokens.empty()) return summary;

    if (tokens.size() <= budget) {
        summary.text = std::string(text);
        summary.token_count = tokens.size();
        summary.spans.push_back({0, tokens.size()});
        return summary;
    }

    // Assign tokens to sentences by byte offset.
    const auto sentences = split_sentences(text, rules);
    std::vector<TokenSpan> sentence_spans;
    {
        std::size_t t = 0;
        for (const auto& [b, e] : sentences) {
            while (t < tokens.size() && tokens[t].begin < b) ++t;
            const std::size_t first = t;
            while (t < tokens.size() && tokens[t].end <= e) ++t;
            sentence_spans.push_back({first, t});
        }
    }

    auto truncate = [&] {
        Summary s;
        s.text = std::string(text.substr(tokens.front().begin, tokens[budget - 1].end - tokens.front().begin));
        s.token_count = budget;
        s.spans.push_back({0, budget});
        s.truncated = true;
        return s;
    };
    if (sentences.size() <= 1) return truncate();

    std::unordered_map<std::string, std::size_t> tf;
    for (const auto& t : tokens) {
        if (!t.punctuation) ++tf[detail::ascii_lower(text.substr(t.begin, t.end - t.begin))];
    }
    std::vector<double> salience(sentences.size(), 0.0);
    for (std::size_t s = 0; s < sentences.size(); ++s) {
        std::size_t words = 0;
        double total = 0.0;
        for (std::size_t t = sentence_spans[s].start; t < sentence_spans[s].end; ++t) {
            if (tokens[t].punctuation) continue;
            ++words;
            total += static_cast<double>(tf[detail::ascii_lower(text.substr(tokens[t].begin, tokens[t].end - tokens[t].begin))]);
        }
        salience[s] = words == 0 ? 0.0 : total / static_cast<double>(words);
    }

    std::vector<std::size_t> order(sentences.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return salience[a] > salience[b]; });

    std::size_t remaining = budget;
    for (std::size_t s : order) {
        const std::size_t n = sentence_spans[s].size();
        if (n == 0 || n > remaining) continue;
        summary.sentences.push_back(s);
        remaining -= n;
    }
    if (summary.sentences.empty()) return truncate();
    std::sort(summary.sentences.begin(), summary.sentences.end());

    for (std::size_t s : summary.sentences) {
        if (!summary.text.empty()) summary.text += ' ';
        summary.text += text.substr(sentences[s].first, sentences[s].second - sentences[s].first);
        summary.spans.push_back(sentence_spans[s]);
        summary.token_count += sentence_spans[s].size();
    }
    return summary;
}

}  // namespace lexclass
