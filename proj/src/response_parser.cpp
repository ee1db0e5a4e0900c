#include <charconv>
#include <regex>
#include <set>

#include <fmt/format.h>

#include "lexclass/prompt.hpp"
#include "text_util.hpp"

namespace lexclass {

namespace {

bool is_alnum(char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Values that do not fit an int are reported as out of range rather than wrapped.
long long to_integer(std::string_view digits) {
    long long v = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc{}) return std::numeric_limits<long long>::max();
    return v;
}

std::string strip_reasoning(std::string_view raw) {
    std::string s(raw);
    for (;;) {
        const auto open = s.find("<think>");
        if (open == std::string::npos) break;
        const auto close = s.find("</think>", open);
        if (close == std::string::npos) {
            s.erase(open);
            break;
        }
        s.erase(open, close + 8 - open);
    }
    if (const auto close = s.find("</think>"); close != std::string::npos) s.erase(0, close + 8);
    return s;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

ParseResult failure(ParseFailure kind, std::string_view raw, std::string detail) {
    ParseResult r;
    r.failure = kind;
    r.raw = std::string(raw);
    r.detail = std::move(detail);
    return r;
}

ParseResult success(LabelId label, ParseMethod method, std::string_view raw, std::optional<double> confidence) {
    ParseResult r;
    r.parsed = ParsedLabel{label, method, std::string(raw), confidence};
    r.raw = std::string(raw);
    return r;
}

ParseResult check_range(long long value, const LabelOntology& ontology, ParseMethod method, std::string_view raw,
                        std::optional<double> confidence) {
    if (value < 0 || value >= static_cast<long long>(ontology.size())) {
        return failure(ParseFailure::kOutOfRange, raw,
                       fmt::format("category {} is outside 0..{}", value, ontology.size() - 1));
    }
    return success(static_cast<LabelId>(value), method, raw, confidence);
}

}  // namespace

std::string_view to_string(ParseMethod m) {
    switch (m) {
        case ParseMethod::kParenthesizedNumber: return "parenthesized_number";
        case ParseMethod::kBareNumber: return "bare_number";
        case ParseMethod::kExactName: return "exact_name";
        case ParseMethod::kFuzzyName: return "fuzzy_name";
    }
    return "?";
}

std::string_view to_string(ParseFailure f) {
    switch (f) {
        case ParseFailure::kNoParse: return "no_parse";
        case ParseFailure::kOutOfRange: return "out_of_range";
        case ParseFailure::kMultipleCandidates: return "multiple_candidates";
    }
    return "?";
}

ParseResult parse_response(std::string_view raw, const LabelOntology& ontology, AnswerFormat format,
                           const ParseOptions& options) {
    std::string text = strip_reasoning(raw);

    std::optional<double> confidence;
    {
        static const std::regex conf_re(R"([Cc]onfidence\s*[:=]\s*([0-9]*\.?[0-9]+))");
        std::smatch m;
        if (std::regex_search(text, m, conf_re)) {
            const double c = std::stod(m[1].str());
            if (c >= 0.0 && c <= 1.0) confidence = c;
            text.erase(static_cast<std::size_t>(m.position(0)), static_cast<std::size_t>(m.length(0)));
        }
    }

    // 1. "(N)"
    {
        static const std::regex paren_re(R"(\(\s*(-?[0-9]+)\s*\))");
        std::set<long long> values;
        for (auto it = std::sregex_iterator(text.begin(), text.end(), paren_re); it != std::sregex_iterator(); ++it) {
            values.insert(to_integer((*it)[1].str()));
        }
        if (values.size() > 1) {
            return failure(ParseFailure::kMultipleCandidates, raw,
                           fmt::format("{} distinct parenthesized categories", values.size()));
        }
        if (values.size() == 1) {
            return check_range(*values.begin(), ontology, ParseMethod::kParenthesizedNumber, raw, confidence);
        }
    }

    // 2. one distinct bare integer
    {
        std::set<long long> values;
        for (std::size_t i = 0; i < text.size();) {
            if (!is_digit(text[i]) || (i > 0 && is_alnum(text[i - 1]))) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < text.size() && is_digit(text[j])) ++j;
            if (j == text.size() || !is_alnum(text[j])) {
                const long long v = to_integer(std::string_view(text).substr(i, j - i));
                values.insert(i > 0 && text[i - 1] == '-' ? -v : v);
            }
            i = j;
        }
        if (values.size() > 1) {
            return failure(ParseFailure::kMultipleCandidates, raw,
                           fmt::format("{} distinct numbers and no parenthesized category", values.size()));
        }
        if (values.size() == 1) {
            return check_range(*values.begin(), ontology, ParseMethod::kBareNumber, raw, confidence);
        }
    }

    // 3. exact name of at most two words
    std::string_view candidate = detail::trim(text);
    if (detail::ascii_lower(candidate.substr(0, 8)) == "category") {
        std::string_view rest = candidate.substr(8);
        if (rest.empty() || rest.front() == ':' || rest.front() == ' ') candidate = rest;
    }
    const auto edge = [](char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' ||
               (c > 0 && static_cast<unsigned char>(c) < 0x80 && detail::is_punctuation(static_cast<char32_t>(c)));
    };
    while (!candidate.empty() && edge(candidate.front())) candidate.remove_prefix(1);
    while (!candidate.empty() && edge(candidate.back())) candidate.remove_suffix(1);

    const std::string key = detail::normalize_key(candidate);
    const auto words = std::count(key.begin(), key.end(), ' ') + (key.empty() ? 0 : 1);
    if (!key.empty() && words <= 2) {
        if (const auto id = ontology.find(key)) return success(*id, ParseMethod::kExactName, raw, confidence);
        if (options.fuzzy_names) {
            std::optional<LabelId> best;
            std::size_t best_distance = options.max_edit_distance + 1;
            bool tie = false;
            for (const auto& label : ontology.labels()) {
                const auto d = edit_distance(key, detail::normalize_key(label.name));
                if (d < best_distance) {
                    best = label.id;
                    best_distance = d;
                    tie = false;
                } else if (d == best_distance) {
                    tie = true;
                }
            }
            if (best && !tie) return success(*best, ParseMethod::kFuzzyName, raw, confidence);
        }
    }
    return failure(ParseFailure::kNoParse, raw,
                   fmt::format("no {} found in response", format == AnswerFormat::kCategoryNumber
                                                              ? "category number"
                                                              : "category name"));
}

}  // namespace lexclass
