#include <algorithm>
#include <charconv>
#include <map>

#include <fmt/format.h>

#include "lexclass/error.hpp"
#include "lexclass/prompt.hpp"
#include "lexclass/tokenizer.hpp"
#include "text_util.hpp"

namespace lexclass {

namespace {

constexpr std::string_view kPlaceholders[] = {"label_block", "fewshot_block", "opinion", "retrieved_block",
                                              "label_count", "max_label_id"};

bool is_placeholder_name(std::string_view name) {
    return std::find(std::begin(kPlaceholders), std::end(kPlaceholders), name) != std::end(kPlaceholders);
}

// Finds "{name}" occurrences whose name is all [a-z_]; returns the names.
std::vector<std::string_view> placeholder_names(std::string_view text) {
    std::vector<std::string_view> names;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '{') continue;
        std::size_t j = i + 1;
        while (j < text.size() && ((text[j] >= 'a' && text[j] <= 'z') || text[j] == '_')) ++j;
        if (j > i + 1 && j < text.size() && text[j] == '}') names.push_back(text.substr(i + 1, j - i - 1));
    }
    return names;
}

std::string substitute(std::string_view text, const std::map<std::string_view, std::string>& values) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '{') {
            const auto close = text.find('}', i);
            if (close != std::string_view::npos) {
                const auto it = values.find(text.substr(i + 1, close - i - 1));
                if (it != values.end()) {
                    out += it->second;
                    i = close;
                    continue;
                }
            }
        }
        out.push_back(text[i]);
    }
    return out;
}

std::string section_body(const std::vector<std::string_view>& lines) {
    std::size_t first = 0;
    std::size_t last = lines.size();
    while (first < last && detail::trim(lines[first]).empty()) ++first;
    while (last > first && detail::trim(lines[last - 1]).empty()) --last;
    std::string body;
    for (std::size_t i = first; i < last; ++i) {
        if (i > first) body += '\n';
        std::string_view line = lines[i];
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        body += line;
    }
    return body;
}

std::size_t word_count(std::string_view s) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : s) {
        const bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r';
        if (!ws && !in_word) ++n;
        in_word = !ws;
    }
    return n;
}

}  // namespace

std::string_view to_string(LabelBlockStyle s) {
    return s == LabelBlockStyle::kNumberedNames ? "numbered_names" : "names_with_glosses";
}

std::string_view to_string(AnswerFormat f) {
    return f == AnswerFormat::kCategoryNumber ? "category_number" : "category_name";
}

LabelBlockStyle parse_label_block_style(std::string_view s) {
    if (s == "numbered_names") return LabelBlockStyle::kNumberedNames;
    if (s == "names_with_glosses") return LabelBlockStyle::kNamesWithGlosses;
    throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown label block style '{}'", s));
}

AnswerFormat parse_answer_format(std::string_view s) {
    if (s == "category_number") return AnswerFormat::kCategoryNumber;
    if (s == "category_name") return AnswerFormat::kCategoryName;
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("unknown answer format '{}' (category_number|category_name)", s));
}

PromptTemplate PromptTemplate::parse(std::string_view text) {
    PromptTemplate tmpl;
    bool have_user = false;

    std::string section;
    std::string section_arg;
    std::vector<std::string_view> body;
    std::size_t header_line = 0;

    auto flush = [&] {
        if (section.empty()) {
            if (!detail::trim(section_body(body)).empty()) {
                throw Error(ErrorCode::kParse, "template text before the first [[section]]");
            }
        } else if (section == "system") {
            tmpl.system_text = section_body(body);
        } else if (section == "user") {
            tmpl.instruction_text = section_body(body);
            have_user = true;
        } else if (section == "options") {
            for (auto line : body) {
                line = detail::trim(line);
                if (line.empty() || line.front() == '#') continue;
                const auto eq = line.find('=');
                if (eq == std::string_view::npos) {
                    throw Error(ErrorCode::kParse, fmt::format("options line '{}' is not key = value", line));
                }
                const auto key = detail::trim(line.substr(0, eq));
                const auto value = detail::trim(line.substr(eq + 1));
                if (key == "label_block_style") {
                    tmpl.label_block_style = parse_label_block_style(value);
                } else if (key == "answer_format") {
                    tmpl.answer_format = parse_answer_format(value);
                } else if (key == "excerpt_budget") {
                    std::size_t v = 0;
                    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
                    if (ec != std::errc{} || p != value.data() + value.size() || v == 0) {
                        throw Error(ErrorCode::kParse, fmt::format("excerpt_budget '{}' must be a positive integer", value));
                    }
                    tmpl.excerpt_budget = v;
                } else {
                    throw Error(ErrorCode::kParse, fmt::format("unknown template option '{}'", key));
                }
            }
        } else if (section == "example") {
            LabelId label = 0;
            auto [p, ec] = std::from_chars(section_arg.data(), section_arg.data() + section_arg.size(), label);
            if (ec != std::errc{} || p != section_arg.data() + section_arg.size()) {
                throw Error(ErrorCode::kParse, fmt::format("line {}: [[example]] needs an integer label", header_line));
            }
            auto excerpt = section_body(body);
            if (excerpt.empty()) throw Error(ErrorCode::kParse, fmt::format("line {}: empty example", header_line));
            tmpl.fewshot.push_back({std::move(excerpt), label});
        } else {
            throw Error(ErrorCode::kParse, fmt::format("line {}: unknown section [[{}]]", header_line, section));
        }
        body.clear();
    };

    std::size_t line_no = 0;
    for (auto line : detail::split(text, '\n')) {
        ++line_no;
        const auto stripped = detail::trim(line);
        if (stripped.size() > 4 && stripped.starts_with("[[") && stripped.ends_with("]]")) {
            flush();
            const auto inner = detail::trim(stripped.substr(2, stripped.size() - 4));
            const auto space = inner.find(' ');
            section = std::string(inner.substr(0, space));
            section_arg = space == std::string_view::npos ? "" : std::string(detail::trim(inner.substr(space)));
            header_line = line_no;
            continue;
        }
        body.push_back(line);
    }
    flush();

    if (!have_user) throw Error(ErrorCode::kParse, "template has no [[user]] section");
    for (const auto* part : {&tmpl.system_text, &tmpl.instruction_text}) {
        for (auto name : placeholder_names(*part)) {
            if (!is_placeholder_name(name)) {
                throw Error(ErrorCode::kParse, fmt::format("unknown placeholder {{{}}}", name));
            }
        }
    }
    return tmpl;
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
    try {
        return parse(detail::read_file(path));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::kIo) throw;
        throw Error(e.code(), fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::string render_label_block(const LabelOntology& ontology, LabelBlockStyle style, const std::vector<LabelId>& ids) {
    std::vector<LabelId> order = ids;
    if (order.empty()) {
        for (const auto& l : ontology.labels()) order.push_back(l.id);
    }
    std::string out;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& label = ontology.labels().at(static_cast<std::size_t>(order[i]));
        if (i > 0) out += "\n\n";
        if (style == LabelBlockStyle::kNumberedNames) {
            out += fmt::format("{}: {}", label.id, label.name);
            if (i + 1 < order.size()) out += ',';
        } else {
            out += "- " + label.name;
            if (!label.gloss.empty()) out += ": " + label.gloss;
        }
    }
    return out;
}

std::string render_answer(const LabelOntology& ontology, LabelId label, AnswerFormat format) {
    if (format == AnswerFormat::kCategoryNumber) return fmt::format("Category: ({})", label);
    return ontology.name(label);
}

void check_compatible(const PromptTemplate& tmpl, const LabelOntology& ontology) {
    for (const auto& l : ontology.labels()) {
        if (detail::trim(l.name).empty()) {
            throw Error(ErrorCode::kInvalidArgument,
                        fmt::format("answer-format mismatch: label {} has no name to show in the label block", l.id));
        }
        if (tmpl.answer_format == AnswerFormat::kCategoryName) {
            const bool has_digit = std::any_of(l.name.begin(), l.name.end(), [](char c) { return c >= '0' && c <= '9'; });
            if (word_count(l.name) > 2 || has_digit) {
                throw Error(ErrorCode::kInvalidArgument,
                            fmt::format("answer-format mismatch: '{}' cannot be answered as a name of at most two "
                                        "words without digits; use category_number",
                                        l.name));
            }
        }
    }
    for (const auto& ex : tmpl.fewshot) {
        if (!ontology.contains(ex.label)) {
            throw Error(ErrorCode::kOutOfRange,
                        fmt::format("few-shot example label {} is outside the {}-label ontology", ex.label,
                                    ontology.size()));
        }
    }
}

std::string truncate_excerpt(std::string_view text, std::size_t limit) {
    if (detail::trim(text).empty()) return {};
    ChunkPlan plan{ChunkStrategy::kTruncate, limit, 0, limit};
    return chunk(Document{"excerpt", std::string(text), std::nullopt, std::nullopt}, plan).front().text;
}

Prompt render_prompt(const PromptTemplate& tmpl, const LabelOntology& ontology, const PromptFields& fields) {
    check_compatible(tmpl, ontology);

    std::string fewshot;
    for (std::size_t i = 0; i < tmpl.fewshot.size(); ++i) {
        const auto& ex = tmpl.fewshot[i];
        if (i > 0) fewshot += "\n\n";
        const std::string answer = tmpl.answer_format == AnswerFormat::kCategoryNumber
                                       ? fmt::format("({})", ex.label)
                                       : ontology.name(ex.label);
        fewshot += fmt::format("Opinion (truncated): \"{}...\"\nCategory: {}",
                               truncate_excerpt(ex.excerpt, tmpl.excerpt_budget), answer);
    }

    const std::map<std::string_view, std::string> values = {
        {"label_block", fields.label_block},
        {"fewshot_block", fewshot},
        {"opinion", fmt::format("{}\n{}\n{}", kOpinionStart, fields.opinion_excerpt, kOpinionEnd)},
        {"retrieved_block", fields.retrieved_block},
        {"label_count", std::to_string(ontology.size())},
        {"max_label_id", std::to_string(ontology.size() - 1)},
    };
    return {substitute(tmpl.system_text, values), substitute(tmpl.instruction_text, values)};
}

Prompt build_prompt(const PromptTemplate& tmpl, const LabelOntology& ontology, std::string_view document_text,
                    const ChunkPlan& plan) {
    plan.validate();
    if (detail::trim(document_text).empty()) throw Error(ErrorCode::kInvalidArgument, "document text is empty");
    PromptFields fields;
    fields.label_block = render_label_block(ontology, tmpl.label_block_style);
    fields.opinion_excerpt = truncate_excerpt(document_text, std::min(tmpl.excerpt_budget, plan.limit()));
    return render_prompt(tmpl, ontology, fields);
}

std::vector<FewShotExample> select_fewshot(const Corpus& corpus, Level level, std::size_t k, std::uint64_t seed,
                                           std::size_t per_label_cap, std::size_t excerpt_budget) {
    if (k == 0) return {};
    std::vector<const Document*> labeled;
    for (const auto& doc : corpus) {
        if (doc.label(level)) labeled.push_back(&doc);
    }
    if (k > labeled.size()) {
        throw Error(ErrorCode::kInvalidArgument,
                    fmt::format("asked for {} few-shot examples but only {} documents are labeled", k, labeled.size()));
    }

    std::map<LabelId, std::size_t> used;
    std::vector<FewShotExample> out;
    for (std::size_t idx : detail::seeded_permutation(labeled.size(), seed)) {
        const Document& doc = *labeled[idx];
        const LabelId label = *doc.label(level);
        if (per_label_cap > 0 && used[label] >= per_label_cap) continue;
        ++used[label];
        out.push_back({truncate_excerpt(doc.text, excerpt_budget), label});
        if (out.size() == k) return out;
    }
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("only {} few-shot examples satisfy the per-label cap of {}", out.size(), per_label_cap));
}

}  // namespace lexclass
