#include "lexclass/tokenizer.hpp"

#include "text_util.hpp"

namespace lexclass {

std::vector<Token> tokenize_spans(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t word_begin = 0;
    bool in_word = false;

    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto cp = detail::decode_utf8(text, pos);
        const bool space = detail::is_space(cp.value);
        const bool punct = !space && detail::is_punctuation(cp.value);
        if (space || punct) {
            if (in_word) tokens.push_back({word_begin, pos, false});
            in_word = false;
            if (punct) tokens.push_back({pos, pos + cp.length, true});
        } else if (!in_word) {
            in_word = true;
            word_begin = pos;
        }
        pos += cp.length;
    }
    if (in_word) tokens.push_back({word_begin, text.size(), false});
    return tokens;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    for (const auto& t : tokenize_spans(text)) out.emplace_back(text.substr(t.begin, t.end - t.begin));
    return out;
}

std::size_t count_tokens(std::string_view text) { return tokenize_spans(text).size(); }

TokenCounter reference_token_counter() {
    return [](std::string_view text) { return count_tokens(text); };
}

}  // namespace lexclass
