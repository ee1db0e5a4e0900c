#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace lexclass {

/// Byte range of one token inside the source text.
struct Token {
    std::size_t begin = 0;
    std::size_t end = 0;
    bool punctuation = false;

    bool operator==(const Token&) const = default;
};

/// Reference tokenizer: split on Unicode whitespace; every punctuation
/// character becomes a standalone token. Model-independent so that chunk
/// budgets are testable without a model vocabulary.
std::vector<Token> tokenize_spans(std::string_view text);

std::vector<std::string> tokenize(std::string_view text);

std::size_t count_tokens(std::string_view text);

/// Hook for substituting an endpoint-matched counter where budgets are reported.
using TokenCounter = std::function<std::size_t(std::string_view)>;

TokenCounter reference_token_counter();

}  // namespace lexclass
