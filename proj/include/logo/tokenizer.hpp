// SPDX-License-Identifier: Apache-2.0
//
// Whitespace-plus-punctuation tokenizer.
//
// Normalization table (applied by tokenize()):
//   space, \t, \n, \r, \v, \f    separators, never part of a token
//   [A-Za-z0-9] and bytes >= 0x80 word characters; maximal runs form one token
//   any other byte                one single-byte punctuation token
// Case is preserved; case folding happens only in entity normalization.
// Tokens are stored as byte offsets into the owning text.
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace logo {

struct Token {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    friend bool operator==(const Token&, const Token&) = default;
};

std::vector<Token> tokenize(std::string_view text);

bool is_word_byte(unsigned char c) noexcept;
bool is_space_byte(unsigned char c) noexcept;

// A token subsequence together with the text its offsets point into.
struct TokenView {
    std::string_view text;
    std::span<const Token> tokens;

    std::size_t size() const noexcept { return tokens.size(); }
    std::string_view token(std::size_t i) const {
        return text.substr(tokens[i].begin, tokens[i].size());
    }
    // Source text from the first token's start to the last token's end.
    std::string_view covered_text() const;
};

class TokenizedText {
public:
    TokenizedText() = default;
    explicit TokenizedText(std::string text);

    const std::string& text() const noexcept { return text_; }
    std::span<const Token> tokens() const noexcept { return tokens_; }
    std::size_t size() const noexcept { return tokens_.size(); }
    bool empty() const noexcept { return tokens_.empty(); }

    std::string_view token(std::size_t i) const {
        return std::string_view(text_).substr(tokens_[i].begin, tokens_[i].size());
    }

    TokenView view() const { return {text_, tokens_}; }
    TokenView view(std::size_t first, std::size_t last) const {
        return {text_, std::span<const Token>(tokens_).subspan(first, last - first)};
    }

private:
    std::string text_;
    std::vector<Token> tokens_;
};

}  // namespace logo
