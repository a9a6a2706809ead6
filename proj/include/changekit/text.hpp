#pragma once

// Canonical tokenizer and Porter stemmer shared by every caption metric.

#include <string>
#include <string_view>
#include <vector>

namespace changekit {

/// Lowercase word tokens; never contains an empty token.
struct TokenSequence {
  std::vector<std::string> tokens;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
  bool operator==(const TokenSequence&) const = default;
};

/// PTB-style tokenization:
///  - ASCII letters are lowercased; whitespace separates tokens;
///  - punctuation characters become their own tokens, except hyphens inside
///    a word ("twenty-one") and '.'/',' between digits ("1.5", "1,000");
///  - the clitics n't 's 're 've 'll 'd 'm are split off ("don't" -> do n't);
///  - double quotes become `` and '' as in the Penn Treebank.
TokenSequence tokenize(std::string_view text);

/// Original Porter (1980) suffix-stripping stemmer for lowercase ASCII words.
/// Words of length <= 2 are returned unchanged.
std::string porter_stem(std::string_view word);

} // namespace changekit
