#include "changekit/text.hpp"

#include <array>
#include <cctype>

namespace changekit {

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

bool is_boundary(std::string_view text, std::size_t i) {
  return i >= text.size() || !is_word_char(static_cast<unsigned char>(text[i]));
}

} // namespace

TokenSequence tokenize(std::string_view text) {
  TokenSequence out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) out.tokens.push_back(std::move(word));
    word.clear();
  };
  auto punct = [&](std::string tok) {
    flush();
    out.tokens.push_back(std::move(tok));
  };
  auto lower = [](char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); };

  static constexpr std::array<std::string_view, 6> kClitics{"s", "re", "ve", "ll", "d", "m"};

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    const auto uc = static_cast<unsigned char>(c);
    const bool next_alnum = i + 1 < text.size() && std::isalnum(static_cast<unsigned char>(text[i + 1]));

    if (std::isspace(uc)) {
      flush();
    } else if (is_word_char(uc)) {
      word += lower(c);
    } else if (c == '-' && !word.empty() && next_alnum) {
      word += c;
    } else if ((c == '.' || c == ',') && !word.empty() && std::isdigit(static_cast<unsigned char>(word.back())) &&
               i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
      word += c;
    } else if (c == '\'') {
      // n't: the 'n' is already part of the word
      if (word.size() > 1 && word.back() == 'n' && i + 1 < text.size() && lower(text[i + 1]) == 't' &&
          is_boundary(text, i + 2)) {
        word.pop_back();
        punct("n't");
        ++i;
        continue;
      }
      bool clitic = false;
      if (!word.empty()) {
        for (auto cl : kClitics) {
          std::string candidate;
          for (std::size_t k = 0; k < cl.size() && i + 1 + k < text.size(); ++k) candidate += lower(text[i + 1 + k]);
          if (candidate == cl && is_boundary(text, i + 1 + cl.size())) {
            punct("'" + std::string(cl));
            i += cl.size();
            clitic = true;
            break;
          }
        }
      }
      if (!clitic) punct("'");
    } else if (c == '"') {
      const bool opening = word.empty() && (out.tokens.empty() || i == 0 || std::isspace(static_cast<unsigned char>(text[i - 1])));
      punct(opening ? "``" : "''");
    } else {
      punct(std::string(1, c));
    }
  }
  flush();
  return out;
}

} // namespace changekit
