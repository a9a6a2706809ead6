#include "changekit/answer_parsing.hpp"

#include "changekit/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>

namespace changekit {

namespace {

struct Word {
  std::string text; // lowercase letters, digits and inner hyphens
  std::size_t pos = 0;
};

std::vector<Word> words(std::string_view text) {
  std::vector<Word> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!std::isalnum(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    Word w;
    w.pos = i;
    while (i < text.size()) {
      const auto c = static_cast<unsigned char>(text[i]);
      if (std::isalnum(c)) {
        w.text += static_cast<char>(std::tolower(c));
      } else if (c == '-' && i + 1 < text.size() && std::isalnum(static_cast<unsigned char>(text[i + 1]))) {
        w.text += '-';
      } else {
        break;
      }
      ++i;
    }
    out.push_back(std::move(w));
  }
  return out;
}

constexpr std::array<std::string_view, 20> kUnits{
    "zero",    "one",     "two",       "three",    "four",    "five",    "six",
    "seven",   "eight",   "nine",      "ten",      "eleven",  "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen"};
constexpr std::array<std::string_view, 8> kTens{"twenty", "thirty", "forty", "fifty",
                                                "sixty",  "seventy", "eighty", "ninety"};

std::optional<long long> unit_value(std::string_view w) {
  for (std::size_t i = 0; i < kUnits.size(); ++i)
    if (kUnits[i] == w) return static_cast<long long>(i);
  return std::nullopt;
}

std::optional<long long> tens_value(std::string_view w) {
  for (std::size_t i = 0; i < kTens.size(); ++i)
    if (kTens[i] == w) return static_cast<long long>(20 + 10 * i);
  return std::nullopt;
}

// Reads a number starting at words[i]; `used` receives the word count.
std::optional<long long> read_number(const std::vector<Word>& ws, std::size_t i, std::size_t& used) {
  used = 1;
  auto v = parse_number_word(ws[i].text);
  if (!v) return std::nullopt;
  // "twenty one"
  if (tens_value(ws[i].text) && i + 1 < ws.size()) {
    auto u = unit_value(ws[i + 1].text);
    if (u && *u >= 1 && *u <= 9) {
      *v += *u;
      used = 2;
    }
  }
  // "one hundred [and] five"
  if (i + used < ws.size() && ws[i + used].text == "hundred" && *v >= 1 && *v <= 9) {
    *v *= 100;
    ++used;
    std::size_t k = i + used;
    if (k < ws.size() && ws[k].text == "and") ++k;
    std::size_t more = 0;
    if (k < ws.size()) {
      if (auto rest = read_number(ws, k, more); rest && *rest < 100) {
        *v += *rest;
        used = k + more - i;
      }
    }
  }
  return v;
}

bool is_clause_break(char c) { return c == ',' || c == ';' || c == '.' || c == '\n' || c == '!' || c == '?'; }

// Splits at punctuation (keeping "1.5"-style digits together) and at the
// conjunctions "and"/"but".
std::vector<std::vector<Word>> clauses(std::string_view text) {
  std::vector<std::vector<Word>> out(1);
  std::size_t cursor = 0;
  for (auto& w : words(text)) {
    for (; cursor < w.pos; ++cursor) {
      if (is_clause_break(text[cursor]) && !out.back().empty()) out.emplace_back();
    }
    cursor = w.pos + w.text.size();
    if (w.text == "and" || w.text == "but") {
      if (!out.back().empty()) out.emplace_back();
      continue;
    }
    out.back().push_back(std::move(w));
  }
  if (out.back().empty()) out.pop_back();
  return out;
}

bool is_negation(std::string_view w) { return w == "no" || w == "none" || w == "nothing"; }

} // namespace

bool parse_yes_no(std::string_view text) {
  for (const auto& w : words(text)) {
    if (w.text == "yes") return true;
    if (w.text == "no") return false;
  }
  throw Unparseable("no yes/no answer in: " + std::string(text));
}

std::vector<std::string> category_keywords(const Category& category) {
  std::vector<std::string> out{category.name, category.plural};
  if (category.name == "building") out.insert(out.end(), {"house", "houses"});
  if (category.name == "road") out.insert(out.end(), {"street", "streets"});
  for (auto& k : out)
    std::transform(k.begin(), k.end(), k.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<long long> parse_number_word(std::string_view raw) {
  if (raw.empty()) return std::nullopt;
  std::string lower(raw);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  const std::string_view word = lower;
  if (std::all_of(word.begin(), word.end(), [](unsigned char c) { return std::isdigit(c); })) {
    long long v = 0;
    auto [p, ec] = std::from_chars(word.data(), word.data() + word.size(), v);
    if (ec != std::errc{} || p != word.data() + word.size()) return std::nullopt;
    return v;
  }
  if (auto u = unit_value(word)) return u;
  if (auto t = tens_value(word)) return t;
  const auto dash = word.find('-');
  if (dash != std::string_view::npos) {
    auto t = tens_value(word.substr(0, dash));
    auto u = unit_value(word.substr(dash + 1));
    if (t && u && *u >= 1 && *u <= 9) return *t + *u;
  }
  return std::nullopt;
}

long long parse_count(std::string_view text, const std::optional<Category>& category) {
  if (!category) {
    const auto ws = words(text);
    for (std::size_t i = 0; i < ws.size(); ++i) {
      std::size_t used = 0;
      if (auto v = read_number(ws, i, used)) return *v;
    }
    for (const auto& w : ws)
      if (is_negation(w.text)) return 0;
    throw Unparseable("no count in: " + std::string(text));
  }

  const auto keys = category_keywords(*category);
  auto is_key = [&](const std::string& w) { return std::find(keys.begin(), keys.end(), w) != keys.end(); };
  for (const auto& clause : clauses(text)) {
    if (std::none_of(clause.begin(), clause.end(), [&](const Word& w) { return is_key(w.text); })) continue;
    for (std::size_t i = 0; i < clause.size(); ++i) {
      std::size_t used = 0;
      if (auto v = read_number(clause, i, used)) return *v;
    }
    for (const auto& w : clause)
      if (is_negation(w.text)) return 0;
    for (std::size_t i = 0; i + 1 < clause.size(); ++i) {
      if (clause[i].text != "a" && clause[i].text != "an") continue;
      // "a new building", "an old road"
      for (std::size_t k = i + 1; k < clause.size() && k <= i + 3; ++k)
        if (is_key(clause[k].text)) return 1;
    }
  }
  throw Unparseable("no count for " + category->plural + " in: " + std::string(text));
}

std::vector<NormalizedPolygon> parse_localization(std::string_view text, const CategoryPalette& palette) {
  const auto ws = words(text);
  const auto cats = palette.change_categories();
  auto category_at = [&](std::size_t pos) -> std::optional<CategoryId> {
    std::optional<CategoryId> found;
    for (const auto& w : ws) {
      if (w.pos >= pos) break;
      for (const auto& c : cats) {
        const auto keys = category_keywords(c);
        if (std::find(keys.begin(), keys.end(), w.text) != keys.end()) found = c.id;
      }
    }
    return found;
  };

  std::vector<NormalizedPolygon> out;
  std::size_t found_texts = 0;
  std::size_t from = 0;
  for (const auto& sub : extract_polygon_texts(text)) {
    const auto pos = text.find(sub, from);
    from = pos == std::string_view::npos ? from : pos + sub.size();
    ++found_texts;
    NormalizedPolygon poly;
    try {
      poly = parse_polygon(sub);
    } catch (const Error&) {
      continue;
    }
    const auto cat = category_at(pos == std::string_view::npos ? text.size() : pos);
    if (!cat) continue;
    poly.category = *cat;
    out.push_back(std::move(poly));
  }
  if (!out.empty()) return out;
  if (found_texts == 0)
    for (const auto& w : ws)
      if (is_negation(w.text)) return out;
  throw Unparseable("no usable polygon in: " + std::string(text));
}

} // namespace changekit
