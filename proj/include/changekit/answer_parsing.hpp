#pragma once

// Turning free-form model answers into yes/no flags, counts and polygons.

#include "changekit/geometry.hpp"
#include "changekit/raster.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace changekit {

/// First standalone "yes" or "no" (case-insensitive); "no change(s)" also
/// reads as no. Throws Unparseable when neither appears.
bool parse_yes_no(std::string_view text);

/// Words that refer to a category: its name, plural and a few synonyms
/// (house/houses for building, street/streets for road).
std::vector<std::string> category_keywords(const Category& category);

/// "three" -> 3, "twenty-one" -> 21, "42" -> 42. nullopt if not a number.
std::optional<long long> parse_number_word(std::string_view word);

/// Count for one category. The answer is split into clauses at , ; . and
/// newlines and at "and"/"but"; the first clause naming the category gives
/// the count (a number, "no"/"none" -> 0, "a"/"an" -> 1). Without a category
/// the first numeric mention anywhere is used. Throws Unparseable.
long long parse_count(std::string_view text, const std::optional<Category>& category = std::nullopt);

/// Every well-formed polygon, tagged with the category most recently named
/// before it. Polygons preceded by no category keyword are dropped. An
/// answer without polygons that says "no"/"none" parses to an empty list;
/// anything else without a usable polygon throws Unparseable.
std::vector<NormalizedPolygon> parse_localization(std::string_view text, const CategoryPalette& palette);

} // namespace changekit
