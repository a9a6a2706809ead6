#pragma once

// Change-map decoding, connected-component labeling and boundary tracing.

#include "changekit/png_io.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace changekit {

using CategoryId = std::uint16_t;
inline constexpr CategoryId kBackground = 0;

struct Category {
  CategoryId id = 0;
  std::string name;      // singular, e.g. "building"
  std::string plural;    // e.g. "buildings"
  std::uint32_t rgb = 0; // 0xRRGGBB; gray value v is stored as (v, v, v)

  bool operator==(const Category&) const = default;
};

/// Pixel color -> category mapping of a corpus. Id 0 is background.
class CategoryPalette {
public:
  CategoryPalette() = default;

  /// Adds a category; throws ConfigError on a duplicate id or color.
  void add(Category category);

  std::optional<CategoryId> lookup(std::uint32_t rgb) const;
  const Category& category(CategoryId id) const;
  bool contains(CategoryId id) const;

  /// All categories sorted by id (background first).
  std::vector<Category> categories() const;
  /// Non-background categories sorted by id.
  std::vector<Category> change_categories() const;

  /// Background plus at least one change category.
  bool valid() const;

  /// Default LEVIR-MCI-style palette: 0 background, 1 road, 2 building
  /// encoded as gray values.
  static CategoryPalette levir_mci();

  bool operator==(const CategoryPalette&) const = default;

private:
  std::map<CategoryId, Category> by_id_;
  std::map<std::uint32_t, CategoryId> by_color_;
};

/// Row-major raster of category ids.
class LabelGrid {
public:
  LabelGrid() = default;
  LabelGrid(std::size_t width, std::size_t height, CategoryId fill = kBackground);
  LabelGrid(std::size_t width, std::size_t height, std::vector<CategoryId> labels);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }

  CategoryId at(std::size_t x, std::size_t y) const { return labels_[y * width_ + x]; }
  void set(std::size_t x, std::size_t y, CategoryId c) { labels_[y * width_ + x] = c; }
  std::span<const CategoryId> labels() const noexcept { return labels_; }

  /// True iff any pixel is non-background.
  bool has_change() const;

  bool operator==(const LabelGrid&) const = default;

private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<CategoryId> labels_;
};

enum class Connectivity { four, eight };

std::string to_string(Connectivity c);
Connectivity connectivity_from_string(const std::string& s);

struct Pixel {
  std::int32_t x = 0;
  std::int32_t y = 0;
  auto operator<=>(const Pixel& o) const {
    if (auto c = y <=> o.y; c != 0) return c;
    return x <=> o.x;
  }
  bool operator==(const Pixel&) const = default;
};

struct BoundingBox {
  std::int32_t x_min = 0, y_min = 0, x_max = 0, y_max = 0;
  bool operator==(const BoundingBox&) const = default;
};

/// One counted object: a maximal connected set of same-category pixels.
struct Component {
  CategoryId category = 0;
  Connectivity connectivity = Connectivity::eight;
  std::size_t pixel_count = 0;
  BoundingBox bbox;
  std::vector<Pixel> pixels; // sorted row-major (y, then x)

  bool operator==(const Component&) const = default;
};

/// Corner point of the pixel lattice; pixel (x, y) spans [x, x+1] x [y, y+1].
struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

enum class Orientation { clockwise, counter_clockwise };

/// Closed ring; the closing edge from back() to front() is implicit.
/// Orientation follows the sign of the shoelace area of the raw (x, y)
/// coordinates: positive is counter-clockwise.
struct ClosedContour {
  std::vector<Point> vertices;
  Orientation orientation = Orientation::counter_clockwise;

  bool operator==(const ClosedContour&) const = default;
};

/// Signed shoelace area of a closed ring.
double signed_area(std::span<const Point> ring);

/// Decodes a change-map PNG via the palette. Throws DecodeFailure or
/// UnknownPixelValue (first offending pixel in raster order).
LabelGrid decode_change_map(std::span<const std::uint8_t> png_bytes, const CategoryPalette& palette);

/// Maps an already decoded RGB image through the palette.
LabelGrid labels_from_rgb(const RgbImage& image, const CategoryPalette& palette);

/// Two-pass union-find labeling of all pixels equal to `category`.
/// Components with fewer than `min_area` pixels are dropped.
/// Output is sorted by (bbox.y_min, bbox.x_min, first pixel).
std::vector<Component> connected_components(const LabelGrid& grid, CategoryId category,
                                            Connectivity connectivity = Connectivity::eight,
                                            std::size_t min_area = 0);

std::size_t count_objects(const LabelGrid& grid, CategoryId category,
                          Connectivity connectivity = Connectivity::eight, std::size_t min_area = 0);

/// Outer boundary of the component traced along pixel corners,
/// counter-clockwise, starting at the top-left corner of its first pixel.
/// Only corner vertices are kept. Holes are not traced. At pinch points the
/// ring keeps diagonal neighbours joined for eight-connected components and
/// separated for four-connected ones.
ClosedContour trace_contour(const Component& component, std::size_t grid_width, std::size_t grid_height);

} // namespace changekit
