#pragma once

// Polygon simplification, normalization and the polygon text grammar
//
//   polygon := '[' vertex (',' vertex)* ']'      ('(' ... ')' also accepted)
//   vertex  := '(' number ',' number ')'
//
// Canonical output is `[(x1, y1), (x2, y2), ...]` with fixed-point decimals.

#include "changekit/raster.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace changekit {

/// Vertex list with coordinates in [0, 1], relative to image width/height.
struct NormalizedPolygon {
  std::vector<Point> vertices;
  CategoryId category = 0;

  bool operator==(const NormalizedPolygon&) const = default;
};

inline constexpr int kDefaultPrecision = 2;
inline constexpr double kDefaultEpsilonFraction = 0.02;

/// Default tolerance in pixels: 2% of the larger image side.
double default_epsilon(std::size_t width, std::size_t height);

/// Distance from p to the segment [a, b].
double point_segment_distance(Point p, Point a, Point b);

/// Distance from p to the closest edge of a closed ring.
double point_ring_distance(Point p, std::span<const Point> ring);

/// Douglas-Peucker on a closed ring, split at its two mutually farthest
/// vertices. Every dropped vertex lies within `epsilon` of the result. If
/// fewer than three vertices survive, the farthest vertex of the worse chain
/// is forced in. Throws DegenerateResult when the ring has no three
/// non-collinear vertices.
ClosedContour simplify(const ClosedContour& contour, double epsilon);

/// Divides x by width and y by height. Throws OutOfBoundsVertex for vertices
/// outside [0, width] x [0, height].
NormalizedPolygon normalize(const ClosedContour& contour, std::size_t width, std::size_t height,
                            CategoryId category = 0);

/// Rounds to `precision` decimals and merges coincident consecutive vertices
/// (including last/first). A polygon that collapses below three
/// non-collinear vertices is replaced by its bounding box snapped outwards to
/// the quantization grid.
NormalizedPolygon quantize(const NormalizedPolygon& poly, int precision);

/// Emits `[(x1, y1), (x2, y2), ...]` of `quantize(poly, precision)`.
/// precision must be in [1, 6].
std::string serialize_polygon(const NormalizedPolygon& poly, int precision = kDefaultPrecision);

/// Parses the polygon grammar with optional whitespace and either square or
/// round outer brackets. Throws ParseFailure or CoordinateOutOfRange.
NormalizedPolygon parse_polygon(std::string_view text);

/// Finds every `[( ... )]` or `(( ... ))` polygon substring in free text, in order.
std::vector<std::string> extract_polygon_texts(std::string_view text);

/// Even-odd fill at pixel centers. Vertices are in pixel units.
std::vector<std::uint8_t> rasterize_ring(std::span<const Point> ring, std::size_t width, std::size_t height);

/// Rasterizes the union of polygons (normalized) at the grid's resolution.
std::vector<std::uint8_t> rasterize_polygons(std::span<const NormalizedPolygon> polys, std::size_t width,
                                             std::size_t height);

struct OverlapCounts {
  std::size_t intersection = 0;
  std::size_t union_ = 0;
};

OverlapCounts mask_overlap(std::span<const std::uint8_t> predicted, const LabelGrid& grid, CategoryId category);

/// IoU between the polygon interior and the category mask; 1.0 when both are
/// empty.
double polygon_raster_iou(const NormalizedPolygon& poly, const LabelGrid& grid, CategoryId category);

/// Component -> simplified, normalized polygon in one step.
NormalizedPolygon component_polygon(const Component& component, std::size_t width, std::size_t height,
                                    double epsilon);

} // namespace changekit
