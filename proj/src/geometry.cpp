#include "changekit/geometry.hpp"

#include "changekit/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace changekit {

double default_epsilon(std::size_t width, std::size_t height) {
  return kDefaultEpsilonFraction * static_cast<double>(std::max(width, height));
}

double point_segment_distance(Point p, Point a, Point b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

double point_ring_distance(Point p, std::span<const Point> ring) {
  double best = INFINITY;
  for (std::size_t i = 0; i < ring.size(); ++i)
    best = std::min(best, point_segment_distance(p, ring[i], ring[(i + 1) % ring.size()]));
  return best;
}

// --- simplification ----------------------------------------------------------

namespace {

std::vector<Point> drop_repeats(std::span<const Point> ring) {
  std::vector<Point> out;
  for (const auto& p : ring)
    if (out.empty() || !(out.back() == p)) out.push_back(p);
  while (out.size() > 1 && out.back() == out.front()) out.pop_back();
  return out;
}

bool has_three_non_collinear(std::span<const Point> pts) {
  if (pts.size() < 3) return false;
  const Point a = pts[0];
  std::size_t j = 1;
  while (j < pts.size() && pts[j] == a) ++j;
  if (j == pts.size()) return false;
  const Point b = pts[j];
  for (std::size_t k = j + 1; k < pts.size(); ++k) {
    const double cross = (b.x - a.x) * (pts[k].y - a.y) - (b.y - a.y) * (pts[k].x - a.x);
    if (cross != 0.0) return true;
  }
  return false;
}

class RingSimplifier {
public:
  RingSimplifier(const std::vector<Point>& ring, double epsilon)
      : ring_(ring), epsilon_(epsilon), keep_(ring.size(), false) {}

  std::size_t at(std::size_t chain_start, std::size_t offset) const { return (chain_start + offset) % ring_.size(); }

  // Farthest interior vertex of the chain start..start+len (cyclic).
  std::pair<std::size_t, double> farthest(std::size_t start, std::size_t len) const {
    std::size_t best = 0;
    double best_d = -1.0;
    const Point a = ring_[at(start, 0)], b = ring_[at(start, len)];
    for (std::size_t k = 1; k < len; ++k) {
      const double d = point_segment_distance(ring_[at(start, k)], a, b);
      if (d > best_d) {
        best_d = d;
        best = k;
      }
    }
    return {best, best_d};
  }

  void run(std::size_t start, std::size_t len) {
    if (len < 2) return;
    const auto [k, d] = farthest(start, len);
    if (d <= epsilon_) return;
    keep_[at(start, k)] = true;
    run(start, k);
    run(at(start, k), len - k);
  }

  void force_split(std::size_t start, std::size_t len) {
    const auto [k, d] = farthest(start, len);
    keep_[at(start, k)] = true;
    run(start, k);
    run(at(start, k), len - k);
  }

  void keep(std::size_t i) { keep_[i] = true; }
  std::size_t kept() const { return static_cast<std::size_t>(std::count(keep_.begin(), keep_.end(), true)); }

  std::vector<Point> result() const {
    std::vector<Point> out;
    for (std::size_t i = 0; i < ring_.size(); ++i)
      if (keep_[i]) out.push_back(ring_[i]);
    return out;
  }

private:
  const std::vector<Point>& ring_;
  double epsilon_;
  std::vector<bool> keep_;
};

} // namespace

ClosedContour simplify(const ClosedContour& contour, double epsilon) {
  if (!(epsilon >= 0.0)) throw DegenerateResult("epsilon must be non-negative");
  const auto ring = drop_repeats(contour.vertices);
  if (!has_three_non_collinear(ring)) throw DegenerateResult("ring has no three non-collinear vertices");

  const std::size_t n = ring.size();
  std::size_t ia = 0, ib = 1;
  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::hypot(ring[i].x - ring[j].x, ring[i].y - ring[j].y);
      if (d > best) {
        best = d;
        ia = i;
        ib = j;
      }
    }

  RingSimplifier dp(ring, epsilon);
  dp.keep(ia);
  dp.keep(ib);
  const std::size_t len_ab = ib - ia;
  const std::size_t len_ba = n - len_ab;
  dp.run(ia, len_ab);
  dp.run(ib, len_ba);

  if (dp.kept() < 3) {
    const double dev_ab = len_ab > 1 ? dp.farthest(ia, len_ab).second : -1.0;
    const double dev_ba = len_ba > 1 ? dp.farthest(ib, len_ba).second : -1.0;
    if (dev_ab >= dev_ba) dp.force_split(ia, len_ab);
    else dp.force_split(ib, len_ba);
  }

  auto out = dp.result();
  if (!has_three_non_collinear(out)) throw DegenerateResult("simplified ring collapsed to a line");
  const auto orientation = signed_area(out) >= 0.0 ? Orientation::counter_clockwise : Orientation::clockwise;
  return {std::move(out), orientation};
}

// --- normalization & quantization ---------------------------------------------

NormalizedPolygon normalize(const ClosedContour& contour, std::size_t width, std::size_t height,
                            CategoryId category) {
  if (width == 0 || height == 0) throw OutOfBoundsVertex("image dimensions must be positive");
  const double w = static_cast<double>(width), h = static_cast<double>(height);
  NormalizedPolygon out;
  out.category = category;
  out.vertices.reserve(contour.vertices.size());
  for (const auto& v : contour.vertices) {
    if (!(v.x >= 0.0 && v.x <= w && v.y >= 0.0 && v.y <= h)) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "vertex (%g, %g) outside %zux%zu image", v.x, v.y, width, height);
      throw OutOfBoundsVertex(buf);
    }
    out.vertices.push_back({v.x / w, v.y / h});
  }
  return out;
}

namespace {

double scale_for(int precision) {
  static constexpr std::array<double, 7> kScales{1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6};
  return kScales[static_cast<std::size_t>(precision)];
}

void check_precision(int precision) {
  if (precision < 1 || precision > 6) throw ConfigError("polygon precision must be within [1, 6]");
}

} // namespace

NormalizedPolygon quantize(const NormalizedPolygon& poly, int precision) {
  check_precision(precision);
  const double scale = scale_for(precision);
  auto q = [&](double v) { return std::clamp(std::round(v * scale) / scale, 0.0, 1.0); };

  std::vector<Point> rounded;
  rounded.reserve(poly.vertices.size());
  for (const auto& v : poly.vertices) rounded.push_back({q(v.x), q(v.y)});
  auto merged = drop_repeats(rounded);
  if (has_three_non_collinear(merged)) return {std::move(merged), poly.category};

  if (poly.vertices.empty()) throw DegenerateResult("cannot quantize an empty polygon");
  double x0 = 1.0, y0 = 1.0, x1 = 0.0, y1 = 0.0;
  for (const auto& v : poly.vertices) {
    x0 = std::min(x0, v.x);
    y0 = std::min(y0, v.y);
    x1 = std::max(x1, v.x);
    y1 = std::max(y1, v.y);
  }
  auto snap = [&](double& lo, double& hi) {
    lo = std::clamp(std::floor(lo * scale + 1e-9) / scale, 0.0, 1.0);
    hi = std::clamp(std::ceil(hi * scale - 1e-9) / scale, 0.0, 1.0);
    if (hi <= lo) {
      if (hi + 1.0 / scale <= 1.0) hi = std::round((lo + 1.0 / scale) * scale) / scale;
      else lo = std::round((hi - 1.0 / scale) * scale) / scale;
    }
  };
  snap(x0, x1);
  snap(y0, y1);
  return {{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, poly.category};
}

std::string serialize_polygon(const NormalizedPolygon& poly, int precision) {
  const auto q = quantize(poly, precision);
  std::string out = "[";
  char buf[64];
  for (std::size_t i = 0; i < q.vertices.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s(%.*f, %.*f)", i ? ", " : "", precision, q.vertices[i].x, precision,
                  q.vertices[i].y);
    out += buf;
  }
  out += "]";
  return out;
}

// --- parsing -------------------------------------------------------------------

namespace {

class PolygonParser {
public:
  explicit PolygonParser(std::string_view text) : text_(text) {}

  NormalizedPolygon parse() {
    skip_ws();
    const char open = peek();
    if (open != '[' && open != '(') fail("expected '[' or '(' to open the polygon");
    ++pos_;
    const char close = open == '[' ? ']' : ')';

    std::vector<Point> vertices;
    for (;;) {
      skip_ws();
      vertices.push_back(vertex());
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() == close) {
        ++pos_;
        break;
      }
      fail(std::string("expected ',' or '") + close + "'");
    }
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters after polygon");

    auto merged = drop_repeats(vertices);
    if (merged.size() < 3) fail("a polygon needs at least 3 distinct vertices");
    return {std::move(merged), 0};
  }

private:
  Point vertex() {
    expect('(');
    skip_ws();
    const double x = number();
    skip_ws();
    expect(',');
    skip_ws();
    const double y = number();
    skip_ws();
    expect(')');
    return {x, y};
  }

  double number() {
    const std::size_t start = pos_;
    std::size_t end = pos_;
    while (end < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.' ||
                                  text_[end] == '-' || text_[end] == '+' || text_[end] == 'e' || text_[end] == 'E'))
      ++end;
    std::string_view token = text_.substr(start, end - start);
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size()) fail("expected a number");
    if (!(value >= 0.0 && value <= 1.0)) {
      throw CoordinateOutOfRange("coordinate " + std::string(token) + " at position " + std::to_string(start) +
                                 " is outside [0, 1]");
    }
    pos_ = end;
    return value;
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& reason) const { throw ParseFailure(pos_, reason); }

  std::string_view text_;
  std::size_t pos_ = 0;
};

} // namespace

NormalizedPolygon parse_polygon(std::string_view text) { return PolygonParser(text).parse(); }

std::vector<std::string> extract_polygon_texts(std::string_view text) {
  std::vector<std::string> out;
  auto skip_space = [&](std::size_t k) {
    while (k < text.size() && std::isspace(static_cast<unsigned char>(text[k]))) ++k;
    return k;
  };
  std::size_t pos = 0;
  while ((pos = text.find_first_of("[(", pos)) != std::string_view::npos) {
    const bool square = text[pos] == '[';
    std::size_t k = skip_space(pos + 1);
    if (k >= text.size() || text[k] != '(') {
      ++pos;
      continue;
    }
    std::size_t close = std::string_view::npos;
    if (square) {
      close = text.find(']', k);
    } else {
      // Round outer brackets only when a coordinate follows, so prose like "(see (a))" is ignored.
      const auto first = skip_space(k + 1);
      if (first >= text.size() || !(std::isdigit(static_cast<unsigned char>(text[first])) || text[first] == '.')) {
        ++pos;
        continue;
      }
      for (auto c = text.find(')', k); c != std::string_view::npos; c = text.find(')', c + 1)) {
        const auto after = skip_space(c + 1);
        if (after < text.size() && text[after] == ')') {
          close = after;
          break;
        }
      }
    }
    if (close == std::string_view::npos) {
      out.emplace_back(text.substr(pos));
      break;
    }
    out.emplace_back(text.substr(pos, close - pos + 1));
    pos = close + 1;
  }
  return out;
}

// --- rasterization & IoU -------------------------------------------------------

std::vector<std::uint8_t> rasterize_ring(std::span<const Point> ring, std::size_t width, std::size_t height) {
  std::vector<std::uint8_t> mask(width * height, 0);
  if (ring.size() < 3) return mask;
  std::vector<double> xs;
  const auto w = static_cast<long long>(width);
  for (std::size_t j = 0; j < height; ++j) {
    const double yc = static_cast<double>(j) + 0.5;
    xs.clear();
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const Point a = ring[i], b = ring[(i + 1) % ring.size()];
      if ((a.y <= yc) != (b.y <= yc)) xs.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const auto lo = std::clamp(static_cast<long long>(std::ceil(xs[k] - 0.5)), 0LL, w);
      const auto hi = std::clamp(static_cast<long long>(std::ceil(xs[k + 1] - 0.5)), 0LL, w);
      for (auto x = lo; x < hi; ++x) mask[j * width + static_cast<std::size_t>(x)] = 1;
    }
  }
  return mask;
}

std::vector<std::uint8_t> rasterize_polygons(std::span<const NormalizedPolygon> polys, std::size_t width,
                                             std::size_t height) {
  std::vector<std::uint8_t> mask(width * height, 0);
  std::vector<Point> ring;
  for (const auto& poly : polys) {
    ring.clear();
    for (const auto& v : poly.vertices)
      ring.push_back({v.x * static_cast<double>(width), v.y * static_cast<double>(height)});
    const auto m = rasterize_ring(ring, width, height);
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] |= m[i];
  }
  return mask;
}

OverlapCounts mask_overlap(std::span<const std::uint8_t> predicted, const LabelGrid& grid, CategoryId category) {
  OverlapCounts out;
  const auto labels = grid.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool truth = labels[i] == category;
    const bool pred = predicted[i] != 0;
    out.intersection += truth && pred;
    out.union_ += truth || pred;
  }
  return out;
}

double polygon_raster_iou(const NormalizedPolygon& poly, const LabelGrid& grid, CategoryId category) {
  const auto mask = rasterize_polygons(std::span(&poly, 1), grid.width(), grid.height());
  const auto counts = mask_overlap(mask, grid, category);
  if (counts.union_ == 0) return 1.0;
  return static_cast<double>(counts.intersection) / static_cast<double>(counts.union_);
}

NormalizedPolygon component_polygon(const Component& component, std::size_t width, std::size_t height,
                                    double epsilon) {
  const auto contour = trace_contour(component, width, height);
  return normalize(simplify(contour, epsilon), width, height, component.category);
}

} // namespace changekit
