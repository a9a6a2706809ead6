#include "changekit/raster.hpp"

#include "changekit/error.hpp"

#include <algorithm>
#include <numeric>

namespace changekit {

// --- palette ---------------------------------------------------------------

void CategoryPalette::add(Category category) {
  if (by_id_.count(category.id)) throw ConfigError("duplicate category id " + std::to_string(category.id));
  if (by_color_.count(category.rgb)) throw ConfigError("duplicate category color for '" + category.name + "'");
  if (category.plural.empty()) category.plural = category.name + "s";
  by_color_[category.rgb] = category.id;
  by_id_[category.id] = std::move(category);
}

std::optional<CategoryId> CategoryPalette::lookup(std::uint32_t rgb) const {
  const auto it = by_color_.find(rgb);
  if (it == by_color_.end()) return std::nullopt;
  return it->second;
}

const Category& CategoryPalette::category(CategoryId id) const {
  const auto it = by_id_.find(id);
  if (it == by_id_.end()) throw ConfigError("unknown category id " + std::to_string(id));
  return it->second;
}

bool CategoryPalette::contains(CategoryId id) const { return by_id_.count(id) != 0; }

std::vector<Category> CategoryPalette::categories() const {
  std::vector<Category> out;
  for (const auto& [id, c] : by_id_) out.push_back(c);
  return out;
}

std::vector<Category> CategoryPalette::change_categories() const {
  std::vector<Category> out;
  for (const auto& [id, c] : by_id_)
    if (id != kBackground) out.push_back(c);
  return out;
}

bool CategoryPalette::valid() const { return by_id_.count(kBackground) && by_id_.size() >= 2; }

CategoryPalette CategoryPalette::levir_mci() {
  CategoryPalette p;
  p.add({0, "background", "background", 0x000000});
  p.add({1, "road", "roads", 0x010101});
  p.add({2, "building", "buildings", 0x020202});
  return p;
}

// --- grid ------------------------------------------------------------------

LabelGrid::LabelGrid(std::size_t width, std::size_t height, CategoryId fill)
    : width_(width), height_(height), labels_(width * height, fill) {}

LabelGrid::LabelGrid(std::size_t width, std::size_t height, std::vector<CategoryId> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
  if (labels_.size() != width * height) throw DecodeFailure("label array size does not match grid dimensions");
}

bool LabelGrid::has_change() const {
  return std::any_of(labels_.begin(), labels_.end(), [](CategoryId c) { return c != kBackground; });
}

std::string to_string(Connectivity c) { return c == Connectivity::four ? "four" : "eight"; }

Connectivity connectivity_from_string(const std::string& s) {
  if (s == "four" || s == "4") return Connectivity::four;
  if (s == "eight" || s == "8") return Connectivity::eight;
  throw ConfigError("unknown connectivity '" + s + "' (expected four or eight)");
}

double signed_area(std::span<const Point> ring) {
  double twice = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const auto& a = ring[i];
    const auto& b = ring[(i + 1) % ring.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return twice / 2.0;
}

// --- decoding ----------------------------------------------------------------

LabelGrid labels_from_rgb(const RgbImage& image, const CategoryPalette& palette) {
  std::vector<CategoryId> labels(image.width * image.height);
  // Change maps use a handful of colors; cache the last hit.
  std::uint32_t last_rgb = 0xFFFFFFFFu;
  CategoryId last_id = 0;
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      const auto rgb = image.pixel(x, y);
      if (rgb != last_rgb) {
        const auto id = palette.lookup(rgb);
        if (!id) throw UnknownPixelValue(rgb, x, y);
        last_rgb = rgb;
        last_id = *id;
      }
      labels[y * image.width + x] = last_id;
    }
  }
  return LabelGrid(image.width, image.height, std::move(labels));
}

LabelGrid decode_change_map(std::span<const std::uint8_t> png_bytes, const CategoryPalette& palette) {
  return labels_from_rgb(decode_png_rgb(png_bytes), palette);
}

// --- labeling ----------------------------------------------------------------

namespace {

class DisjointSets {
public:
  std::uint32_t make() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }
  std::uint32_t find(std::uint32_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // smaller root wins so resolution is independent of merge order
    if (a < b) parent_[b] = a;
    else parent_[a] = b;
  }

private:
  std::vector<std::uint32_t> parent_;
};

} // namespace

std::vector<Component> connected_components(const LabelGrid& grid, CategoryId category, Connectivity connectivity,
                                            std::size_t min_area) {
  if (category == kBackground) throw BackgroundCategoryRequested();

  const auto w = grid.width();
  const auto h = grid.height();
  constexpr std::uint32_t kNone = 0xFFFFFFFFu;
  std::vector<std::uint32_t> provisional(w * h, kNone);
  DisjointSets sets;

  // first pass: provisional labels from already-visited neighbours
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (grid.at(x, y) != category) continue;
      std::uint32_t label = kNone;
      auto visit = [&](std::size_t nx, std::size_t ny) {
        const auto n = provisional[ny * w + nx];
        if (n == kNone) return;
        if (label == kNone) label = n;
        else sets.unite(label, n);
      };
      if (x > 0) visit(x - 1, y);
      if (y > 0) {
        visit(x, y - 1);
        if (connectivity == Connectivity::eight) {
          if (x > 0) visit(x - 1, y - 1);
          if (x + 1 < w) visit(x + 1, y - 1);
        }
      }
      provisional[y * w + x] = label == kNone ? sets.make() : label;
    }
  }

  // second pass: resolve roots, gather pixels in raster order
  std::vector<std::uint32_t> root_to_index;
  std::vector<Component> components;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const auto p = provisional[y * w + x];
      if (p == kNone) continue;
      const auto root = sets.find(p);
      if (root >= root_to_index.size()) root_to_index.resize(root + 1, kNone);
      if (root_to_index[root] == kNone) {
        root_to_index[root] = static_cast<std::uint32_t>(components.size());
        Component c;
        c.category = category;
        c.connectivity = connectivity;
        const auto xi = static_cast<std::int32_t>(x), yi = static_cast<std::int32_t>(y);
        c.bbox = {xi, yi, xi, yi};
        components.push_back(std::move(c));
      }
      auto& c = components[root_to_index[root]];
      const Pixel px{static_cast<std::int32_t>(x), static_cast<std::int32_t>(y)};
      c.pixels.push_back(px);
      c.bbox.x_min = std::min(c.bbox.x_min, px.x);
      c.bbox.x_max = std::max(c.bbox.x_max, px.x);
      c.bbox.y_max = std::max(c.bbox.y_max, px.y);
    }
  }

  std::erase_if(components, [&](Component& c) {
    c.pixel_count = c.pixels.size();
    return c.pixel_count < min_area;
  });
  std::stable_sort(components.begin(), components.end(), [](const Component& a, const Component& b) {
    if (a.bbox.y_min != b.bbox.y_min) return a.bbox.y_min < b.bbox.y_min;
    if (a.bbox.x_min != b.bbox.x_min) return a.bbox.x_min < b.bbox.x_min;
    return a.pixels.front() < b.pixels.front();
  });
  return components;
}

std::size_t count_objects(const LabelGrid& grid, CategoryId category, Connectivity connectivity,
                          std::size_t min_area) {
  return connected_components(grid, category, connectivity, min_area).size();
}

// --- tracing -------------------------------------------------------------------

namespace {

// Headings in image coordinates (y grows downwards).
enum Heading { kEast = 0, kSouth = 1, kWest = 2, kNorth = 3 };
constexpr int kDx[4] = {1, 0, -1, 0};
constexpr int kDy[4] = {0, 1, 0, -1};

// Pixel offsets, relative to a lattice vertex, of the two pixels ahead of a
// walker: the one on the foreground side and the one on the far side.
constexpr int kAheadFgDx[4] = {0, -1, -1, 0};
constexpr int kAheadFgDy[4] = {0, 0, -1, -1};
constexpr int kAheadBgDx[4] = {0, 0, -1, -1};
constexpr int kAheadBgDy[4] = {-1, 0, 0, -1};

Heading turn_toward_fg(Heading h) { return static_cast<Heading>((h + 1) % 4); }
Heading turn_away_from_fg(Heading h) { return static_cast<Heading>((h + 3) % 4); }

} // namespace

ClosedContour trace_contour(const Component& component, std::size_t grid_width, std::size_t grid_height) {
  if (component.pixels.empty()) throw DegenerateResult("cannot trace an empty component");
  const auto& bb = component.bbox;
  if (bb.x_min < 0 || bb.y_min < 0 || static_cast<std::size_t>(bb.x_max) >= grid_width ||
      static_cast<std::size_t>(bb.y_max) >= grid_height)
    throw OutOfBoundsVertex("component lies outside the grid");

  // local bitmap with a one-pixel empty border
  const int bw = bb.x_max - bb.x_min + 3;
  const int bh = bb.y_max - bb.y_min + 3;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(bw) * bh, 0);
  for (const auto& p : component.pixels) mask[(p.y - bb.y_min + 1) * bw + (p.x - bb.x_min + 1)] = 1;
  auto fg = [&](int x, int y) { return mask[y * bw + x] != 0; };

  const bool join_diagonals = component.connectivity == Connectivity::eight;
  const auto first = *std::min_element(component.pixels.begin(), component.pixels.end());
  const int sx = first.x - bb.x_min + 1;
  const int sy = first.y - bb.y_min + 1;

  std::vector<Point> vertices;
  int vx = sx, vy = sy;
  Heading heading = kEast;
  vertices.push_back({static_cast<double>(vx), static_cast<double>(vy)});
  const std::size_t step_limit = 4 * component.pixels.size() + 4;
  for (std::size_t steps = 0;; ++steps) {
    if (steps > step_limit) throw DegenerateResult("contour tracing did not close");
    vx += kDx[heading];
    vy += kDy[heading];
    if (vx == sx && vy == sy) break;
    const bool ahead_fg = fg(vx + kAheadFgDx[heading], vy + kAheadFgDy[heading]);
    const bool ahead_bg = fg(vx + kAheadBgDx[heading], vy + kAheadBgDy[heading]);
    Heading next = heading;
    if (ahead_bg && ahead_fg) next = turn_away_from_fg(heading);
    else if (ahead_bg) next = join_diagonals ? turn_away_from_fg(heading) : turn_toward_fg(heading);
    else if (!ahead_fg) next = turn_toward_fg(heading);
    if (next != heading) {
      vertices.push_back({static_cast<double>(vx), static_cast<double>(vy)});
      heading = next;
    }
  }

  for (auto& v : vertices) {
    v.x += bb.x_min - 1;
    v.y += bb.y_min - 1;
  }
  return {std::move(vertices), Orientation::counter_clockwise};
}

} // namespace changekit
