#include "oracles/component_oracle.hpp"

#include <algorithm>
#include <deque>

namespace oracle {

std::vector<std::vector<changekit::Pixel>> flood_fill_components(const changekit::LabelGrid& grid,
                                                                 changekit::CategoryId category, bool eight) {
  const int w = static_cast<int>(grid.width()), h = static_cast<int>(grid.height());
  std::vector<char> seen(grid.size(), 0);
  std::vector<std::vector<changekit::Pixel>> out;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto idx = static_cast<std::size_t>(y * w + x);
      if (seen[idx] || grid.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) != category) continue;
      std::vector<changekit::Pixel> comp;
      std::deque<changekit::Pixel> queue{{x, y}};
      seen[idx] = 1;
      while (!queue.empty()) {
        const auto p = queue.front();
        queue.pop_front();
        comp.push_back(p);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if ((dx == 0 && dy == 0) || (!eight && dx != 0 && dy != 0)) continue;
            const int nx = p.x + dx, ny = p.y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const auto n = static_cast<std::size_t>(ny * w + nx);
            if (seen[n] || grid.at(static_cast<std::size_t>(nx), static_cast<std::size_t>(ny)) != category) continue;
            seen[n] = 1;
            queue.push_back({nx, ny});
          }
        }
      }
      std::sort(comp.begin(), comp.end());
      out.push_back(std::move(comp));
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

std::vector<std::vector<changekit::Pixel>> as_partition(const std::vector<changekit::Component>& components) {
  std::vector<std::vector<changekit::Pixel>> out;
  for (const auto& c : components) {
    auto px = c.pixels;
    std::sort(px.begin(), px.end());
    out.push_back(std::move(px));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

} // namespace oracle
