#include "oracles/fixture.hpp"

#include "changekit/png_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <random>
#include <stdexcept>

#include <stdlib.h>

namespace fixture {

TempDir::TempDir() {
  auto templ = (fs::temp_directory_path() / "changekit-XXXXXX").string();
  if (!mkdtemp(templ.data())) throw std::runtime_error("mkdtemp failed");
  path_ = templ;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

namespace {

const std::array<const char*, 5> kNumbers{"one", "two", "three", "four", "five"};
const std::array<const char*, 4> kPlaces{"at the top", "near the road", "in the lower part", "on the bare land"};

std::string count_phrase(std::size_t n, const char* singular, const char* plural) {
  if (n == 1) return std::string("a ") + singular;
  return std::string(n <= 5 ? kNumbers[n - 1] : "many") + " " + plural;
}

std::array<std::string, 5> captions_for(std::size_t roads, std::size_t buildings, std::mt19937_64& rng) {
  std::array<std::string, 5> out;
  if (roads == 0 && buildings == 0) {
    const std::array<const char*, 6> still{"there is no difference .", "nothing has changed .",
                                           "the scene is the same as before .", "no change has occurred .",
                                           "the two images look the same .", "there are no changes in this area ."};
    for (std::size_t i = 0; i < 5; ++i) out[i] = still[(i + rng() % 2) % still.size()];
    return out;
  }
  for (std::size_t i = 0; i < 5; ++i) {
    const char* place = kPlaces[rng() % kPlaces.size()];
    std::string s;
    if (buildings > 0) s = count_phrase(buildings, "building", "buildings") + (buildings == 1 ? " is built " : " are built ") + place;
    if (roads > 0) {
      if (!s.empty()) s += " and ";
      s += count_phrase(roads, "road", "roads") + (roads == 1 ? " appears" : " appear");
    }
    if (i % 2 == 1) s = "the area changes : " + s;
    out[i] = s + " .";
  }
  return out;
}

} // namespace

std::vector<Sample> make_samples(std::size_t n, std::uint64_t seed, changekit::Split split, std::size_t size) {
  std::mt19937_64 rng(seed);
  const int cells = static_cast<int>(size / 20);
  std::vector<Sample> out;
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    char id[32];
    std::snprintf(id, sizeof id, "%s_%06zu", std::string(changekit::to_string(split)).c_str(), i);
    s.id = id;
    s.split = split;
    const bool unchanged = rng() % 4 == 0;
    if (!unchanged) {
      std::vector<int> free_cells(static_cast<std::size_t>(cells * cells));
      for (std::size_t k = 0; k < free_cells.size(); ++k) free_cells[k] = static_cast<int>(k);
      std::shuffle(free_cells.begin(), free_cells.end(), rng);
      const std::size_t blobs = 1 + rng() % std::min<std::size_t>(5, free_cells.size());
      for (std::size_t b = 0; b < blobs; ++b) {
        const int cell = free_cells[b];
        Blob blob;
        blob.category = static_cast<changekit::CategoryId>(1 + rng() % 2);
        blob.w = 4 + static_cast<int>(rng() % 13);
        blob.h = 4 + static_cast<int>(rng() % 13);
        blob.x = (cell % cells) * 20 + 2 + static_cast<int>(rng() % static_cast<unsigned>(17 - blob.w));
        blob.y = (cell / cells) * 20 + 2 + static_cast<int>(rng() % static_cast<unsigned>(17 - blob.h));
        s.blobs.push_back(blob);
      }
    }
    s.captions = captions_for(blob_count(s, 1), blob_count(s, 2), rng);
    out.push_back(std::move(s));
  }
  return out;
}

std::size_t blob_count(const Sample& s, changekit::CategoryId category) {
  std::size_t n = 0;
  for (const auto& b : s.blobs) n += b.category == category;
  return n;
}

changekit::LabelGrid grid_of(const Sample& s, std::size_t size) {
  changekit::LabelGrid g(size, size);
  for (const auto& b : s.blobs)
    for (int y = b.y; y < b.y + b.h; ++y)
      for (int x = b.x; x < b.x + b.w; ++x) g.set(static_cast<std::size_t>(x), static_cast<std::size_t>(y), b.category);
  return g;
}

changekit::CorpusConfig write_corpus(const fs::path& root, const std::vector<Sample>& samples, std::size_t size) {
  changekit::CorpusConfig cfg;
  cfg.image_size = {size, size};
  nlohmann::json index;
  index["images"] = nlohmann::json::array();
  std::mt19937_64 rng(size);
  for (const auto& s : samples) {
    const std::string split(changekit::to_string(s.split));
    const auto name = s.id + ".png";
    for (const char* dir : {"A", "B", "label"}) fs::create_directories(root / "images" / split / dir);
    for (const char* dir : {"A", "B"}) {
      changekit::RgbImage img = changekit::RgbImage::filled(size, size, 0);
      for (auto& byte : img.data) byte = static_cast<std::uint8_t>(rng());
      changekit::write_file_bytes(root / "images" / split / dir / name, changekit::encode_png_rgb(img));
    }
    const auto grid = grid_of(s, size);
    std::vector<std::uint8_t> gray(grid.labels().begin(), grid.labels().end());
    changekit::write_file_bytes(root / "images" / split / "label" / name, changekit::encode_png_gray(size, size, gray));

    nlohmann::json entry;
    entry["filename"] = name;
    entry["filepath"] = split;
    entry["sentences"] = nlohmann::json::array();
    for (const auto& c : s.captions) entry["sentences"].push_back({{"raw", c}});
    index["images"].push_back(entry);
  }
  std::ofstream(root / cfg.caption_index) << index.dump(1);
  std::ofstream(root / "corpus.cfg") << cfg.to_config().to_text();
  return cfg;
}

} // namespace fixture
