#pragma once

// Synthetic corpus on disk: rectangle change blobs on a small canvas, noise
// images, and a LEVIR-CC style caption index.

#include "changekit/dataset_io.hpp"
#include "changekit/raster.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fixture {

namespace fs = std::filesystem;

struct Blob {
  changekit::CategoryId category = 0;
  int x = 0, y = 0, w = 0, h = 0;
};

struct Sample {
  std::string id;
  changekit::Split split = changekit::Split::train;
  std::vector<Blob> blobs;
  std::array<std::string, 5> captions;
};

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

private:
  fs::path path_;
};

/// Blobs sit in 20 px cells, 4..16 px per side, at least 2 px apart, so
/// every blob is its own component under either connectivity and all
/// corners fall on multiples of 1/100 of a 100 px canvas. Roughly one sample
/// in four has no change.
std::vector<Sample> make_samples(std::size_t n, std::uint64_t seed, changekit::Split split = changekit::Split::train,
                                 std::size_t size = 100);

/// Writes images, change maps (gray 0/1/2), the caption index and a corpus
/// layout file `corpus.cfg`; returns the matching corpus config.
changekit::CorpusConfig write_corpus(const fs::path& root, const std::vector<Sample>& samples, std::size_t size = 100);

changekit::LabelGrid grid_of(const Sample& s, std::size_t size = 100);

std::size_t blob_count(const Sample& s, changekit::CategoryId category);

} // namespace fixture
