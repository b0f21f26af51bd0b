#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sketchsynth/mrf.hpp"

namespace sketchsynth {

/// Reads `photo_path<TAB>sketch_path` lines (relative to the manifest; blank
/// lines and '#' comments skipped), checks each pair is aligned, and
/// center-crops every image to the largest common size valid for the
/// (patch, overlap) tiling.
std::vector<TrainingPair> load_manifest(const std::filesystem::path& path, int patch = 20, int overlap = 10);

/// Deterministic stand-in for an artist: tone curve plus unsharp masking.
struct SyntheticStyle {
  std::uint64_t seed = 1;
  double gamma = 1.8;
  double edge_gain = 1.0;
  int blur_radius = 2;
};

/// Mean over a (2r+1)^2 window, reflect-101 at the borders.
GrayImage box_blur(const GrayImage& img, int radius);

/// clamp(photo^gamma + edge_gain * (photo - box_blur(photo, blur_radius)), 0, 1)
GrayImage apply_style(const GrayImage& photo, const SyntheticStyle& style);

/// Smooth random field in [0, 1]: min-max normalized sum of six
/// products of random-frequency, random-phase sinusoids.
GrayImage random_photo(int h, int w, std::uint64_t seed);

/// Throws DataError unless h and w tile both the 10/5 and 20/10 grids.
void check_synthetic_dims(int h, int w);

/// n pairs; photo j is seeded from (style.seed, j) and sketch j is
/// apply_style(photo j).
std::vector<TrainingPair> gen_synthetic_pairs(int n, int h, int w, const SyntheticStyle& style = {});

}  // namespace sketchsynth
