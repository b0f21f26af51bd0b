#include "sketchsynth/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "sketchsynth/error.hpp"
#include "sketchsynth/pyramid.hpp"

namespace sketchsynth {

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + static_cast<double>(rng() >> 11) * 0x1.0p-53 * (hi - lo);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void check_axis(int dim, const char* name, int patch, int overlap) {
  if (!is_grid_valid(dim, patch, overlap)) {
    const int period = 2 * (patch - overlap);
    throw DataError(std::string(name) + " " + std::to_string(dim) + " violates (" + name[0] + " - " +
                    std::to_string(patch) + ") mod " + std::to_string(period) + " == 0 required by the " +
                    std::to_string(patch) + "/" + std::to_string(overlap) + " patch grid");
  }
}

}  // namespace

std::vector<TrainingPair> load_manifest(const std::filesystem::path& path, int patch, int overlap) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path.string());
  const std::filesystem::path base = path.parent_path();

  std::vector<TrainingPair> pairs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto tab = t.find('\t');
    const std::string photo = tab == std::string::npos ? t : trim(t.substr(0, tab));
    const std::string sketch = tab == std::string::npos ? std::string() : trim(t.substr(tab + 1));
    if (photo.empty() || sketch.empty() || sketch.find('\t') != std::string::npos) {
      throw DataError("manifest " + path.string() + " line " + std::to_string(lineno) +
                      ": expected 'photo<TAB>sketch'");
    }
    TrainingPair p{load_image(base / photo), load_image(base / sketch)};
    if (p.photo.rows() != p.sketch.rows() || p.photo.cols() != p.sketch.cols()) {
      throw DataError("manifest line " + std::to_string(lineno) + ": photo and sketch sizes differ");
    }
    pairs.push_back(std::move(p));
  }
  if (pairs.empty()) throw DataError("manifest lists no training pairs: " + path.string());

  Eigen::Index min_h = pairs.front().photo.rows();
  Eigen::Index min_w = pairs.front().photo.cols();
  for (const auto& p : pairs) {
    min_h = std::min(min_h, p.photo.rows());
    min_w = std::min(min_w, p.photo.cols());
  }
  const int h = largest_grid_valid(static_cast<int>(min_h), patch, overlap);
  const int w = largest_grid_valid(static_cast<int>(min_w), patch, overlap);
  if (h == 0 || w == 0) throw DataError("training images are smaller than one patch");
  for (auto& p : pairs) {
    p.photo = center_crop(p.photo, h, w);
    p.sketch = center_crop(p.sketch, h, w);
  }
  return pairs;
}

GrayImage box_blur(const GrayImage& img, int radius) {
  if (radius < 0) throw DataError("blur radius must be nonnegative");
  if (radius == 0) return img;
  const Eigen::Index h = img.rows();
  const Eigen::Index w = img.cols();
  const double norm = 1.0 / (2 * radius + 1);
  GrayImage tmp(h, w);
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t) acc += img(r, detail::reflect101(c + t, w));
      tmp(r, c) = acc * norm;
    }
  }
  GrayImage out(h, w);
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t) acc += tmp(detail::reflect101(r + t, h), c);
      out(r, c) = acc * norm;
    }
  }
  return out;
}

GrayImage apply_style(const GrayImage& photo, const SyntheticStyle& style) {
  if (!(style.gamma > 0.0) || !std::isfinite(style.gamma)) throw DataError("style gamma must be positive");
  if (!(style.edge_gain >= 0.0) || !std::isfinite(style.edge_gain)) throw DataError("style edge gain must be >= 0");
  const GrayImage detail = photo - box_blur(photo, style.blur_radius);
  return (photo.array().pow(style.gamma) + style.edge_gain * detail.array()).cwiseMax(0.0).cwiseMin(1.0).matrix();
}

GrayImage random_photo(int h, int w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  GrayImage img = GrayImage::Zero(h, w);
  for (int k = 0; k < 6; ++k) {
    const double amp = uniform(rng, 0.5, 1.0);
    const double fy = uniform(rng, 0.5, 3.0);
    const double fx = uniform(rng, 0.5, 3.0);
    const double py = uniform(rng, 0.0, two_pi);
    const double px = uniform(rng, 0.0, two_pi);
    for (int r = 0; r < h; ++r) {
      const double sy = std::sin(two_pi * fy * r / h + py);
      for (int c = 0; c < w; ++c) img(r, c) += amp * sy * std::sin(two_pi * fx * c / w + px);
    }
  }
  const double lo = img.minCoeff();
  const double hi = img.maxCoeff();
  if (hi - lo <= 0.0) return GrayImage::Constant(h, w, 0.5);
  return (img.array() - lo) / (hi - lo);
}

void check_synthetic_dims(int h, int w) {
  for (auto [patch, overlap] : {std::pair{20, 10}, std::pair{10, 5}}) {
    check_axis(h, "height", patch, overlap);
    check_axis(w, "width", patch, overlap);
  }
}

std::vector<TrainingPair> gen_synthetic_pairs(int n, int h, int w, const SyntheticStyle& style) {
  if (n < 1) throw DataError("pair count must be positive");
  check_synthetic_dims(h, w);
  std::vector<TrainingPair> pairs;
  pairs.reserve(n);
  for (int j = 0; j < n; ++j) {
    GrayImage photo = random_photo(h, w, splitmix(style.seed ^ splitmix(static_cast<std::uint64_t>(j))));
    GrayImage sketch = apply_style(photo, style);
    pairs.push_back({std::move(photo), std::move(sketch)});
  }
  return pairs;
}

}  // namespace sketchsynth
