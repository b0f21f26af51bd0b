#pragma once

#include <vector>

#include "sketchsynth/image.hpp"

namespace sketchsynth {

/// Square-patch tiling of an image with a fixed overlap between neighbors.
struct GridSpec {
  int patch = 0;
  int overlap = 0;
  int stride = 0;
  int rows = 0;
  int cols = 0;
  int image_h = 0;
  int image_w = 0;

  int count() const { return rows * cols; }
  int index(int row, int col) const { return row * cols + col; }
  int top(int row) const { return row * stride; }
  int left(int col) const { return col * stride; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Throws DataError unless (image - patch) is a multiple of the stride in
/// both axes.
GridSpec make_grid(int image_h, int image_w, int patch, int overlap);

struct Patch {
  int grid_row = 0;
  int grid_col = 0;
  int top = 0;
  int left = 0;
  GrayImage data;
};

/// Row-major over the grid.
std::vector<Patch> extract_patches(const GrayImage& img, const GridSpec& grid);

/// Number of patches covering each pixel, from the interval arithmetic of the
/// grid rather than by rasterizing.
Image<int> coverage_count(const GridSpec& grid);

/// Mean of all patch samples covering each pixel.
GrayImage assemble_average(const std::vector<Patch>& patches, const GridSpec& grid);

/// Optimal monotone seam through an error surface, one column per row; each
/// step moves at most one column. Ties go to the lowest column.
struct Seam {
  std::vector<int> path;
  double cost = 0.0;
};
Seam min_vertical_seam(const Eigen::Ref<const Eigen::MatrixXd>& error);

/// Quilting assembly: patches are placed in row-major order and each one is
/// cut along minimum-error seams through its left and top overlap strips.
/// Where both strips meet, the vertical seam decides.
GrayImage assemble_mincut(const std::vector<Patch>& patches, const GridSpec& grid);

/// Throws DataError unless every grid cell has exactly one patch of the right
/// size. Returns patches indexed by grid position.
std::vector<const Patch*> index_patches(const std::vector<Patch>& patches, const GridSpec& grid);

}  // namespace sketchsynth
