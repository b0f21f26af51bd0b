#pragma once

#include <filesystem>

#include <Eigen/Core>

namespace sketchsynth {

/// Dense single-channel raster, row-major so that `data()` walks pixels in
/// scan order.
template <typename Scalar>
using Image = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Intensities are nominally in [0, 1]; intermediate results may leave that
/// range and are clamped only when written to disk.
using GrayImage = Image<double>;

/// Reads binary or ASCII PGM (P5/P2) and PPM (P6/P3). Samples are divided by
/// maxval; color input is reduced with 0.299/0.587/0.114 luminance weights.
GrayImage load_image(const std::filesystem::path& path);

/// Writes an 8-bit binary PGM, each sample round-half-up(clamp(v, 0, 1) * 255).
void save_image(const GrayImage& img, const std::filesystem::path& path);

/// Encodes to the exact bytes `save_image` writes.
std::string encode_pgm(const GrayImage& img);

/// The values `save_image` followed by `load_image` would produce.
GrayImage quantize_8bit(const GrayImage& img);

double rmse(const GrayImage& a, const GrayImage& b);

/// True when `dim` admits the full-coverage tiling:
/// (dim - patch) % (2 * (patch - overlap)) == 0.
bool is_grid_valid(int dim, int patch, int overlap);

/// Largest grid-valid size <= dim, or 0 when none exists.
int largest_grid_valid(int dim, int patch, int overlap);

/// Center crop; an odd surplus loses its extra row/column at the bottom/right.
GrayImage center_crop(const GrayImage& img, int height, int width);

/// Center-crops to the largest dimensions satisfying `is_grid_valid` in both
/// axes. Idempotent.
GrayImage crop_to_grid(const GrayImage& img, int patch, int overlap);

}  // namespace sketchsynth
