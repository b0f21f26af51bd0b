#include "sketchsynth/patching.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "sketchsynth/error.hpp"

namespace sketchsynth {

namespace {

int grid_steps(int dim, int patch, int stride, const char* axis) {
  if (dim < patch) {
    throw DataError(std::string("image ") + axis + " " + std::to_string(dim) + " is smaller than patch " +
                    std::to_string(patch));
  }
  if ((dim - patch) % stride != 0) {
    throw DataError(std::string("image ") + axis + " " + std::to_string(dim) + " minus patch " + std::to_string(patch) +
                    " is not a multiple of stride " + std::to_string(stride) + "; crop to the grid first");
  }
  return (dim - patch) / stride + 1;
}

// Number of grid positions along one axis whose span [k*stride, k*stride+patch)
// contains `pos`.
int axis_coverage(int pos, int patch, int stride, int steps) {
  const int first = std::max(0, (pos - patch) / stride + ((pos - patch) >= 0 ? 1 : 0));
  const int last = std::min(steps - 1, pos / stride);
  return std::max(0, last - first + 1);
}

}  // namespace

GridSpec make_grid(int image_h, int image_w, int patch, int overlap) {
  if (!(patch > overlap && overlap > 0)) {
    throw DataError("grid requires patch > overlap > 0 (got patch " + std::to_string(patch) + ", overlap " +
                    std::to_string(overlap) + ")");
  }
  GridSpec g;
  g.patch = patch;
  g.overlap = overlap;
  g.stride = patch - overlap;
  g.rows = grid_steps(image_h, patch, g.stride, "height");
  g.cols = grid_steps(image_w, patch, g.stride, "width");
  g.image_h = image_h;
  g.image_w = image_w;
  return g;
}

std::vector<Patch> extract_patches(const GrayImage& img, const GridSpec& grid) {
  if (img.rows() != grid.image_h || img.cols() != grid.image_w) {
    throw DataError("extract_patches: image does not match grid dimensions");
  }
  std::vector<Patch> out;
  out.reserve(grid.count());
  for (int i = 0; i < grid.rows; ++i) {
    for (int j = 0; j < grid.cols; ++j) {
      Patch p;
      p.grid_row = i;
      p.grid_col = j;
      p.top = grid.top(i);
      p.left = grid.left(j);
      p.data = img.block(p.top, p.left, grid.patch, grid.patch);
      out.push_back(std::move(p));
    }
  }
  return out;
}

Image<int> coverage_count(const GridSpec& grid) {
  Image<int> counts(grid.image_h, grid.image_w);
  for (int r = 0; r < grid.image_h; ++r) {
    const int cr = axis_coverage(r, grid.patch, grid.stride, grid.rows);
    for (int c = 0; c < grid.image_w; ++c) {
      counts(r, c) = cr * axis_coverage(c, grid.patch, grid.stride, grid.cols);
    }
  }
  return counts;
}

std::vector<const Patch*> index_patches(const std::vector<Patch>& patches, const GridSpec& grid) {
  std::vector<const Patch*> slots(grid.count(), nullptr);
  for (const auto& p : patches) {
    if (p.grid_row < 0 || p.grid_row >= grid.rows || p.grid_col < 0 || p.grid_col >= grid.cols) {
      throw DataError("patch outside grid at (" + std::to_string(p.grid_row) + "," + std::to_string(p.grid_col) + ")");
    }
    if (p.data.rows() != grid.patch || p.data.cols() != grid.patch) {
      throw DataError("patch size does not match grid");
    }
    auto& slot = slots[grid.index(p.grid_row, p.grid_col)];
    if (slot != nullptr) {
      throw DataError("duplicate patch at (" + std::to_string(p.grid_row) + "," + std::to_string(p.grid_col) + ")");
    }
    slot = &p;
  }
  for (int k = 0; k < grid.count(); ++k) {
    if (slots[k] == nullptr) {
      throw DataError("missing patch at (" + std::to_string(k / grid.cols) + "," + std::to_string(k % grid.cols) + ")");
    }
  }
  return slots;
}

GrayImage assemble_average(const std::vector<Patch>& patches, const GridSpec& grid) {
  const auto slots = index_patches(patches, grid);
  GrayImage sum = GrayImage::Zero(grid.image_h, grid.image_w);
  for (const Patch* p : slots) {
    sum.block(grid.top(p->grid_row), grid.left(p->grid_col), grid.patch, grid.patch) += p->data;
  }
  return sum.array() / coverage_count(grid).cast<double>().array();
}

Seam min_vertical_seam(const Eigen::Ref<const Eigen::MatrixXd>& error) {
  const Eigen::Index rows = error.rows();
  const Eigen::Index cols = error.cols();
  Seam seam;
  if (rows == 0 || cols == 0) return seam;

  Eigen::MatrixXd acc = error;
  for (Eigen::Index r = 1; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      double best = acc(r - 1, c);
      if (c > 0) best = std::min(best, acc(r - 1, c - 1));
      if (c + 1 < cols) best = std::min(best, acc(r - 1, c + 1));
      acc(r, c) += best;
    }
  }

  seam.path.assign(static_cast<std::size_t>(rows), 0);
  Eigen::Index c = 0;
  for (Eigen::Index k = 1; k < cols; ++k) {
    if (acc(rows - 1, k) < acc(rows - 1, c)) c = k;
  }
  seam.cost = acc(rows - 1, c);
  seam.path[rows - 1] = static_cast<int>(c);
  for (Eigen::Index r = rows - 2; r >= 0; --r) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, c - 1);
    const Eigen::Index hi = std::min<Eigen::Index>(cols - 1, c + 1);
    Eigen::Index pick = lo;
    for (Eigen::Index k = lo + 1; k <= hi; ++k) {
      if (acc(r, k) < acc(r, pick)) pick = k;
    }
    c = pick;
    seam.path[static_cast<std::size_t>(r)] = static_cast<int>(c);
  }
  return seam;
}

GrayImage assemble_mincut(const std::vector<Patch>& patches, const GridSpec& grid) {
  const auto slots = index_patches(patches, grid);
  const int P = grid.patch;
  const int ov = grid.overlap;
  GrayImage canvas = GrayImage::Zero(grid.image_h, grid.image_w);

  for (int i = 0; i < grid.rows; ++i) {
    for (int j = 0; j < grid.cols; ++j) {
      const Patch& p = *slots[grid.index(i, j)];
      const int top = grid.top(i);
      const int left = grid.left(j);
      auto dst = canvas.block(top, left, P, P);

      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> keep =
          Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(P, P, true);

      std::vector<int> vseam;
      if (j > 0) {
        const Eigen::MatrixXd err = (p.data.leftCols(ov) - dst.leftCols(ov)).array().square();
        vseam = min_vertical_seam(err).path;
        for (int r = 0; r < P; ++r) {
          for (int c = 0; c < vseam[r]; ++c) keep(r, c) = false;
        }
      }
      if (i > 0) {
        const Eigen::MatrixXd err = (p.data.topRows(ov) - dst.topRows(ov)).array().square().transpose();
        const std::vector<int> hseam = min_vertical_seam(err).path;
        for (int c = 0; c < P; ++c) {
          if (j > 0 && c < ov) continue;  // corner square follows the vertical seam
          for (int r = 0; r < hseam[c]; ++r) keep(r, c) = false;
        }
      }

      for (int r = 0; r < P; ++r) {
        for (int c = 0; c < P; ++c) {
          if (keep(r, c)) dst(r, c) = p.data(r, c);
        }
      }
    }
  }
  return canvas;
}

}  // namespace sketchsynth
