#include "sketchsynth/blend.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "sketchsynth/error.hpp"

namespace sketchsynth {

BlendPlan plan_passes(const GridSpec& grid) {
  if (grid.patch != 2 * grid.stride) {
    throw DataError("full-coverage blending needs patch == 2 * stride (patch " + std::to_string(grid.patch) +
                    ", overlap " + std::to_string(grid.overlap) + ")");
  }
  if (grid.rows % 2 == 0 || grid.cols % 2 == 0) {
    throw DataError("full-coverage blending needs an odd number of grid rows and columns (got " +
                    std::to_string(grid.rows) + "x" + std::to_string(grid.cols) + ")");
  }
  BlendPlan plan;
  for (int i = 0; i < grid.rows; ++i) {
    for (int j = 0; j < grid.cols; ++j) {
      const bool odd_r = i % 2 != 0;
      const bool odd_c = j % 2 != 0;
      if (!odd_r && !odd_c) {
        plan.pass1.push_back({i, j});
      } else if (odd_r && odd_c) {
        plan.pass3.push_back({i, j});
      } else {
        plan.pass2.push_back({i, j});
      }
    }
  }
  return plan;
}

GrayImage make_patch_mask(int patch, int overlap, const CanvasEdges& edges) {
  if (overlap >= patch || overlap < 0) throw DataError("mask requires 0 <= overlap < patch");
  const int half = overlap / 2;
  const int r0 = edges.top ? 0 : half;
  const int r1 = edges.bottom ? patch : patch - half;
  const int c0 = edges.left ? 0 : half;
  const int c1 = edges.right ? patch : patch - half;
  GrayImage mask = GrayImage::Zero(patch, patch);
  mask.block(r0, c0, r1 - r0, c1 - c0).setOnes();
  return mask;
}

CanvasEdges canvas_edges(const GridSpec& grid, int row, int col) {
  return {row == 0, row == grid.rows - 1, col == 0, col == grid.cols - 1};
}

GrayImage blend_full_coverage(const std::vector<Patch>& patches, const GridSpec& grid, const BlendOptions& opts) {
  const BlendPlan plan = plan_passes(grid);
  const auto slots = index_patches(patches, grid);
  const int levels = opts.levels > 0 ? opts.levels : levels_for_patch(grid.patch);
  const int P = grid.patch;

  GrayImage canvas = GrayImage::Zero(grid.image_h, grid.image_w);
  Image<int> writes = Image<int>::Zero(grid.image_h, grid.image_w);
  for (const auto& idx : plan.pass1) {
    const Patch& p = *slots[grid.index(idx.row, idx.col)];
    canvas.block(grid.top(idx.row), grid.left(idx.col), P, P) = p.data;
    writes.block(grid.top(idx.row), grid.left(idx.col), P, P).array() += 1;
  }
  if ((writes.array() != 1).any()) throw InternalError("pass 1 did not cover the canvas exactly once");
  if (opts.on_pass) opts.on_pass(1, canvas);

  auto blend_pass = [&](const std::vector<GridIndex>& pass) {
    for (const auto& idx : pass) {
      const Patch& p = *slots[grid.index(idx.row, idx.col)];
      auto dst = canvas.block(grid.top(idx.row), grid.left(idx.col), P, P);
      const GrayImage under = dst;
      const GrayImage mask = make_patch_mask(P, grid.overlap, canvas_edges(grid, idx.row, idx.col));
      dst = spline_blend<double>(p.data, under, mask, levels, opts.kernel_a);
    }
  };
  blend_pass(plan.pass2);
  if (opts.on_pass) opts.on_pass(2, canvas);
  blend_pass(plan.pass3);
  if (opts.on_pass) opts.on_pass(3, canvas);
  return canvas;
}

BlendStrategy parse_strategy(std::string_view name) {
  if (name == "average") return BlendStrategy::Average;
  if (name == "mincut") return BlendStrategy::MinCut;
  if (name == "spline") return BlendStrategy::Spline;
  throw DataError("unknown blend strategy '" + std::string(name) + "'");
}

std::string_view strategy_name(BlendStrategy s) {
  switch (s) {
    case BlendStrategy::Average: return "average";
    case BlendStrategy::MinCut: return "mincut";
    case BlendStrategy::Spline: return "spline";
  }
  return "?";
}

GrayImage blend_with_strategy(const std::vector<Patch>& patches, const GridSpec& grid, BlendStrategy strategy,
                              const BlendOptions& opts) {
  switch (strategy) {
    case BlendStrategy::Average: return assemble_average(patches, grid);
    case BlendStrategy::MinCut: return assemble_mincut(patches, grid);
    case BlendStrategy::Spline: return blend_full_coverage(patches, grid, opts);
  }
  throw InternalError("unhandled blend strategy");
}

std::vector<Patch> perturb_patches(std::vector<Patch> patches, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto& p : patches) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    p.data.array() += amplitude * (2.0 * u - 1.0);
  }
  return patches;
}

std::vector<int> grid_boundaries(int image_extent, int patch, int stride, int count) {
  std::vector<int> out;
  for (int k = 1; k < count; ++k) out.push_back(k * stride);
  for (int k = 0; k + 1 < count; ++k) {
    const int edge = k * stride + patch;
    if (edge < image_extent) out.push_back(edge);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double seam_energy(const GrayImage& img, const std::vector<int>& col_boundaries,
                   const std::vector<int>& row_boundaries) {
  double sum = 0.0;
  long pairs = 0;
  for (int c : col_boundaries) {
    if (c <= 0 || c >= img.cols()) throw DataError("column boundary outside image");
    sum += (img.col(c) - img.col(c - 1)).squaredNorm();
    pairs += img.rows();
  }
  for (int r : row_boundaries) {
    if (r <= 0 || r >= img.rows()) throw DataError("row boundary outside image");
    sum += (img.row(r) - img.row(r - 1)).squaredNorm();
    pairs += img.cols();
  }
  return pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
}

double seam_energy(const GrayImage& img, const GridSpec& grid) {
  if (img.rows() != grid.image_h || img.cols() != grid.image_w) throw DataError("seam_energy: image/grid mismatch");
  return seam_energy(img, grid_boundaries(grid.image_w, grid.patch, grid.stride, grid.cols),
                     grid_boundaries(grid.image_h, grid.patch, grid.stride, grid.rows));
}

double pass1_seam_energy(const GrayImage& img, const GridSpec& grid) {
  if (img.rows() != grid.image_h || img.cols() != grid.image_w) throw DataError("seam_energy: image/grid mismatch");
  auto tiles = [&](int extent) {
    std::vector<int> out;
    for (int b = grid.patch; b < extent; b += grid.patch) out.push_back(b);
    return out;
  };
  return seam_energy(img, tiles(grid.image_w), tiles(grid.image_h));
}

}  // namespace sketchsynth
