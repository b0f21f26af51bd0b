#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "sketchsynth/patching.hpp"
#include "sketchsynth/pyramid.hpp"

namespace sketchsynth {

struct GridIndex {
  int row = 0;
  int col = 0;
  friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

/// Full-coverage placement schedule. Pass 1 holds the (even, even) cells,
/// which tile the canvas without overlap; pass 2 the mixed-parity cells;
/// pass 3 the (odd, odd) cells. Row-major within each pass.
struct BlendPlan {
  std::vector<GridIndex> pass1;
  std::vector<GridIndex> pass2;
  std::vector<GridIndex> pass3;
};

/// Requires patch == 2 * stride and odd row and column counts.
BlendPlan plan_passes(const GridSpec& grid);

struct CanvasEdges {
  bool top = false;
  bool bottom = false;
  bool left = false;
  bool right = false;
};

/// Binary mask: 1 at distance >= overlap/2 from every patch edge, extended to
/// the patch edge on sides that lie on the canvas border.
GrayImage make_patch_mask(int patch, int overlap, const CanvasEdges& edges);

CanvasEdges canvas_edges(const GridSpec& grid, int row, int col);

struct BlendOptions {
  int levels = 0;  // 0 selects levels_for_patch(grid.patch)
  double kernel_a = kDefaultKernelA;
  /// Called with (pass number, canvas) after each of the three passes.
  std::function<void(int, const GrayImage&)> on_pass;
};

/// Stitches pass-1 patches, then spline-blends every pass-2 and pass-3 patch
/// (as the masked "incoming" image) into the canvas under its footprint.
GrayImage blend_full_coverage(const std::vector<Patch>& patches, const GridSpec& grid, const BlendOptions& opts = {});

enum class BlendStrategy { Average, MinCut, Spline };

BlendStrategy parse_strategy(std::string_view name);
std::string_view strategy_name(BlendStrategy s);

GrayImage blend_with_strategy(const std::vector<Patch>& patches, const GridSpec& grid, BlendStrategy strategy,
                              const BlendOptions& opts = {});

/// Adds an independent constant offset, uniform in [-amplitude, amplitude],
/// to every patch. Offsets are drawn in patch order from `seed`.
std::vector<Patch> perturb_patches(std::vector<Patch> patches, double amplitude, std::uint64_t seed);

/// Interior patch-edge positions along one axis: every left/top edge k*stride
/// (k > 0) and every right/bottom edge k*stride + patch short of the border.
std::vector<int> grid_boundaries(int image_extent, int patch, int stride, int count);

/// Mean squared intensity difference over the pixel pairs straddling the
/// given column and row boundaries. A boundary at c pairs pixels c-1 and c.
double seam_energy(const GrayImage& img, const std::vector<int>& col_boundaries,
                   const std::vector<int>& row_boundaries);

/// seam_energy over all patch boundaries of `grid`.
double seam_energy(const GrayImage& img, const GridSpec& grid);

/// seam_energy over the boundaries between pass-1 tiles only.
double pass1_seam_energy(const GrayImage& img, const GridSpec& grid);

}  // namespace sketchsynth
