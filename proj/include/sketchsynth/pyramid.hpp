#pragma once

// Burt-Adelson style Gaussian/Laplacian pyramids over the 5-tap generating
// kernel [1/4 - a/2, 1/4, a, 1/4, 1/4 - a/2], and the mask-weighted
// multiresolution spline built on them.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "sketchsynth/error.hpp"
#include "sketchsynth/image.hpp"

namespace sketchsynth {

inline constexpr double kDefaultKernelA = 0.4;

namespace detail {

/// Reflect-101 index folding (the edge sample is not repeated).
inline Eigen::Index reflect101(Eigen::Index i, Eigen::Index n) {
  if (n == 1) return 0;
  const Eigen::Index period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i >= n ? period - i : i;
}

template <typename Scalar>
std::array<Scalar, 5> generating_kernel(Scalar a) {
  const Scalar q = Scalar(0.25);
  return {q - a / 2, q, a, q, q - a / 2};
}

// Separable 5-tap filter sampled every `step` pixels in both axes.
template <typename Scalar>
Image<Scalar> separable_filter(const Image<Scalar>& src, const std::array<Scalar, 5>& w, Eigen::Index out_rows,
                               Eigen::Index out_cols, Eigen::Index step) {
  const Eigen::Index h = src.rows();
  const Eigen::Index wd = src.cols();
  Image<Scalar> horiz(h, out_cols);
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index c = 0; c < out_cols; ++c) {
      const Eigen::Index x = c * step;
      Scalar acc(0);
      for (int t = -2; t <= 2; ++t) acc += w[t + 2] * src(r, reflect101(x + t, wd));
      horiz(r, c) = acc;
    }
  }
  Image<Scalar> out(out_rows, out_cols);
  for (Eigen::Index r = 0; r < out_rows; ++r) {
    const Eigen::Index y = r * step;
    for (Eigen::Index c = 0; c < out_cols; ++c) {
      Scalar acc(0);
      for (int t = -2; t <= 2; ++t) acc += w[t + 2] * horiz(reflect101(y + t, h), c);
      out(r, c) = acc;
    }
  }
  return out;
}

}  // namespace detail

/// Smallest size a dimension reaches after one reduce.
constexpr Eigen::Index reduced_size(Eigen::Index n) { return (n + 1) / 2; }

/// Blur and keep even-indexed rows and columns.
template <typename Scalar>
Image<Scalar> reduce(const Image<Scalar>& img, Scalar kernel_a = Scalar(kDefaultKernelA)) {
  if (img.rows() < 2 || img.cols() < 2) {
    throw DataError("reduce: image must be at least 2x2");
  }
  return detail::separable_filter<Scalar>(img, detail::generating_kernel(kernel_a), reduced_size(img.rows()),
                                          reduced_size(img.cols()), 2);
}

/// Zero-interleave to (target_h, target_w) and filter with the doubled kernel.
template <typename Scalar>
Image<Scalar> expand(const Image<Scalar>& img, Eigen::Index target_h, Eigen::Index target_w,
                     Scalar kernel_a = Scalar(kDefaultKernelA)) {
  if (reduced_size(target_h) != img.rows() || reduced_size(target_w) != img.cols()) {
    throw DataError("expand: target " + std::to_string(target_h) + "x" + std::to_string(target_w) +
                    " does not reduce to " + std::to_string(img.rows()) + "x" + std::to_string(img.cols()));
  }
  Image<Scalar> up = Image<Scalar>::Zero(target_h, target_w);
  for (Eigen::Index r = 0; r < img.rows(); ++r) {
    for (Eigen::Index c = 0; c < img.cols(); ++c) up(2 * r, 2 * c) = img(r, c);
  }
  auto w = detail::generating_kernel(kernel_a);
  for (auto& v : w) v *= Scalar(2);
  return detail::separable_filter<Scalar>(up, w, target_h, target_w, 1);
}

template <typename Scalar>
struct LaplacianPyramid {
  std::vector<Image<Scalar>> levels;  // band-pass, finest first
  Image<Scalar> top;                  // low-pass residual
  Scalar kernel_a = Scalar(kDefaultKernelA);
};

/// Deepest level count `build_laplacian` accepts for an h x w image.
inline int max_pyramid_levels(Eigen::Index h, Eigen::Index w) {
  int levels = 0;
  while (h >= 2 && w >= 2) {
    h = reduced_size(h);
    w = reduced_size(w);
    ++levels;
  }
  return levels;
}

template <typename Scalar>
std::vector<Image<Scalar>> build_gaussian(const Image<Scalar>& img, int levels,
                                          Scalar kernel_a = Scalar(kDefaultKernelA)) {
  if (levels < 1) throw DataError("pyramid needs at least one level");
  if (levels > max_pyramid_levels(img.rows(), img.cols())) {
    throw DataError("too many pyramid levels (" + std::to_string(levels) + ") for a " + std::to_string(img.rows()) +
                    "x" + std::to_string(img.cols()) + " image");
  }
  std::vector<Image<Scalar>> g;
  g.reserve(levels + 1);
  g.push_back(img);
  for (int k = 0; k < levels; ++k) g.push_back(reduce(g.back(), kernel_a));
  return g;
}

template <typename Scalar>
LaplacianPyramid<Scalar> build_laplacian(const Image<Scalar>& img, int levels,
                                         Scalar kernel_a = Scalar(kDefaultKernelA)) {
  auto g = build_gaussian(img, levels, kernel_a);
  LaplacianPyramid<Scalar> pyr;
  pyr.kernel_a = kernel_a;
  pyr.levels.reserve(levels);
  for (int k = 0; k < levels; ++k) {
    pyr.levels.push_back(g[k] - expand(g[k + 1], g[k].rows(), g[k].cols(), kernel_a));
  }
  pyr.top = std::move(g.back());
  return pyr;
}

template <typename Scalar>
Image<Scalar> reconstruct(const LaplacianPyramid<Scalar>& pyr) {
  Image<Scalar> img = pyr.top;
  for (auto it = pyr.levels.rbegin(); it != pyr.levels.rend(); ++it) {
    img = *it + expand(img, it->rows(), it->cols(), pyr.kernel_a);
  }
  return img;
}

/// Multiresolution spline of two equally sized images. Mask value 1 selects
/// `a`; each band is mixed by the matching level of the mask's Gaussian
/// pyramid, so coarse bands get proportionally wider transitions.
template <typename Scalar>
Image<Scalar> spline_blend(const Image<Scalar>& a, const Image<Scalar>& b, const Image<Scalar>& mask, int levels,
                           Scalar kernel_a = Scalar(kDefaultKernelA)) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != mask.rows() || a.cols() != mask.cols()) {
    throw DataError("spline_blend: dimension mismatch");
  }
  if ((mask.array() < Scalar(0)).any() || (mask.array() > Scalar(1)).any()) {
    throw DataError("spline_blend: mask values must lie in [0, 1]");
  }
  const auto la = build_laplacian(a, levels, kernel_a);
  const auto lb = build_laplacian(b, levels, kernel_a);
  const auto gm = build_gaussian(mask, levels, kernel_a);

  LaplacianPyramid<Scalar> mixed;
  mixed.kernel_a = kernel_a;
  mixed.levels.reserve(levels);
  for (int k = 0; k < levels; ++k) {
    mixed.levels.push_back(gm[k].cwiseProduct(la.levels[k]) +
                           (Scalar(1) - gm[k].array()).matrix().cwiseProduct(lb.levels[k]));
  }
  mixed.top = gm[levels].cwiseProduct(la.top) + (Scalar(1) - gm[levels].array()).matrix().cwiseProduct(lb.top);
  return reconstruct(mixed);
}

/// Blend depth tied to patch size: floor(log2(patch)) - 2, at least 2.
inline int levels_for_patch(int patch) {
  int lg = 0;
  while ((2 << lg) <= patch) ++lg;
  return std::max(2, lg - 2);
}

}  // namespace sketchsynth
