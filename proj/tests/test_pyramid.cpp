#include <doctest.h>

#include "sketchsynth/dataset.hpp"
#include "sketchsynth/error.hpp"
#include "sketchsynth/pyramid.hpp"
#include "test_util.hpp"

using namespace sketchsynth;

namespace {

Eigen::Index mirror(Eigen::Index i, Eigen::Index n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

double tap(int t, double a) {
  switch (std::abs(t)) {
    case 0: return a;
    case 1: return 0.25;
    default: return 0.25 - a / 2;
  }
}

// Full 2-D (non-separable) convolution followed by decimation.
GrayImage reduce_oracle(const GrayImage& img, double a) {
  const Eigen::Index h = (img.rows() + 1) / 2, w = (img.cols() + 1) / 2;
  GrayImage out(h, w);
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int m = -2; m <= 2; ++m) {
        for (int n = -2; n <= 2; ++n) {
          acc += tap(m, a) * tap(n, a) * img(mirror(2 * r + m, img.rows()), mirror(2 * c + n, img.cols()));
        }
      }
      out(r, c) = acc;
    }
  }
  return out;
}

GrayImage expand_oracle(const GrayImage& img, Eigen::Index th, Eigen::Index tw, double a) {
  GrayImage up = GrayImage::Zero(th, tw);
  for (Eigen::Index r = 0; r < img.rows(); ++r) {
    for (Eigen::Index c = 0; c < img.cols(); ++c) up(2 * r, 2 * c) = img(r, c);
  }
  GrayImage out(th, tw);
  for (Eigen::Index y = 0; y < th; ++y) {
    for (Eigen::Index x = 0; x < tw; ++x) {
      double acc = 0.0;
      for (int m = -2; m <= 2; ++m) {
        for (int n = -2; n <= 2; ++n) acc += 4.0 * tap(m, a) * tap(n, a) * up(mirror(y + m, th), mirror(x + n, tw));
      }
      out(y, x) = acc;
    }
  }
  return out;
}

double max_abs(const GrayImage& x) { return x.cwiseAbs().maxCoeff(); }

// Distance (in pixels, linearly interpolated) between the 10% and 90%
// crossings of a monotone increasing profile running from 0 to 1.
double rise_width(const Eigen::VectorXd& p) {
  auto crossing = [&](double level) {
    for (Eigen::Index i = 1; i < p.size(); ++i) {
      if (p(i - 1) < level && p(i) >= level) return static_cast<double>(i - 1) + (level - p(i - 1)) / (p(i) - p(i - 1));
    }
    return p(0) >= level ? 0.0 : static_cast<double>(p.size() - 1);
  };
  return crossing(0.9) - crossing(0.1);
}

}  // namespace

TEST_CASE("reduce sizes and DC preservation") {
  CHECK(reduce(GrayImage(GrayImage::Zero(4, 4))).rows() == 2);
  CHECK(reduce(GrayImage(GrayImage::Zero(5, 5))).cols() == 3);
  CHECK(reduce(GrayImage(GrayImage::Zero(33, 47))).rows() == 17);
  CHECK(reduce(GrayImage(GrayImage::Zero(33, 47))).cols() == 24);
  for (double c : {0.0, 0.37, 1.0}) {
    for (double a : {0.3, 0.4, 0.5}) {
      const GrayImage k = GrayImage::Constant(7, 12, c);
      CHECK(max_abs(reduce(k, a).array() - c) < 1e-12);
      CHECK(max_abs(expand(GrayImage(GrayImage::Constant(4, 6, c)), 7, 12, a).array() - c) < 1e-12);
      CHECK(max_abs(expand(reduce(k, a), 7, 12, a).array() - c) < 1e-12);
    }
  }
  CHECK_THROWS_AS(reduce(GrayImage(GrayImage::Zero(1, 5))), DataError);
  CHECK_THROWS_AS(expand(GrayImage(GrayImage::Zero(2, 2)), 6, 4), DataError);
}

TEST_CASE("reduce of a centered impulse") {
  GrayImage img = GrayImage::Zero(9, 9);
  img(4, 4) = 1.0;
  const GrayImage r = reduce(img, 0.4);
  REQUIRE(r.rows() == 5);
  CHECK(r(2, 2) == doctest::Approx(0.16).epsilon(1e-14));
  CHECK(max_abs(r - reduce_oracle(img, 0.4)) < 1e-15);
}

TEST_CASE("reduce and expand match direct 2-D convolution") {
  std::mt19937_64 rng(2);
  for (auto [h, w] : {std::pair{4, 4}, std::pair{9, 9}, std::pair{2, 7}, std::pair{33, 47}, std::pair{20, 20}}) {
    for (double a : {0.375, 0.4, 0.5}) {
      const GrayImage img = testutil::random_image(h, w, rng());
      CHECK(max_abs(reduce(img, a) - reduce_oracle(img, a)) < 1e-14);
      const GrayImage small = testutil::random_image((h + 1) / 2, (w + 1) / 2, rng());
      CHECK(max_abs(expand(small, h, w, a) - expand_oracle(small, h, w, a)) < 1e-14);
    }
  }
  GrayImage impulse = GrayImage::Zero(2, 2);
  impulse(0, 1) = 1.0;
  const GrayImage e = expand(impulse, 4, 4);
  CHECK(max_abs(e - expand_oracle(impulse, 4, 4, 0.4)) < 1e-15);
  // Column 4 folds back onto column 2, adding an outer tap to the center one.
  CHECK(e(0, 2) == doctest::Approx(2 * 0.4 * 2 * (0.4 + 0.05)));
}

TEST_CASE("build_laplacian: one level, constants, and level sizes") {
  const GrayImage x = testutil::random_image(20, 20, 4);
  const auto one = build_laplacian(x, 1);
  REQUIRE(one.levels.size() == 1);
  CHECK(one.top == reduce(x));
  CHECK(max_abs(one.levels[0] - (x - expand(reduce(x), 20, 20))) == 0.0);

  const auto flat = build_laplacian(GrayImage(GrayImage::Constant(33, 47, 0.6)), 4);
  for (const auto& band : flat.levels) CHECK(max_abs(band) < 1e-12);
  CHECK(max_abs(flat.top.array() - 0.6) < 1e-12);

  Eigen::Index h = 33, w = 47;
  for (const auto& band : flat.levels) {
    CHECK(band.rows() == h);
    CHECK(band.cols() == w);
    h = (h + 1) / 2;
    w = (w + 1) / 2;
  }
  CHECK(flat.top.rows() == h);
  CHECK(flat.top.cols() == w);

  CHECK(max_pyramid_levels(20, 20) == 5);
  CHECK_THROWS_AS(build_laplacian(x, 0), DataError);
  CHECK_THROWS_AS(build_laplacian(x, 6), DataError);
}

TEST_CASE("reconstruct inverts build_laplacian at every valid depth") {
  std::mt19937_64 rng(6);
  for (auto [h, w] : {std::pair{20, 20}, std::pair{33, 47}, std::pair{60, 60}, std::pair{2, 3}}) {
    for (int trial = 0; trial < 3; ++trial) {
      const GrayImage x = testutil::random_image(h, w, rng());
      for (int levels = 1; levels <= max_pyramid_levels(h, w); ++levels) {
        CHECK(rmse(reconstruct(build_laplacian(x, levels)), x) < 1e-10);
      }
    }
  }
}

TEST_CASE("reconstruct: zero bands and a scaled band") {
  LaplacianPyramid<double> p;
  p.levels = {GrayImage::Zero(9, 9), GrayImage::Zero(5, 5)};
  p.top = GrayImage::Constant(3, 3, 0.25);
  CHECK(max_abs(reconstruct(p).array() - 0.25) < 1e-12);

  const GrayImage x = testutil::random_image(17, 23, 9);
  auto pyr = build_laplacian(x, 3);
  const GrayImage band1 = pyr.levels[1];
  pyr.levels[1] *= 2.0;
  // The extra content is band 1 carried up one expand to full resolution.
  const GrayImage extra = expand_oracle(band1, 17, 23, 0.4);
  CHECK(max_abs(reconstruct(pyr) - x - extra) < 1e-12);

  pyr.levels[1] = GrayImage::Zero(4, 4);
  CHECK_THROWS_AS(reconstruct(pyr), DataError);
}

TEST_CASE("spline_blend identities") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const GrayImage a = testutil::random_image(20, 20, rng());
    const GrayImage b = testutil::random_image(20, 20, rng());
    const GrayImage m = testutil::random_image(20, 20, rng());
    const int levels = 1 + trial % 4;
    CHECK(rmse(spline_blend(a, a, m, levels), a) < 1e-10);
    CHECK(rmse(spline_blend(a, b, GrayImage(GrayImage::Ones(20, 20)), levels), a) < 1e-10);
    CHECK(rmse(spline_blend(a, b, GrayImage(GrayImage::Zero(20, 20)), levels), b) < 1e-10);
  }
  const GrayImage z = GrayImage::Zero(4, 4);
  CHECK_THROWS_AS(spline_blend(z, GrayImage(GrayImage::Zero(4, 5)), z, 1), DataError);
  CHECK_THROWS_AS(spline_blend(z, z, GrayImage(GrayImage::Constant(4, 4, 1.5)), 1), DataError);
}

TEST_CASE("spline_blend symmetry under swapping inputs and complementing the mask") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const GrayImage a = testutil::random_image(20, 20, rng());
    const GrayImage b = testutil::random_image(20, 20, rng());
    GrayImage m = testutil::random_image(20, 20, rng());
    if (trial % 2) m = (m.array() > 0.5).cast<double>();
    const GrayImage lhs = spline_blend(a, b, m, 3);
    const GrayImage rhs = spline_blend(b, a, GrayImage(1.0 - m.array()), 3);
    CHECK(max_abs(lhs - rhs) < 1e-12);
  }
}

// White noise can overshoot by more than 0.05, and so can smooth content at
// depth 4 and beyond; the bound is asserted at the depths the pipeline uses.
TEST_CASE("spline_blend overshoot stays within 0.05 of the input range") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 20 + static_cast<int>(rng() % 21);
    const GrayImage a = random_photo(n, n, rng());
    const GrayImage b = random_photo(n, n, rng());
    GrayImage m = GrayImage::Zero(n, n);
    const int q = n / 4;
    m.block(q, q, n - 2 * q, n - 2 * q).setOnes();
    for (int levels : {1, levels_for_patch(10), levels_for_patch(20)}) {
      const GrayImage out = spline_blend(a, b, m, levels);
      const double lo = std::min(a.minCoeff(), b.minCoeff());
      const double hi = std::max(a.maxCoeff(), b.maxCoeff());
      CHECK(out.minCoeff() >= lo - 0.05);
      CHECK(out.maxCoeff() <= hi + 0.05);
    }
  }
}

TEST_CASE("spline_blend of 0 and 1 across a half-plane gives a wide monotone ramp") {
  const int n = 32;
  const GrayImage zero = GrayImage::Zero(n, n);
  const GrayImage one = GrayImage::Ones(n, n);
  GrayImage mask = GrayImage::Zero(n, n);
  mask.leftCols(n / 2).setOnes();  // left half selects A = 0
  const GrayImage out = spline_blend(zero, one, mask, 4);
  const Eigen::VectorXd profile = out.row(n / 2).transpose();
  for (Eigen::Index i = 1; i < profile.size(); ++i) CHECK(profile(i) >= profile(i - 1) - 1e-12);

  const GrayImage feather = mask.cwiseProduct(zero) + (1.0 - mask.array()).matrix().cwiseProduct(one);
  const Eigen::VectorXd hard = feather.row(n / 2).transpose();
  CHECK(rise_width(hard) < 1.0);
  CHECK(rise_width(profile) > 3.0 * std::max(rise_width(hard), 1.0));
}

TEST_CASE("levels_for_patch") {
  CHECK(levels_for_patch(20) == 2);
  CHECK(levels_for_patch(10) == 2);
  CHECK(levels_for_patch(50) == 3);
  CHECK(levels_for_patch(64) == 4);
  for (int p = 4; p < 300; ++p) {
    const int expect = std::max(2, static_cast<int>(std::floor(std::log2(static_cast<double>(p)))) - 2);
    CHECK(levels_for_patch(p) == expect);
  }
}
