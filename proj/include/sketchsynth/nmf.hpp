#pragma once

// Frobenius-norm NMF by Lee-Seung multiplicative updates, and the
// fixed-dictionary nonnegative projection used to retrain patches.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sketchsynth/error.hpp"

namespace sketchsynth {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Added to every multiplicative-update denominator.
inline constexpr double kNmfEpsilon = 1e-12;

struct NmfOptions {
  int max_iters = 500;
  double rel_tol = 1e-5;
  std::uint64_t seed = 0;
};

template <typename Scalar>
struct NmfResult {
  Matrix<Scalar> W;  // d x r, unit-norm columns
  Matrix<Scalar> H;  // r x M
  /// ||V - WH||_F at initialization, then after every full (H, W) sweep.
  std::vector<Scalar> objective_trace;
  int iterations = 0;
};

namespace detail {

/// Uniform draw in [lo, hi) built from the raw 64-bit engine output, so the
/// sequence is identical across standard library implementations.
template <typename Scalar>
Scalar uniform(std::mt19937_64& rng, Scalar lo, Scalar hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + static_cast<Scalar>(u) * (hi - lo);
}

template <typename Scalar>
Matrix<Scalar> random_positive(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  Matrix<Scalar> m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = uniform<Scalar>(rng, Scalar(0.1), Scalar(1.0));
  }
  return m;
}

/// Rescales W's columns to unit L2 norm and folds the scale into H's rows.
template <typename Scalar>
void normalize_columns(Matrix<Scalar>& W, Matrix<Scalar>& H) {
  for (Eigen::Index k = 0; k < W.cols(); ++k) {
    const Scalar n = W.col(k).norm();
    if (n > Scalar(0)) {
      W.col(k) /= n;
      H.row(k) *= n;
    }
  }
}

}  // namespace detail

struct NoNmfObserver {
  template <typename M>
  void operator()(int, const M&, const M&) const {}
};

/// Factorizes nonnegative V (d x M) into W (d x r) and H (r x M).
///
/// Each iteration applies H <- H .* (W'V) ./ (W'WH + eps) and then
/// W <- W .* (VH') ./ (WHH' + eps), stopping once the relative decrease of
/// the objective drops below `rel_tol` or after `max_iters` sweeps. The
/// observer sees (iteration, W, H) after every sweep. An all-zero V returns
/// the seeded W with H = 0 and a single-entry zero trace.
template <typename Derived, typename Observer = NoNmfObserver>
NmfResult<typename Derived::Scalar> nmf_factorize(const Eigen::MatrixBase<Derived>& V, int r,
                                                  const NmfOptions& opts = {}, Observer&& observe = {}) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index d = V.rows();
  const Eigen::Index m = V.cols();
  if ((V.array() < Scalar(0)).any()) throw DataError("nmf: data matrix has a negative entry");
  if (r < 1 || r > std::min(d, m)) {
    throw DataError("nmf: rank " + std::to_string(r) + " outside [1, min(d, M) = " +
                    std::to_string(std::min(d, m)) + "]");
  }
  const Scalar eps = static_cast<Scalar>(kNmfEpsilon);

  std::mt19937_64 rng(opts.seed);
  NmfResult<Scalar> res;
  res.W = detail::random_positive<Scalar>(d, r, rng);
  res.H = detail::random_positive<Scalar>(r, m, rng);

  if (V.squaredNorm() == Scalar(0)) {
    res.H.setZero();
    detail::normalize_columns(res.W, res.H);
    res.objective_trace.push_back(Scalar(0));
    return res;
  }

  Matrix<Scalar>& W = res.W;
  Matrix<Scalar>& H = res.H;
  res.objective_trace.push_back((V - W * H).norm());
  for (int it = 0; it < opts.max_iters; ++it) {
    const Matrix<Scalar> WtV = W.transpose() * V;
    const Matrix<Scalar> WtWH = (W.transpose() * W) * H;
    H.array() *= WtV.array() / (WtWH.array() + eps);

    const Matrix<Scalar> VHt = V * H.transpose();
    const Matrix<Scalar> WHHt = W * (H * H.transpose());
    W.array() *= VHt.array() / (WHHt.array() + eps);

    res.iterations = it + 1;
    observe(res.iterations, W, H);
    const Scalar prev = res.objective_trace.back();
    const Scalar cur = (V - W * H).norm();
    res.objective_trace.push_back(cur);
    if (prev == Scalar(0) || (prev - cur) / prev < static_cast<Scalar>(opts.rel_tol)) break;
  }
  detail::normalize_columns(W, H);
  return res;
}

struct ProjectionOptions {
  int max_iters = 200;
  double rel_tol = 1e-5;
};

template <typename Scalar>
struct ProjectionResult {
  Vector<Scalar> alpha;
  /// ||y - W alpha|| at initialization and after every update.
  std::vector<Scalar> residual_trace;
};

/// Nonnegative coefficients for y against a fixed dictionary W, by the NMF
/// H-update with a single column. Starts from the constant vector
/// mean(y) / mean(column sums of W).
template <typename DerivedY, typename DerivedW>
ProjectionResult<typename DerivedW::Scalar> project_coefficients(const Eigen::MatrixBase<DerivedY>& y,
                                                                 const Eigen::MatrixBase<DerivedW>& W,
                                                                 const ProjectionOptions& opts = {}) {
  using Scalar = typename DerivedW::Scalar;
  if (y.size() != W.rows()) throw DataError("projection: target length does not match dictionary rows");
  for (Eigen::Index k = 0; k < W.cols(); ++k) {
    if (!(W.col(k).array() != Scalar(0)).any()) throw DataError("projection: dictionary has an all-zero atom");
  }
  const Scalar eps = static_cast<Scalar>(kNmfEpsilon);

  ProjectionResult<Scalar> res;
  const Scalar mean_y = y.mean();
  if (mean_y <= Scalar(0)) {
    res.alpha = Vector<Scalar>::Zero(W.cols());
    res.residual_trace.push_back(y.norm());
    return res;
  }
  const Scalar mean_colsum = W.colwise().sum().mean();
  res.alpha = Vector<Scalar>::Constant(W.cols(), mean_y / mean_colsum);

  const Matrix<Scalar> WtW = W.transpose() * W;
  const Vector<Scalar> Wty = W.transpose() * y;
  res.residual_trace.push_back((y - W * res.alpha).norm());
  for (int it = 0; it < opts.max_iters; ++it) {
    res.alpha.array() *= Wty.array() / ((WtW * res.alpha).array() + eps);
    const Scalar prev = res.residual_trace.back();
    const Scalar cur = (y - W * res.alpha).norm();
    res.residual_trace.push_back(cur);
    if (prev == Scalar(0) || (prev - cur) / prev < static_cast<Scalar>(opts.rel_tol)) break;
  }
  return res;
}

}  // namespace sketchsynth
