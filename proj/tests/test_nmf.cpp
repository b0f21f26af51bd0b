#include <doctest.h>

#include <Eigen/Dense>

#include "sketchsynth/error.hpp"
#include "sketchsynth/nmf.hpp"

using namespace sketchsynth;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_nonneg(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

// Largest singular value and its vectors by power iteration on V'V.
struct Rank1 {
  double sigma;
  VectorXd u, v;
};
Rank1 power_iteration(const MatrixXd& V) {
  VectorXd v = VectorXd::Ones(V.cols()).normalized();
  for (int it = 0; it < 1000; ++it) v = (V.transpose() * (V * v)).normalized();
  const VectorXd Vv = V * v;
  return {Vv.norm(), Vv.normalized(), v};
}

// Nonnegative least squares for two atoms by checking every active set.
VectorXd nnls_two_atoms(const MatrixXd& W, const VectorXd& y) {
  std::vector<VectorXd> feasible = {VectorXd::Zero(2)};
  for (int k = 0; k < 2; ++k) {
    VectorXd a = VectorXd::Zero(2);
    a(k) = W.col(k).dot(y) / W.col(k).squaredNorm();
    if (a(k) >= 0) feasible.push_back(a);
  }
  const VectorXd both = (W.transpose() * W).ldlt().solve(W.transpose() * y);
  if ((both.array() >= 0).all()) feasible.push_back(both);
  VectorXd best = feasible.front();
  for (const auto& a : feasible) {
    if ((y - W * a).norm() < (y - W * best).norm()) best = a;
  }
  return best;
}

}  // namespace

TEST_CASE("nmf objective trace is non-increasing on random data") {
  std::mt19937_64 rng(100);
  for (int trial = 0; trial < 50; ++trial) {
    const MatrixXd V = random_nonneg(20 + trial % 7, 15 + trial % 5, rng);
    const int r = 1 + trial % 6;
    const auto res = nmf_factorize(V, r, {200, 0.0, static_cast<std::uint64_t>(trial)});
    REQUIRE(res.objective_trace.size() == static_cast<std::size_t>(res.iterations) + 1);
    for (std::size_t i = 1; i < res.objective_trace.size(); ++i) {
      CHECK(res.objective_trace[i] <= res.objective_trace[i - 1] + 1e-9);
    }
    CHECK(res.objective_trace.back() == doctest::Approx((V - res.W * res.H).norm()).epsilon(1e-10));
  }
}

TEST_CASE("nmf updates keep every entry nonnegative") {
  std::mt19937_64 rng(101);
  const MatrixXd V = random_nonneg(30, 25, rng);
  int seen = 0;
  bool all_nonneg = true;
  nmf_factorize(V, 5, {100, 0.0, 7}, [&](int, const MatrixXd& W, const MatrixXd& H) {
    ++seen;
    all_nonneg = all_nonneg && W.minCoeff() >= 0.0 && H.minCoeff() >= 0.0;
  });
  CHECK(seen == 100);
  CHECK(all_nonneg);
}

TEST_CASE("nmf recovers an exact low-rank product") {
  std::mt19937_64 rng(102);
  int recovered = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const MatrixXd V = random_nonneg(30, 3, rng) * random_nonneg(3, 20, rng);
    const auto res = nmf_factorize(V, 3, {2000, 0.0, static_cast<std::uint64_t>(trial)});
    if ((V - res.W * res.H).norm() < 1e-3 * V.norm()) ++recovered;
  }
  CHECK(recovered >= 4);
}

TEST_CASE("nmf of a rank-one outer product matches the power-iteration oracle") {
  std::mt19937_64 rng(103);
  const VectorXd u = random_nonneg(12, 1, rng).col(0);
  const VectorXd v = random_nonneg(9, 1, rng).col(0);
  const MatrixXd V = u * v.transpose();
  const auto res = nmf_factorize(V, 1, {5000, 0.0, 3});
  CHECK(res.objective_trace.back() < 1e-6 * V.norm());
  const Rank1 oracle = power_iteration(V);
  const MatrixXd best = oracle.sigma * oracle.u * oracle.v.transpose();
  CHECK((res.W * res.H - best).norm() < 1e-6 * V.norm());
  CHECK(res.W.col(0).norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((res.W.col(0) - oracle.u.cwiseAbs()).norm() < 1e-6);
}

TEST_CASE("nmf of all-zero data") {
  const auto res = nmf_factorize(MatrixXd::Zero(6, 4), 2, {50, 1e-5, 9});
  CHECK(res.objective_trace == std::vector<double>{0.0});
  CHECK(res.iterations == 0);
  CHECK(res.H.isZero(0.0));
  CHECK(res.W.minCoeff() > 0.0);
  for (Eigen::Index k = 0; k < 2; ++k) CHECK(res.W.col(k).norm() == doctest::Approx(1.0));
}

TEST_CASE("nmf argument checks, determinism and the unit-norm convention") {
  CHECK_THROWS_AS(nmf_factorize(MatrixXd::Constant(3, 3, -1.0), 1), DataError);
  CHECK_THROWS_AS(nmf_factorize(MatrixXd::Ones(3, 5), 0), DataError);
  CHECK_THROWS_AS(nmf_factorize(MatrixXd::Ones(3, 5), 4), DataError);

  std::mt19937_64 rng(104);
  const MatrixXd V = random_nonneg(16, 10, rng);
  const auto a = nmf_factorize(V, 4, {60, 1e-5, 42});
  const auto b = nmf_factorize(V, 4, {60, 1e-5, 42});
  const auto c = nmf_factorize(V, 4, {60, 1e-5, 43});
  CHECK(a.W == b.W);
  CHECK(a.H == b.H);
  CHECK(a.objective_trace == b.objective_trace);
  CHECK(a.W != c.W);
  for (Eigen::Index k = 0; k < a.W.cols(); ++k) CHECK(a.W.col(k).norm() == doctest::Approx(1.0).epsilon(1e-14));

  MatrixXd W = random_nonneg(16, 4, rng), H = random_nonneg(4, 10, rng);
  const MatrixXd before = W * H;
  detail::normalize_columns(W, H);
  CHECK((W * H - before).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("nmf stops on relative decrease") {
  std::mt19937_64 rng(105);
  const MatrixXd V = random_nonneg(20, 20, rng);
  const auto res = nmf_factorize(V, 5, {500, 1e-3, 1});
  REQUIRE(res.iterations < 500);
  const auto& t = res.objective_trace;
  CHECK((t[t.size() - 2] - t.back()) / t[t.size() - 2] < 1e-3);
  for (std::size_t i = 1; i + 1 < t.size(); ++i) CHECK((t[i - 1] - t[i]) / t[i - 1] >= 1e-3);
}

TEST_CASE("project_coefficients reproduces a single atom") {
  std::mt19937_64 rng(106);
  const MatrixXd W = random_nonneg(40, 5, rng);
  // Coefficients that should vanish have zero gradient there, so the
  // multiplicative update closes the residual only as O(1/iterations).
  for (int k : {0, 3}) {
    const VectorXd y = W.col(k);
    // The unconstrained least-squares solution is e_k, already nonnegative.
    const VectorXd ls = W.colPivHouseholderQr().solve(y);
    CHECK((ls - VectorXd::Unit(5, k)).norm() < 1e-10);
    const auto res = project_coefficients(y, W, {2000000, 0.0});
    CHECK((W * res.alpha - y).norm() < 1e-6 * y.norm());
    CHECK(res.alpha.minCoeff() >= 0.0);
  }
}

TEST_CASE("project_coefficients of a zero target") {
  const MatrixXd W = MatrixXd::Ones(4, 2);
  const auto res = project_coefficients(VectorXd::Zero(4), W);
  CHECK(res.alpha.isZero(0.0));
  CHECK(res.residual_trace == std::vector<double>{0.0});
}

TEST_CASE("project_coefficients matches an active-set NNLS oracle") {
  std::mt19937_64 rng(107);
  int interior = 0, boundary = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const MatrixXd W = random_nonneg(4, 2, rng);
    VectorXd y = random_nonneg(4, 1, rng).col(0);
    const VectorXd expect = nnls_two_atoms(W, y);
    (expect.minCoeff() > 0 ? interior : boundary) += 1;
    const auto res = project_coefficients(y, W, {200000, 0.0});
    CHECK((res.alpha - expect).cwiseAbs().maxCoeff() < 1e-4);
    for (std::size_t i = 1; i < res.residual_trace.size(); ++i) {
      CHECK(res.residual_trace[i] <= res.residual_trace[i - 1] + 1e-12);
    }
  }
  CHECK(interior > 0);
  CHECK(boundary > 0);
}

TEST_CASE("project_coefficients: scaling and argument checks") {
  std::mt19937_64 rng(108);
  const MatrixXd W = random_nonneg(25, 4, rng);
  const VectorXd y = random_nonneg(25, 1, rng).col(0);
  const auto base = project_coefficients(y, W);
  const auto scaled = project_coefficients(y, MatrixXd(2.0 * W));
  CHECK((W * base.alpha - 2.0 * W * scaled.alpha).norm() < 1e-10);

  // Per-column rescaling changes the starting point, so only the converged
  // reconstructions agree.
  MatrixXd Wn = W;
  MatrixXd dummy = MatrixXd::Zero(4, 1);
  detail::normalize_columns(Wn, dummy);
  const auto a = project_coefficients(y, W, {100000, 0.0});
  const auto b = project_coefficients(y, Wn, {100000, 0.0});
  CHECK((W * a.alpha - Wn * b.alpha).norm() < 1e-6);

  MatrixXd bad = W;
  bad.col(2).setZero();
  CHECK_THROWS_AS(project_coefficients(y, bad), DataError);
  CHECK_THROWS_AS(project_coefficients(VectorXd(VectorXd::Ones(3)), W), DataError);
}
