#include "sketchsynth/mrf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "sketchsynth/error.hpp"
#include "sketchsynth/parallel.hpp"

namespace sketchsynth {

namespace {

struct PoolEntry {
  double cost;
  int pair;
  int top;
  int left;
};

// Neighbor layout used for BP messages: messages into a node from each side.
enum Side { kFromUp = 0, kFromDown = 1, kFromLeft = 2, kFromRight = 3 };

}  // namespace

CandidateSet build_candidates(const GrayImage& photo, const GridSpec& grid, const std::vector<TrainingPair>& training,
                              int k, int search_radius, int threads) {
  if (training.empty()) throw DataError("empty training set");
  if (k < 1) throw DataError("candidate count K must be at least 1");
  if (search_radius < 0) throw DataError("search radius must be nonnegative");
  if (photo.rows() != grid.image_h || photo.cols() != grid.image_w) {
    throw DataError("photo does not match the MRF grid");
  }
  for (std::size_t t = 0; t < training.size(); ++t) {
    const auto& tp = training[t];
    if (tp.photo.rows() != tp.sketch.rows() || tp.photo.cols() != tp.sketch.cols()) {
      throw DataError("training pair " + std::to_string(t) + ": photo and sketch sizes differ");
    }
    if (tp.photo.rows() < photo.rows() || tp.photo.cols() < photo.cols()) {
      throw DataError("training pair " + std::to_string(t) + " is smaller than the query photo");
    }
  }

  const int P = grid.patch;
  CandidateSet out;
  out.nodes.resize(grid.count());
  std::vector<char> short_pool(grid.count(), 0);

  parallel_for(grid.count(), threads, [&](int n) {
    const int t0 = grid.top(n / grid.cols);
    const int l0 = grid.left(n % grid.cols);
    const auto query = photo.block(t0, l0, P, P);

    std::vector<PoolEntry> pool;
    for (int pi = 0; pi < static_cast<int>(training.size()); ++pi) {
      const GrayImage& tphoto = training[pi].photo;
      const int max_top = static_cast<int>(tphoto.rows()) - P;
      const int max_left = static_cast<int>(tphoto.cols()) - P;
      for (int t = std::max(0, t0 - search_radius); t <= std::min(max_top, t0 + search_radius); ++t) {
        for (int l = std::max(0, l0 - search_radius); l <= std::min(max_left, l0 + search_radius); ++l) {
          pool.push_back({(tphoto.block(t, l, P, P) - query).squaredNorm(), pi, t, l});
        }
      }
    }
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), pool.size());
    short_pool[n] = pool.size() < static_cast<std::size_t>(k);
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(),
                      [](const PoolEntry& a, const PoolEntry& b) {
                        if (a.cost != b.cost) return a.cost < b.cost;
                        if (a.pair != b.pair) return a.pair < b.pair;
                        if (a.top != b.top) return a.top < b.top;
                        return a.left < b.left;
                      });
    auto& cands = out.nodes[n];
    cands.reserve(keep);
    for (std::size_t c = 0; c < keep; ++c) {
      const auto& e = pool[c];
      const auto& tp = training[e.pair];
      cands.push_back({tp.photo.block(e.top, e.left, P, P), tp.sketch.block(e.top, e.left, P, P), e.cost});
    }
  });
  out.truncated = std::any_of(short_pool.begin(), short_pool.end(), [](char c) { return c != 0; });
  return out;
}

double smoothness_cost(const Candidate& a, const Candidate& b, Direction dir, const GridSpec& grid) {
  const int ov = grid.overlap;
  if (dir == Direction::Horizontal) {
    return (a.sketch_patch.rightCols(ov) - b.sketch_patch.leftCols(ov)).squaredNorm();
  }
  return (a.sketch_patch.bottomRows(ov) - b.sketch_patch.topRows(ov)).squaredNorm();
}

GridEnergy compile_energy(const MrfModel& model) {
  const GridSpec& g = model.grid;
  if (static_cast<int>(model.candidates.size()) != g.count()) {
    throw DataError("MRF model needs one candidate list per grid node");
  }
  for (const auto& c : model.candidates) {
    if (c.empty()) throw DataError("MRF node without candidates");
  }
  if (model.lambda < 0.0) throw DataError("lambda must be nonnegative");

  const double unary_scale = 1.0 / (static_cast<double>(g.patch) * g.patch);
  const double pair_scale = model.lambda / (static_cast<double>(g.overlap) * g.patch);

  GridEnergy e;
  e.rows = g.rows;
  e.cols = g.cols;
  e.unary.resize(g.count());
  e.right.resize(g.count());
  e.down.resize(g.count());
  for (int n = 0; n < g.count(); ++n) {
    const auto& cn = model.candidates[n];
    e.unary[n].resize(static_cast<Eigen::Index>(cn.size()));
    for (std::size_t a = 0; a < cn.size(); ++a) e.unary[n](a) = cn[a].data_cost * unary_scale;

    const int row = n / g.cols;
    const int col = n % g.cols;
    auto table = [&](const std::vector<Candidate>& other, Direction dir) {
      Eigen::MatrixXd m(cn.size(), other.size());
      for (std::size_t a = 0; a < cn.size(); ++a) {
        for (std::size_t b = 0; b < other.size(); ++b) m(a, b) = pair_scale * smoothness_cost(cn[a], other[b], dir, g);
      }
      return m;
    };
    if (col + 1 < g.cols) e.right[n] = table(model.candidates[n + 1], Direction::Horizontal);
    if (row + 1 < g.rows) e.down[n] = table(model.candidates[n + g.cols], Direction::Vertical);
  }
  return e;
}

double energy(const GridEnergy& e, const std::vector<int>& labels) {
  if (static_cast<int>(labels.size()) != e.nodes()) throw DataError("labeling size does not match model");
  double total = 0.0;
  for (int n = 0; n < e.nodes(); ++n) total += e.unary[n](labels[n]);
  for (int n = 0; n < e.nodes(); ++n) {
    const int col = n % e.cols;
    const int row = n / e.cols;
    if (col + 1 < e.cols) total += e.right[n](labels[n], labels[n + 1]);
    if (row + 1 < e.rows) total += e.down[n](labels[n], labels[n + e.cols]);
  }
  return total;
}

double energy(const MrfModel& model, const std::vector<int>& labels) { return energy(compile_energy(model), labels); }

MapResult bp_map(const GridEnergy& e, const BpOptions& opts) {
  if (!(opts.damping >= 0.0 && opts.damping < 1.0)) throw DataError("damping must lie in [0, 1)");
  const int N = e.nodes();
  const int C = e.cols;

  // msg[side][n]: message arriving at node n from its neighbor on `side`.
  std::array<std::vector<Eigen::VectorXd>, 4> msg;
  for (auto& side : msg) {
    side.resize(N);
    for (int n = 0; n < N; ++n) side[n] = Eigen::VectorXd::Zero(e.unary[n].size());
  }
  auto has = [&](int n, int side) {
    switch (side) {
      case kFromUp: return n / C > 0;
      case kFromDown: return n / C + 1 < e.rows;
      case kFromLeft: return n % C > 0;
      default: return n % C + 1 < C;
    }
  };

  auto decode = [&] {
    std::vector<int> labels(N);
    for (int n = 0; n < N; ++n) {
      Eigen::VectorXd belief = e.unary[n];
      for (int s = 0; s < 4; ++s) {
        if (has(n, s)) belief += msg[s][n];
      }
      Eigen::Index best = 0;
      for (Eigen::Index a = 1; a < belief.size(); ++a) {
        if (belief(a) < belief(best)) best = a;
      }
      labels[n] = static_cast<int>(best);
    }
    return labels;
  };

  MapResult res;
  res.labels = decode();  // zero messages: per-node data argmin
  res.energy = energy(e, res.labels);

  std::array<std::vector<Eigen::VectorXd>, 4> next = msg;
  for (int it = 0; it < opts.max_iters; ++it) {
    double change = 0.0;
    for (int n = 0; n < N; ++n) {
      // Outgoing message from n toward each neighbor, excluding what that
      // neighbor sent.
      Eigen::VectorXd total = e.unary[n];
      for (int s = 0; s < 4; ++s) {
        if (has(n, s)) total += msg[s][n];
      }
      auto send = [&](int toward, int target, int arrive_side, const Eigen::MatrixXd& table, bool n_is_row) {
        const Eigen::VectorXd h = total - msg[toward][n];
        const Eigen::Index kt = e.unary[target].size();
        Eigen::VectorXd m(kt);
        for (Eigen::Index b = 0; b < kt; ++b) {
          double best = std::numeric_limits<double>::infinity();
          for (Eigen::Index a = 0; a < h.size(); ++a) {
            const double v = h(a) + (n_is_row ? table(a, b) : table(b, a));
            best = std::min(best, v);
          }
          m(b) = best;
        }
        m.array() -= m.minCoeff();
        const Eigen::VectorXd& old = msg[arrive_side][target];
        Eigen::VectorXd damped = opts.damping * old + (1.0 - opts.damping) * m;
        change = std::max(change, (damped - old).cwiseAbs().maxCoeff());
        next[arrive_side][target] = std::move(damped);
      };
      if (has(n, kFromRight)) send(kFromRight, n + 1, kFromLeft, e.right[n], true);
      if (has(n, kFromLeft)) send(kFromLeft, n - 1, kFromRight, e.right[n - 1], false);
      if (has(n, kFromDown)) send(kFromDown, n + C, kFromUp, e.down[n], true);
      if (has(n, kFromUp)) send(kFromUp, n - C, kFromDown, e.down[n - C], false);
    }
    std::swap(msg, next);
    res.iterations = it + 1;

    std::vector<int> labels = decode();
    const double en = energy(e, labels);
    if (en < res.energy) {
      res.energy = en;
      res.labels = std::move(labels);
    }
    if (change < opts.tolerance) {
      res.converged = true;
      break;
    }
  }
  if (opts.max_iters == 0) res.converged = true;
  return res;
}

MapResult bp_map(const MrfModel& model, const BpOptions& opts) { return bp_map(compile_energy(model), opts); }

MapResult brute_force_map(const GridEnergy& e) {
  const int N = e.nodes();
  double space = 1.0;
  for (const auto& u : e.unary) space *= static_cast<double>(u.size());
  if (space > 1e6) throw DataError("brute-force MAP refused: more than 1e6 labelings");

  std::vector<int> labels(N, 0);
  MapResult res;
  res.labels = labels;
  res.energy = energy(e, labels);
  res.converged = true;
  while (true) {
    // Odometer increment, last node fastest, giving lexicographic order.
    int n = N - 1;
    while (n >= 0 && labels[n] + 1 == e.unary[n].size()) labels[n--] = 0;
    if (n < 0) break;
    ++labels[n];
    const double en = energy(e, labels);
    if (en < res.energy) {
      res.energy = en;
      res.labels = labels;
    }
  }
  return res;
}

MapResult brute_force_map(const MrfModel& model) { return brute_force_map(compile_energy(model)); }

CrudeResult synthesize_crude(const GrayImage& photo, const std::vector<TrainingPair>& training,
                             const CrudeParams& params) {
  const GridSpec grid = make_grid(static_cast<int>(photo.rows()), static_cast<int>(photo.cols()), params.patch,
                                  params.overlap);
  CandidateSet cands = build_candidates(photo, grid, training, params.k, params.search_radius, params.threads);

  MrfModel model{grid, std::move(cands.nodes), params.lambda};
  CrudeResult out;
  out.truncated = cands.truncated;
  out.map = bp_map(model, params.bp);

  std::vector<Patch> chosen;
  chosen.reserve(grid.count());
  for (int n = 0; n < grid.count(); ++n) {
    const int row = n / grid.cols;
    const int col = n % grid.cols;
    chosen.push_back({row, col, grid.top(row), grid.left(col), model.candidates[n][out.map.labels[n]].sketch_patch});
  }
  out.sketch = assemble_average(chosen, grid);
  return out;
}

}  // namespace sketchsynth
