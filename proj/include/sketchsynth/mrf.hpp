#pragma once

#include <vector>

#include "sketchsynth/patching.hpp"

namespace sketchsynth {

/// Pixel-aligned photo and artist sketch of the same scene.
struct TrainingPair {
  GrayImage photo;
  GrayImage sketch;
};

struct Candidate {
  GrayImage photo_patch;
  GrayImage sketch_patch;
  double data_cost = 0.0;  // squared L2 distance to the query photo patch
};

struct CandidateSet {
  std::vector<std::vector<Candidate>> nodes;  // grid row-major
  bool truncated = false;                     // some node had fewer than K candidates available
};

/// K nearest training photo patches (squared L2) for every grid node,
/// searched within Chebyshev distance `search_radius` of the node's own
/// position in every training pair. Ties keep pool order: pair, then row
/// offset, then column offset.
CandidateSet build_candidates(const GrayImage& photo, const GridSpec& grid, const std::vector<TrainingPair>& training,
                              int k, int search_radius, int threads = 1);

struct MrfModel {
  GridSpec grid;
  std::vector<std::vector<Candidate>> candidates;
  double lambda = 1.0;
};

enum class Direction { Horizontal, Vertical };

/// Squared L2 distance between two sketch patches over their shared overlap
/// strip. `a` is the left (Horizontal) or upper (Vertical) node.
double smoothness_cost(const Candidate& a, const Candidate& b, Direction dir, const GridSpec& grid);

/// Labeling energy on a 4-connected grid: one unary vector per node and one
/// pairwise table per right/down edge, already weighted.
struct GridEnergy {
  int rows = 0;
  int cols = 0;
  std::vector<Eigen::VectorXd> unary;
  std::vector<Eigen::MatrixXd> right;  // right[n](a, b): node n label a, node n+1 label b
  std::vector<Eigen::MatrixXd> down;   // down[n](a, b): node n label a, node n+cols label b

  int nodes() const { return rows * cols; }
};

/// Data term divided by patch^2, smoothness term by (overlap * patch) and
/// weighted by lambda.
GridEnergy compile_energy(const MrfModel& model);

double energy(const GridEnergy& e, const std::vector<int>& labels);
double energy(const MrfModel& model, const std::vector<int>& labels);

struct BpOptions {
  int max_iters = 30;
  double damping = 0.5;
  double tolerance = 1e-6;
};

struct MapResult {
  std::vector<int> labels;
  double energy = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Min-sum loopy belief propagation with synchronous damped updates.
/// Every iteration's belief argmin is scored and the lowest-energy labeling
/// seen is returned, so the result never loses to the per-node data argmin.
MapResult bp_map(const GridEnergy& e, const BpOptions& opts = {});
MapResult bp_map(const MrfModel& model, const BpOptions& opts = {});

/// Exhaustive minimizer; the lexicographically smallest among ties.
/// Refuses instances with more than 1e6 labelings.
MapResult brute_force_map(const GridEnergy& e);
MapResult brute_force_map(const MrfModel& model);

struct CrudeParams {
  int patch = 10;
  int overlap = 5;
  int k = 10;
  int search_radius = 5;
  double lambda = 1.0;
  BpOptions bp;
  int threads = 1;
};

struct CrudeResult {
  GrayImage sketch;
  MapResult map;
  bool truncated = false;
};

/// Candidate retrieval, BP labeling and overlap-averaged assembly of the
/// chosen sketch patches.
CrudeResult synthesize_crude(const GrayImage& photo, const std::vector<TrainingPair>& training,
                             const CrudeParams& params = {});

}  // namespace sketchsynth
