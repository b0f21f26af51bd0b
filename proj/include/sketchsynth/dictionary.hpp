#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "sketchsynth/nmf.hpp"
#include "sketchsynth/patching.hpp"

namespace sketchsynth {

/// Nonnegative basis learned for one grid position.
struct LocationDictionary {
  int row = 0;
  int col = 0;
  Eigen::MatrixXd W;  // d x r, patch pixels in row-major order
};

struct TrainingMeta {
  int samples = 0;  // M
  int rank = 0;     // r
  int max_iters = 0;
  std::uint64_t seed = 0;
};

struct DictionarySet {
  GridSpec grid;
  std::vector<LocationDictionary> dictionaries;  // row-major grid order
  TrainingMeta meta;
  /// Final ||V - WH||_F per location; not persisted.
  std::vector<double> final_objective;

  int rank() const { return dictionaries.empty() ? 0 : static_cast<int>(dictionaries.front().W.cols()); }
  const LocationDictionary& at(int row, int col) const { return dictionaries[grid.index(row, col)]; }
};

struct TrainOptions {
  NmfOptions nmf;
  int threads = 1;
};

/// Seed used for the factorization at grid cell `index`.
std::uint64_t location_seed(std::uint64_t seed, int index);

/// One dictionary per grid cell, each factorizing the d x M matrix of the
/// co-located sketch patches. Only W is kept.
DictionarySet train_dictionaries(const std::vector<GrayImage>& sketches, const GridSpec& grid, int rank,
                                 const TrainOptions& opts = {});

/// Patch flattened row-major into a column vector.
Eigen::VectorXd vectorize(const GrayImage& patch);
GrayImage unvectorize(const Eigen::VectorXd& v, int patch);

/// W * alpha, where alpha is the nonnegative projection of y onto W.
Eigen::VectorXd retrain_patch(const Eigen::VectorXd& y, const LocationDictionary& dict,
                              const ProjectionOptions& opts = {});

/// Retrained patches of `crude`, one per grid cell, not yet assembled.
std::vector<Patch> retrain_sketch(const GrayImage& crude, const DictionarySet& dicts,
                                  const ProjectionOptions& opts = {}, int threads = 1);

// Binary dictionary file, little-endian:
//   "NMFD" | version u32 = 1 | patch | overlap | rows | cols | r | d (u32 each)
//   | rows*cols blocks of d*r float64, W row-major, grid row-major.
inline constexpr std::uint32_t kDictionaryFormatVersion = 1;

struct DictionaryHeader {
  std::uint32_t version = 0;
  std::uint32_t patch = 0;
  std::uint32_t overlap = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::uint32_t rank = 0;
  std::uint32_t dim = 0;
};

void write_dictionaries(const DictionarySet& dicts, std::ostream& out);
void save_dictionaries(const DictionarySet& dicts, const std::filesystem::path& path);
DictionaryHeader read_dictionary_header(std::istream& in);
DictionarySet read_dictionaries(std::istream& in);
DictionarySet load_dictionaries(const std::filesystem::path& path);

}  // namespace sketchsynth
