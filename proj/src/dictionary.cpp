#include "sketchsynth/dictionary.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "sketchsynth/error.hpp"
#include "sketchsynth/parallel.hpp"

namespace sketchsynth {

namespace {

constexpr std::array<char, 4> kMagic = {'N', 'M', 'F', 'D'};

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) {
    throw DataError("dictionary file truncated");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

std::uint64_t location_seed(std::uint64_t seed, int index) {
  return mix(seed ^ mix(static_cast<std::uint64_t>(index)));
}

Eigen::VectorXd vectorize(const GrayImage& patch) {
  return Eigen::Map<const Eigen::VectorXd>(patch.data(), patch.size());
}

GrayImage unvectorize(const Eigen::VectorXd& v, int patch) {
  if (v.size() != static_cast<Eigen::Index>(patch) * patch) throw DataError("unvectorize: length mismatch");
  return Eigen::Map<const GrayImage>(v.data(), patch, patch);
}

DictionarySet train_dictionaries(const std::vector<GrayImage>& sketches, const GridSpec& grid, int rank,
                                 const TrainOptions& opts) {
  const int samples = static_cast<int>(sketches.size());
  if (samples == 0) throw DataError("no training sketches");
  if (rank > samples) {
    throw DataError("rank exceeds training count (r = " + std::to_string(rank) + ", M = " + std::to_string(samples) +
                    ")");
  }
  const int d = grid.patch * grid.patch;
  if (rank < 1 || rank > d) throw DataError("rank must lie in [1, patch^2]");
  for (const auto& s : sketches) {
    if (s.rows() != grid.image_h || s.cols() != grid.image_w) {
      throw DataError("training sketch " + std::to_string(s.rows()) + "x" + std::to_string(s.cols()) +
                      " does not match grid " + std::to_string(grid.image_h) + "x" + std::to_string(grid.image_w));
    }
  }

  DictionarySet set;
  set.grid = grid;
  set.meta = {samples, rank, opts.nmf.max_iters, opts.nmf.seed};
  set.dictionaries.resize(grid.count());
  set.final_objective.resize(grid.count());

  parallel_for(grid.count(), opts.threads, [&](int k) {
    const int row = k / grid.cols;
    const int col = k % grid.cols;
    Eigen::MatrixXd V(d, samples);
    for (int j = 0; j < samples; ++j) {
      V.col(j) = vectorize(sketches[j].block(grid.top(row), grid.left(col), grid.patch, grid.patch));
    }
    NmfOptions local = opts.nmf;
    local.seed = location_seed(opts.nmf.seed, k);
    auto fit = nmf_factorize(V, rank, local);
    for (Eigen::Index a = 0; a < fit.W.cols(); ++a) {
      if (!(fit.W.col(a).array() > 0.0).any()) {
        throw InternalError("training produced an all-zero atom at location " + std::to_string(k));
      }
    }
    set.dictionaries[k] = {row, col, std::move(fit.W)};
    set.final_objective[k] = fit.objective_trace.back();
  });
  return set;
}

Eigen::VectorXd retrain_patch(const Eigen::VectorXd& y, const LocationDictionary& dict,
                              const ProjectionOptions& opts) {
  if (y.size() != dict.W.rows()) throw DataError("retrain_patch: patch length does not match dictionary");
  const auto proj = project_coefficients(y, dict.W, opts);
  return dict.W * proj.alpha;
}

std::vector<Patch> retrain_sketch(const GrayImage& crude, const DictionarySet& dicts, const ProjectionOptions& opts,
                                  int threads) {
  if (crude.rows() != dicts.grid.image_h || crude.cols() != dicts.grid.image_w) {
    throw DataError("crude sketch " + std::to_string(crude.rows()) + "x" + std::to_string(crude.cols()) +
                    " does not match dictionary grid " + std::to_string(dicts.grid.image_h) + "x" +
                    std::to_string(dicts.grid.image_w));
  }
  std::vector<Patch> patches = extract_patches(crude, dicts.grid);
  parallel_for(static_cast<int>(patches.size()), threads, [&](int k) {
    Patch& p = patches[k];
    const Eigen::VectorXd out = retrain_patch(vectorize(p.data), dicts.at(p.grid_row, p.grid_col), opts);
    p.data = unvectorize(out, dicts.grid.patch);
  });
  return patches;
}

void write_dictionaries(const DictionarySet& dicts, std::ostream& out) {
  const auto& g = dicts.grid;
  if (static_cast<int>(dicts.dictionaries.size()) != g.count()) {
    throw InternalError("dictionary count does not match grid");
  }
  const std::uint32_t r = static_cast<std::uint32_t>(dicts.rank());
  const std::uint32_t d = static_cast<std::uint32_t>(g.patch * g.patch);
  out.write(kMagic.data(), kMagic.size());
  for (std::uint32_t v : {kDictionaryFormatVersion, std::uint32_t(g.patch), std::uint32_t(g.overlap),
                          std::uint32_t(g.rows), std::uint32_t(g.cols), r, d}) {
    put_le(out, v);
  }
  for (const auto& loc : dicts.dictionaries) {
    if (loc.W.rows() != d || loc.W.cols() != r) throw InternalError("dictionary shape mismatch");
    for (Eigen::Index i = 0; i < loc.W.rows(); ++i) {
      for (Eigen::Index j = 0; j < loc.W.cols(); ++j) put_le(out, loc.W(i, j));
    }
  }
  if (!out) throw DataError("failed writing dictionary data");
}

void save_dictionaries(const DictionarySet& dicts, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write dictionary file: " + path.string());
  write_dictionaries(dicts, out);
}

DictionaryHeader read_dictionary_header(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw DataError("not an NMFD dictionary file");
  DictionaryHeader h;
  h.version = get_le<std::uint32_t>(in);
  if (h.version != kDictionaryFormatVersion) {
    throw DataError("unsupported dictionary format version " + std::to_string(h.version));
  }
  h.patch = get_le<std::uint32_t>(in);
  h.overlap = get_le<std::uint32_t>(in);
  h.rows = get_le<std::uint32_t>(in);
  h.cols = get_le<std::uint32_t>(in);
  h.rank = get_le<std::uint32_t>(in);
  h.dim = get_le<std::uint32_t>(in);
  if (h.dim != h.patch * h.patch || h.rank == 0 || h.rank > h.dim || h.rows == 0 || h.cols == 0 ||
      h.overlap == 0 || h.overlap >= h.patch) {
    throw DataError("inconsistent dictionary header");
  }
  return h;
}

DictionarySet read_dictionaries(std::istream& in) {
  const DictionaryHeader h = read_dictionary_header(in);
  DictionarySet set;
  const int stride = static_cast<int>(h.patch - h.overlap);
  set.grid = make_grid((h.rows - 1) * stride + h.patch, (h.cols - 1) * stride + h.patch, h.patch, h.overlap);
  set.meta.rank = static_cast<int>(h.rank);
  set.dictionaries.reserve(set.grid.count());
  for (int k = 0; k < set.grid.count(); ++k) {
    LocationDictionary loc{k / set.grid.cols, k % set.grid.cols, Eigen::MatrixXd(h.dim, h.rank)};
    for (Eigen::Index i = 0; i < loc.W.rows(); ++i) {
      for (Eigen::Index j = 0; j < loc.W.cols(); ++j) loc.W(i, j) = get_le<double>(in);
    }
    if ((loc.W.array() < 0.0).any() || !std::isfinite(loc.W.sum())) {
      throw DataError("dictionary " + std::to_string(k) + " has negative or non-finite entries");
    }
    for (Eigen::Index j = 0; j < loc.W.cols(); ++j) {
      if (!(loc.W.col(j).array() > 0.0).any()) {
        throw DataError("dictionary " + std::to_string(k) + " has an all-zero atom");
      }
    }
    set.dictionaries.push_back(std::move(loc));
  }
  return set;
}

DictionarySet load_dictionaries(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("dictionary file not found: " + path.string());
  return read_dictionaries(in);
}

}  // namespace sketchsynth
