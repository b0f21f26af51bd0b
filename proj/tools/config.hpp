#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sketchsynth::cli {

/// Effective settings for a run. Precedence: defaults < config file < flags.
struct PipelineConfig {
  // crude sketch
  int mrf_patch = 10;
  int mrf_overlap = 5;
  int k = 10;
  int search_radius = 5;
  double lambda = 1.0;
  int bp_iters = 30;
  double damping = 0.5;
  // dictionaries and retraining
  int nmf_patch = 20;
  int nmf_overlap = 10;
  int rank = 20;
  int nmf_iters = 500;
  int proj_iters = 200;
  double rel_tol = 1e-5;
  std::uint64_t seed = 0;
  // blending
  double kernel_a = 0.4;
  int blend_levels = 0;  // 0: derived from patch size
  double patch_noise = 0.0;

  int threads = 1;  // not part of the echoed config; outputs do not depend on it

  /// Parses and assigns one `key = value` setting.
  void set(const std::string& key, const std::string& value);
  /// Throws DataError on an inconsistent combination.
  void validate() const;
  /// `key = value` lines for every setting that affects results.
  std::string to_text() const;

  static const std::vector<std::string>& keys();
};

/// Applies a `key = value` file ('#' comments, blank lines ignored).
void apply_config_file(PipelineConfig& cfg, const std::filesystem::path& path);

/// Shortest round-trip decimal form.
std::string format_number(double v);

}  // namespace sketchsynth::cli
