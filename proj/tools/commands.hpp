#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"
#include "sketchsynth/blend.hpp"
#include "sketchsynth/dictionary.hpp"
#include "sketchsynth/mrf.hpp"

namespace sketchsynth::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct SynthesisOutput {
  GrayImage crude;
  std::vector<Patch> retrained;
  GrayImage result;
  MapResult map;
};

CrudeParams crude_params(const PipelineConfig& cfg);
BlendOptions blend_options(const PipelineConfig& cfg);
TrainOptions train_options(const PipelineConfig& cfg);
ProjectionOptions projection_options(const PipelineConfig& cfg);

/// Crude sketch, per-location retraining and full-coverage blending. The
/// photo must already match the dictionary grid.
SynthesisOutput synthesize_pipeline(const GrayImage& photo, const std::vector<TrainingPair>& training,
                                    const DictionarySet& dicts, const PipelineConfig& cfg,
                                    const BlendOptions& blend);

struct CompareOutput {
  GrayImage average;
  GrayImage mincut;
  GrayImage spline10;
  GrayImage spline20;
  double seam_average = 0.0;
  double seam_mincut = 0.0;
  double seam_spline10 = 0.0;
  double seam_spline20 = 0.0;
};

/// The four blend strategies on one photo. Images are quantized to 8 bits and
/// seam energies are measured on the dictionary grid. The half-size spline
/// variant trains its own dictionaries on the training sketches.
CompareOutput blend_compare(const GrayImage& photo, const std::vector<TrainingPair>& training,
                            const DictionarySet& dicts, const PipelineConfig& cfg);

}  // namespace sketchsynth::cli
