#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "sketchsynth/dataset.hpp"
#include "sketchsynth/error.hpp"

namespace sketchsynth::cli {

namespace fs = std::filesystem;

namespace {

// Prefixes data errors with the pipeline stage that raised them.
template <typename F>
auto staged(const char* stage, F&& f) {
  try {
    return f();
  } catch (const DataError& e) {
    throw DataError(std::string(stage) + ": " + e.what());
  }
}

}  // namespace

CrudeParams crude_params(const PipelineConfig& cfg) {
  CrudeParams p;
  p.patch = cfg.mrf_patch;
  p.overlap = cfg.mrf_overlap;
  p.k = cfg.k;
  p.search_radius = cfg.search_radius;
  p.lambda = cfg.lambda;
  p.bp.max_iters = cfg.bp_iters;
  p.bp.damping = cfg.damping;
  p.threads = cfg.threads;
  return p;
}

BlendOptions blend_options(const PipelineConfig& cfg) {
  BlendOptions b;
  b.levels = cfg.blend_levels;
  b.kernel_a = cfg.kernel_a;
  return b;
}

TrainOptions train_options(const PipelineConfig& cfg) {
  TrainOptions t;
  t.nmf.max_iters = cfg.nmf_iters;
  t.nmf.rel_tol = cfg.rel_tol;
  t.nmf.seed = cfg.seed;
  t.threads = cfg.threads;
  return t;
}

ProjectionOptions projection_options(const PipelineConfig& cfg) {
  ProjectionOptions p;
  p.max_iters = cfg.proj_iters;
  p.rel_tol = cfg.rel_tol;
  return p;
}

SynthesisOutput synthesize_pipeline(const GrayImage& photo, const std::vector<TrainingPair>& training,
                                    const DictionarySet& dicts, const PipelineConfig& cfg,
                                    const BlendOptions& blend) {
  if (photo.rows() != dicts.grid.image_h || photo.cols() != dicts.grid.image_w) {
    throw DataError("photo " + std::to_string(photo.rows()) + "x" + std::to_string(photo.cols()) +
                    " does not match dictionary grid " + std::to_string(dicts.grid.image_h) + "x" +
                    std::to_string(dicts.grid.image_w));
  }
  SynthesisOutput out;
  CrudeResult crude = staged("crude sketch", [&] { return synthesize_crude(photo, training, crude_params(cfg)); });
  out.crude = std::move(crude.sketch);
  out.map = std::move(crude.map);
  out.retrained = staged("retraining", [&] {
    return retrain_sketch(out.crude, dicts, projection_options(cfg), cfg.threads);
  });
  out.result = staged("blending", [&] { return blend_full_coverage(out.retrained, dicts.grid, blend); });
  return out;
}

CompareOutput blend_compare(const GrayImage& photo, const std::vector<TrainingPair>& training,
                            const DictionarySet& dicts, const PipelineConfig& cfg) {
  const SynthesisOutput base = synthesize_pipeline(photo, training, dicts, cfg, blend_options(cfg));
  const GridSpec& grid = dicts.grid;

  CompareOutput out;
  const auto noisy = perturb_patches(base.retrained, cfg.patch_noise, location_seed(cfg.seed, -1));
  out.average = blend_with_strategy(noisy, grid, BlendStrategy::Average);
  out.mincut = blend_with_strategy(noisy, grid, BlendStrategy::MinCut);
  out.spline20 = blend_with_strategy(noisy, grid, BlendStrategy::Spline, blend_options(cfg));

  const int half_patch = grid.patch / 2;
  const int half_overlap = grid.overlap / 2;
  const GridSpec small = make_grid(grid.image_h, grid.image_w, half_patch, half_overlap);
  std::vector<GrayImage> sketches;
  sketches.reserve(training.size());
  for (const auto& tp : training) sketches.push_back(center_crop(tp.sketch, grid.image_h, grid.image_w));
  const DictionarySet small_dicts = train_dictionaries(sketches, small, dicts.rank(), train_options(cfg));
  const auto small_patches = perturb_patches(retrain_sketch(base.crude, small_dicts, projection_options(cfg), cfg.threads),
                                             cfg.patch_noise, location_seed(cfg.seed, -2));
  BlendOptions small_blend = blend_options(cfg);
  small_blend.levels = 0;
  out.spline10 = blend_with_strategy(small_patches, small, BlendStrategy::Spline, small_blend);

  // Measured on the 8-bit images as written so `eval` reproduces the report.
  for (GrayImage* img : {&out.average, &out.mincut, &out.spline10, &out.spline20}) *img = quantize_8bit(*img);
  out.seam_average = seam_energy(out.average, grid);
  out.seam_mincut = seam_energy(out.mincut, grid);
  out.seam_spline10 = seam_energy(out.spline10, grid);
  out.seam_spline20 = seam_energy(out.spline20, grid);
  return out;
}

namespace {

// Pipeline settings exposed as --long-flags; the flag name is the config key
// with '-' for '_'.
struct Overrides {
  std::string config_file;
  std::map<std::string, std::string> values;

  void attach(CLI::App* app, const std::vector<std::string>& keys) {
    app->add_option("--config", config_file, "key = value settings file")->check(CLI::ExistingFile);
    for (const auto& key : keys) {
      std::string flag = key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      app->add_option_function<std::string>(
          "--" + flag, [this, key](const std::string& v) { values[key] = v; }, "override " + key);
    }
  }

  PipelineConfig resolve() const {
    PipelineConfig cfg;
    if (!config_file.empty()) apply_config_file(cfg, config_file);
    for (const auto& [k, v] : values) cfg.set(k, v);
    cfg.validate();
    return cfg;
  }
};

void write_sidecar(const PipelineConfig& cfg, const fs::path& dir) {
  std::ofstream out(dir / "run.cfg", std::ios::trunc);
  if (!out) throw DataError("cannot write " + (dir / "run.cfg").string());
  out << cfg.to_text();
}

fs::path parent_or_cwd(const fs::path& p) {
  const fs::path parent = p.parent_path();
  return parent.empty() ? fs::path(".") : parent;
}

GrayImage load_photo_for(const fs::path& path, const GridSpec& grid) {
  GrayImage photo = crop_to_grid(load_image(path), grid.patch, grid.overlap);
  if (photo.rows() != grid.image_h || photo.cols() != grid.image_w) {
    throw DataError("photo crops to " + std::to_string(photo.rows()) + "x" + std::to_string(photo.cols()) +
                    " but the dictionaries cover " + std::to_string(grid.image_h) + "x" +
                    std::to_string(grid.image_w));
  }
  return photo;
}

std::vector<TrainingPair> load_training(const fs::path& manifest, const PipelineConfig& cfg) {
  return load_manifest(manifest, cfg.nmf_patch, cfg.nmf_overlap);
}

DictionarySet load_dicts_checked(const fs::path& path) {
  if (!fs::exists(path)) throw DataError("dictionary file not found: " + path.string());
  return load_dictionaries(path);
}

int cmd_train_dicts(const fs::path& manifest, const fs::path& out_file, const PipelineConfig& cfg,
                    std::ostream& out) {
  const auto training = load_training(manifest, cfg);
  std::vector<GrayImage> sketches;
  sketches.reserve(training.size());
  for (const auto& tp : training) sketches.push_back(tp.sketch);
  const GridSpec grid = make_grid(static_cast<int>(sketches.front().rows()), static_cast<int>(sketches.front().cols()),
                                  cfg.nmf_patch, cfg.nmf_overlap);
  const DictionarySet dicts = train_dictionaries(sketches, grid, cfg.rank, train_options(cfg));
  fs::create_directories(parent_or_cwd(out_file));
  save_dictionaries(dicts, out_file);
  write_sidecar(cfg, parent_or_cwd(out_file));

  std::vector<double> obj = dicts.final_objective;
  std::sort(obj.begin(), obj.end());
  const double median = obj.size() % 2 ? obj[obj.size() / 2] : 0.5 * (obj[obj.size() / 2 - 1] + obj[obj.size() / 2]);
  out << "trained " << dicts.dictionaries.size() << " dictionaries (grid " << grid.rows << "x" << grid.cols
      << ", patch " << grid.patch << ", overlap " << grid.overlap << ", r " << dicts.rank() << ", d "
      << grid.patch * grid.patch << ", M " << sketches.size() << ")\n"
      << "final objective min/median/max: " << format_number(obj.front()) << " / " << format_number(median) << " / "
      << format_number(obj.back()) << '\n';
  return kOk;
}

int cmd_synthesize(const fs::path& photo_path, const fs::path& manifest, const fs::path& dict_file,
                   const fs::path& out_path, const PipelineConfig& cfg, bool dump_crude, const std::string& dump_passes,
                   std::ostream& out) {
  const DictionarySet dicts = load_dicts_checked(dict_file);
  const auto training = load_training(manifest, cfg);
  const GrayImage photo = load_photo_for(photo_path, dicts.grid);

  BlendOptions blend = blend_options(cfg);
  if (!dump_passes.empty()) {
    fs::create_directories(dump_passes);
    blend.on_pass = [&](int pass, const GrayImage& canvas) {
      save_image(canvas, fs::path(dump_passes) / ("pass" + std::to_string(pass) + ".pgm"));
    };
  }
  const SynthesisOutput result = synthesize_pipeline(photo, training, dicts, cfg, blend);
  fs::create_directories(parent_or_cwd(out_path));
  save_image(result.result, out_path);
  if (dump_crude) {
    fs::path crude_path = out_path;
    crude_path.replace_extension(".crude.pgm");
    save_image(result.crude, crude_path);
    out << "crude sketch: " << crude_path.string() << '\n';
  }
  write_sidecar(cfg, parent_or_cwd(out_path));
  out << "crude MAP energy " << format_number(result.map.energy) << " after " << result.map.iterations
      << " BP iterations" << (result.map.converged ? "" : " (not converged)") << '\n'
      << "wrote " << out_path.string() << '\n';
  return kOk;
}

int cmd_blend_compare(const fs::path& photo_path, const fs::path& manifest, const fs::path& dict_file,
                      const fs::path& out_dir, const PipelineConfig& cfg, std::ostream& out) {
  const DictionarySet dicts = load_dicts_checked(dict_file);
  const auto training = load_training(manifest, cfg);
  const GrayImage photo = load_photo_for(photo_path, dicts.grid);
  const CompareOutput cmp = blend_compare(photo, training, dicts, cfg);

  fs::create_directories(out_dir);
  save_image(cmp.average, out_dir / "average.pgm");
  save_image(cmp.mincut, out_dir / "mincut.pgm");
  save_image(cmp.spline10, out_dir / "spline10.pgm");
  save_image(cmp.spline20, out_dir / "spline20.pgm");

  std::ostringstream report;
  report << "# seam energy on the " << dicts.grid.patch << "/" << dicts.grid.overlap << " patch grid\n"
         << "average " << format_number(cmp.seam_average) << '\n'
         << "mincut " << format_number(cmp.seam_mincut) << '\n'
         << "spline10 " << format_number(cmp.seam_spline10) << '\n'
         << "spline20 " << format_number(cmp.seam_spline20) << '\n';
  std::ofstream rep(out_dir / "report.txt", std::ios::trunc);
  if (!rep) throw DataError("cannot write report in " + out_dir.string());
  rep << report.str();
  write_sidecar(cfg, out_dir);
  out << report.str();
  return kOk;
}

int cmd_gen_synthetic(const fs::path& out_dir, int n, int h, int w, const SyntheticStyle& style, std::ostream& out) {
  check_synthetic_dims(h, w);
  const auto pairs = gen_synthetic_pairs(n, h, w, style);
  fs::create_directories(out_dir);
  std::ofstream manifest(out_dir / "manifest.txt", std::ios::trunc);
  if (!manifest) throw DataError("cannot write manifest in " + out_dir.string());
  manifest << "# synthetic pairs: n=" << n << " size=" << h << "x" << w << " seed=" << style.seed
           << " gamma=" << format_number(style.gamma) << " edge_gain=" << format_number(style.edge_gain)
           << " blur_radius=" << style.blur_radius << '\n';
  for (int j = 0; j < n; ++j) {
    char stem[32];
    std::snprintf(stem, sizeof(stem), "%03d.pgm", j);
    const std::string photo = std::string("photo_") + stem;
    const std::string sketch = std::string("sketch_") + stem;
    save_image(pairs[j].photo, out_dir / photo);
    save_image(pairs[j].sketch, out_dir / sketch);
    manifest << photo << '\t' << sketch << '\n';
  }
  out << "wrote " << n << " pairs to " << out_dir.string() << '\n';
  return kOk;
}

int cmd_eval(const fs::path& result_path, const fs::path& reference_path, int patch, int overlap, std::ostream& out) {
  const GrayImage result = load_image(result_path);
  const GrayImage reference = load_image(reference_path);
  if (result.rows() != reference.rows() || result.cols() != reference.cols()) {
    throw DataError("eval: result is " + std::to_string(result.rows()) + "x" + std::to_string(result.cols()) +
                    " but reference is " + std::to_string(reference.rows()) + "x" + std::to_string(reference.cols()));
  }
  out << "rmse " << format_number(rmse(result, reference)) << '\n';
  const GridSpec grid = make_grid(static_cast<int>(result.rows()), static_cast<int>(result.cols()), patch, overlap);
  out << "seam_energy " << format_number(seam_energy(result, grid)) << '\n'
      << "reference_seam_energy " << format_number(seam_energy(reference, grid)) << '\n';
  return kOk;
}

int cmd_dict_info(const fs::path& dict_file, std::ostream& out) {
  std::ifstream in(dict_file, std::ios::binary);
  if (!in) throw DataError("dictionary file not found: " + dict_file.string());
  const DictionaryHeader h = read_dictionary_header(in);
  out << "format NMFD v" << h.version << '\n'
      << "patch " << h.patch << '\n'
      << "overlap " << h.overlap << '\n'
      << "rows " << h.rows << '\n'
      << "cols " << h.cols << '\n'
      << "r " << h.rank << '\n'
      << "d " << h.dim << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Patch-based photo-to-sketch synthesis", "sketchsynth"};
  app.require_subcommand(1);
  const auto& keys = PipelineConfig::keys();

  std::string manifest, out_file, photo, dict, out_dir, dump_passes, result, reference;
  bool dump_crude = false;

  Overrides train_ov, synth_ov, compare_ov;
  auto* train = app.add_subcommand("train-dicts", "Train per-location NMF dictionaries from a manifest");
  train->add_option("--manifest", manifest, "training manifest")->required();
  train->add_option("--out", out_file, "output dictionary file")->required();
  train_ov.attach(train, keys);

  auto* synth = app.add_subcommand("synthesize", "Synthesize a sketch for one photo");
  synth->add_option("--photo", photo, "input photo")->required();
  synth->add_option("--manifest", manifest, "training manifest")->required();
  synth->add_option("--dict", dict, "dictionary file")->required();
  synth->add_option("--out", out_file, "output sketch (PGM)")->required();
  synth->add_flag("--dump-crude", dump_crude, "also write the crude sketch as <out>.crude.pgm");
  synth->add_option("--dump-passes", dump_passes, "directory for pass1/2/3 snapshots");
  synth_ov.attach(synth, keys);

  auto* compare = app.add_subcommand("blend-compare", "Compare blend strategies on one photo");
  compare->add_option("--photo", photo, "input photo")->required();
  compare->add_option("--manifest", manifest, "training manifest")->required();
  compare->add_option("--dict", dict, "dictionary file")->required();
  compare->add_option("--out-dir", out_dir, "output directory")->required();
  compare_ov.attach(compare, keys);

  int n = 30, height = 60, width = 60;
  SyntheticStyle style;
  auto* gen = app.add_subcommand("gen-synthetic", "Write synthetic photo/sketch pairs and a manifest");
  gen->add_option("--out-dir", out_dir, "output directory")->required();
  gen->add_option("--n", n, "pair count")->capture_default_str();
  gen->add_option("--height", height, "image height")->capture_default_str();
  gen->add_option("--width", width, "image width")->capture_default_str();
  gen->add_option("--seed", style.seed, "generator seed")->capture_default_str();
  gen->add_option("--gamma", style.gamma, "tone curve exponent")->capture_default_str();
  gen->add_option("--edge-gain", style.edge_gain, "unsharp mask gain")->capture_default_str();
  gen->add_option("--blur-radius", style.blur_radius, "unsharp mask box radius")->capture_default_str();

  int eval_patch = 20, eval_overlap = 10;
  auto* eval = app.add_subcommand("eval", "RMSE and seam energy of a result against a reference");
  eval->add_option("--result", result, "result image")->required();
  eval->add_option("--reference", reference, "reference image")->required();
  eval->add_option("--patch", eval_patch, "patch size of the seam grid")->capture_default_str();
  eval->add_option("--overlap", eval_overlap, "overlap of the seam grid")->capture_default_str();

  auto* info = app.add_subcommand("dict-info", "Print a dictionary file header");
  info->add_option("--dict", dict, "dictionary file")->required();

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.push_back("sketchsynth");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (train->parsed()) return cmd_train_dicts(manifest, out_file, train_ov.resolve(), out);
    if (synth->parsed()) {
      return cmd_synthesize(photo, manifest, dict, out_file, synth_ov.resolve(), dump_crude, dump_passes, out);
    }
    if (compare->parsed()) return cmd_blend_compare(photo, manifest, dict, out_dir, compare_ov.resolve(), out);
    if (gen->parsed()) return cmd_gen_synthetic(out_dir, n, height, width, style, out);
    if (eval->parsed()) return cmd_eval(result, reference, eval_patch, eval_overlap, out);
    if (info->parsed()) return cmd_dict_info(dict, out);
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

}  // namespace sketchsynth::cli
