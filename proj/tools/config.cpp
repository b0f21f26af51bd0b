#include "config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "sketchsynth/error.hpp"

namespace sketchsynth::cli {

namespace {

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw DataError("config: cannot parse value '" + text + "' for " + key);
  }
  return value;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

const std::vector<std::string>& PipelineConfig::keys() {
  static const std::vector<std::string> k = {
      "mrf_patch", "mrf_overlap", "k",           "search_radius", "lambda",   "bp_iters",
      "damping",   "nmf_patch",   "nmf_overlap", "rank",          "nmf_iters", "proj_iters",
      "rel_tol",   "seed",        "kernel_a",    "blend_levels",  "patch_noise", "threads"};
  return k;
}

void PipelineConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "mrf_patch") mrf_patch = parse_value<int>(key, value);
  else if (key == "mrf_overlap") mrf_overlap = parse_value<int>(key, value);
  else if (key == "k") k = parse_value<int>(key, value);
  else if (key == "search_radius") search_radius = parse_value<int>(key, value);
  else if (key == "lambda") lambda = parse_value<double>(key, value);
  else if (key == "bp_iters") bp_iters = parse_value<int>(key, value);
  else if (key == "damping") damping = parse_value<double>(key, value);
  else if (key == "nmf_patch") nmf_patch = parse_value<int>(key, value);
  else if (key == "nmf_overlap") nmf_overlap = parse_value<int>(key, value);
  else if (key == "rank" || key == "r") rank = parse_value<int>(key, value);
  else if (key == "nmf_iters") nmf_iters = parse_value<int>(key, value);
  else if (key == "proj_iters") proj_iters = parse_value<int>(key, value);
  else if (key == "rel_tol") rel_tol = parse_value<double>(key, value);
  else if (key == "seed") seed = parse_value<std::uint64_t>(key, value);
  else if (key == "kernel_a") kernel_a = parse_value<double>(key, value);
  else if (key == "blend_levels") blend_levels = parse_value<int>(key, value);
  else if (key == "patch_noise") patch_noise = parse_value<double>(key, value);
  else if (key == "threads") threads = parse_value<int>(key, value);
  else throw DataError("config: unknown key '" + key + "'");
}

void PipelineConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw DataError(std::string("config: ") + name + " must be positive");
  };
  positive(mrf_patch, "mrf_patch");
  positive(mrf_overlap, "mrf_overlap");
  positive(k, "k");
  positive(bp_iters, "bp_iters");
  positive(nmf_patch, "nmf_patch");
  positive(nmf_overlap, "nmf_overlap");
  positive(rank, "rank");
  positive(nmf_iters, "nmf_iters");
  positive(proj_iters, "proj_iters");
  positive(threads, "threads");
  if (mrf_overlap >= mrf_patch) throw DataError("config: mrf_overlap must be smaller than mrf_patch");
  if (nmf_patch != 2 * nmf_overlap) throw DataError("config: nmf_patch must equal 2 * nmf_overlap");
  if (search_radius < 0) throw DataError("config: search_radius must be nonnegative");
  if (!(lambda >= 0.0)) throw DataError("config: lambda must be nonnegative");
  if (!(damping >= 0.0 && damping < 1.0)) throw DataError("config: damping must lie in [0, 1)");
  if (!(rel_tol >= 0.0)) throw DataError("config: rel_tol must be nonnegative");
  if (blend_levels < 0) throw DataError("config: blend_levels must be nonnegative");
  if (!(patch_noise >= 0.0)) throw DataError("config: patch_noise must be nonnegative");
}

std::string PipelineConfig::to_text() const {
  std::ostringstream out;
  out << "mrf_patch = " << mrf_patch << '\n'
      << "mrf_overlap = " << mrf_overlap << '\n'
      << "k = " << k << '\n'
      << "search_radius = " << search_radius << '\n'
      << "lambda = " << format_number(lambda) << '\n'
      << "bp_iters = " << bp_iters << '\n'
      << "damping = " << format_number(damping) << '\n'
      << "nmf_patch = " << nmf_patch << '\n'
      << "nmf_overlap = " << nmf_overlap << '\n'
      << "rank = " << rank << '\n'
      << "nmf_iters = " << nmf_iters << '\n'
      << "proj_iters = " << proj_iters << '\n'
      << "rel_tol = " << format_number(rel_tol) << '\n'
      << "seed = " << seed << '\n'
      << "kernel_a = " << format_number(kernel_a) << '\n'
      << "blend_levels = " << blend_levels << '\n'
      << "patch_noise = " << format_number(patch_noise) << '\n';
  return out.str();
}

void apply_config_file(PipelineConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw DataError("config " + path.string() + " line " + std::to_string(lineno) + ": expected key = value");
    }
    cfg.set(trim(body.substr(0, eq)), body.substr(eq + 1));
  }
}

}  // namespace sketchsynth::cli
