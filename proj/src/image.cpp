#include "sketchsynth/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "sketchsynth/error.hpp"

namespace sketchsynth {

namespace {

// Netpbm header tokenizer; '#' starts a comment that runs to end of line.
class PnmReader {
 public:
  explicit PnmReader(std::string bytes) : bytes_(std::move(bytes)) {}

  std::string token() {
    skip_space_and_comments();
    std::string out;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      out.push_back(bytes_[pos_++]);
    }
    return out;
  }

  long integer(const char* what) {
    const std::string tok = token();
    if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      throw DataError(std::string("malformed PNM header: bad ") + what);
    }
    return std::stol(tok);
  }

  // Exactly one whitespace byte separates the header from binary raster data.
  void consume_single_whitespace() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw DataError("malformed PNM header: missing separator before raster");
    }
    ++pos_;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  unsigned char byte() { return static_cast<unsigned char>(bytes_[pos_++]); }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string bytes_;
  std::size_t pos_ = 0;
};

int checked_dimension(long v, const char* what) {
  if (v <= 0 || v > (1L << 20)) throw DataError(std::string("unsupported image ") + what);
  return static_cast<int>(v);
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read image: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  PnmReader rd(std::move(bytes));
  const std::string magic = rd.token();
  const bool binary = magic == "P5" || magic == "P6";
  const bool ascii = magic == "P2" || magic == "P3";
  if (!binary && !ascii) throw DataError("unsupported image format in " + path.string());
  const int channels = (magic == "P6" || magic == "P3") ? 3 : 1;

  const int width = checked_dimension(rd.integer("width"), "width");
  const int height = checked_dimension(rd.integer("height"), "height");
  const long maxval = rd.integer("maxval");
  if (maxval < 1 || maxval > 65535) throw DataError("unsupported PNM maxval in " + path.string());

  const std::size_t samples = static_cast<std::size_t>(width) * height * channels;
  std::vector<double> raw(samples);
  if (binary) {
    rd.consume_single_whitespace();
    const std::size_t bps = maxval > 255 ? 2 : 1;
    if (rd.remaining() < samples * bps) throw DataError("truncated raster in " + path.string());
    for (auto& s : raw) {
      unsigned v = rd.byte();
      if (bps == 2) v = (v << 8) | rd.byte();
      s = static_cast<double>(v);
    }
  } else {
    for (auto& s : raw) s = static_cast<double>(rd.integer("sample"));
  }

  GrayImage img(height, width);
  const double scale = static_cast<double>(maxval);
  for (Eigen::Index i = 0; i < img.size(); ++i) {
    double v;
    if (channels == 3) {
      v = 0.299 * raw[3 * i] + 0.587 * raw[3 * i + 1] + 0.114 * raw[3 * i + 2];
    } else {
      v = raw[i];
    }
    img.data()[i] = std::clamp(v / scale, 0.0, 1.0);
  }
  return img;
}

std::string encode_pgm(const GrayImage& img) {
  std::ostringstream out;
  out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  std::string header = out.str();
  std::string bytes = header;
  bytes.reserve(header.size() + img.size());
  for (Eigen::Index i = 0; i < img.size(); ++i) {
    const double v = std::clamp(img.data()[i], 0.0, 1.0);
    bytes.push_back(static_cast<char>(static_cast<unsigned char>(std::floor(v * 255.0 + 0.5))));
  }
  return bytes;
}

GrayImage quantize_8bit(const GrayImage& img) {
  return img.unaryExpr([](double v) { return std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5) / 255.0; });
}

void save_image(const GrayImage& img, const std::filesystem::path& path) {
  if (img.size() == 0) throw DataError("refusing to save an empty image");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write image: " + path.string());
  const std::string bytes = encode_pgm(img);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

double rmse(const GrayImage& a, const GrayImage& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DataError("rmse: dimension mismatch");
  }
  if (a.size() == 0) return 0.0;
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

bool is_grid_valid(int dim, int patch, int overlap) {
  const int period = 2 * (patch - overlap);
  return dim >= patch && (dim - patch) % period == 0;
}

int largest_grid_valid(int dim, int patch, int overlap) {
  if (patch <= overlap || overlap <= 0) throw DataError("grid requires patch > overlap > 0");
  if (dim < patch) return 0;
  const int period = 2 * (patch - overlap);
  return dim - (dim - patch) % period;
}

GrayImage center_crop(const GrayImage& img, int height, int width) {
  if (height > img.rows() || width > img.cols() || height < 1 || width < 1) {
    throw DataError("center_crop: target exceeds source");
  }
  const Eigen::Index top = (img.rows() - height) / 2;
  const Eigen::Index left = (img.cols() - width) / 2;
  return img.block(top, left, height, width);
}

GrayImage crop_to_grid(const GrayImage& img, int patch, int overlap) {
  const int h = largest_grid_valid(static_cast<int>(img.rows()), patch, overlap);
  const int w = largest_grid_valid(static_cast<int>(img.cols()), patch, overlap);
  if (h == 0 || w == 0) {
    throw DataError("image " + std::to_string(img.rows()) + "x" + std::to_string(img.cols()) +
                    " is smaller than one " + std::to_string(patch) + "px patch");
  }
  return center_crop(img, h, w);
}

}  // namespace sketchsynth
