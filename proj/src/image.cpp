#include "livqual/image.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>

#include "livqual/error.hpp"

namespace livqual {

namespace {

void check_dimensions(int width, int height) {
  if (width < GrayImage::kMinSide || height < GrayImage::kMinSide) {
    throw Error(ErrorCode::ImageTooSmall,
                "image is " + std::to_string(width) + "x" +
                    std::to_string(height) + ", minimum is " +
                    std::to_string(GrayImage::kMinSide) + "x" +
                    std::to_string(GrayImage::kMinSide));
  }
}

} // namespace

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels,
                     double dpi)
    : width_(width), height_(height), dpi_(dpi), pixels_(std::move(pixels)) {
  check_dimensions(width, height);
  if (pixels_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::InvalidArgument,
                "pixel count does not match image dimensions");
  }
  if (!(dpi > 0.0) || !std::isfinite(dpi)) {
    throw Error(ErrorCode::InvalidArgument, "dpi must be positive");
  }
}

GrayImage::GrayImage(int width, int height, std::uint8_t fill, double dpi)
    : GrayImage(width, height,
                std::vector<std::uint8_t>(
                    static_cast<std::size_t>(std::max(width, 0)) *
                        std::max(height, 0),
                    fill),
                dpi) {}

BlockGrid block_partition(int width, int height, int block_size) {
  if (block_size < 8 || block_size > std::min(width, height)) {
    throw Error(ErrorCode::InvalidArgument,
                "block size " + std::to_string(block_size) +
                    " outside [8, min(width, height)]");
  }
  return {block_size, width / block_size, height / block_size};
}

BlockGrid block_partition(const GrayImage &image, int block_size) {
  return block_partition(image.width(), image.height(), block_size);
}

// --- Mask --------------------------------------------------------------------

Mask Mask::from_pixels(int width, int height,
                       std::vector<std::uint8_t> pixel_flags,
                       const BlockGrid &grid) {
  if (pixel_flags.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::InvalidArgument, "mask size mismatch");
  }
  if (grid.covered_width() > width || grid.covered_height() > height) {
    throw Error(ErrorCode::InvalidArgument, "grid exceeds mask extent");
  }
  Mask m;
  m.width_ = width;
  m.height_ = height;
  m.grid_ = grid;
  m.pixels_ = std::move(pixel_flags);
  for (auto &p : m.pixels_) p = p ? 1 : 0;
  m.derive();
  return m;
}

Mask Mask::from_blocks(int width, int height, const BlockGrid &grid,
                       std::span<const std::uint8_t> block_flags) {
  if (block_flags.size() != static_cast<std::size_t>(grid.count())) {
    throw Error(ErrorCode::InvalidArgument, "block flag count mismatch");
  }
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height, 0);
  for (int i = 0; i < grid.count(); ++i) {
    if (!block_flags[i]) continue;
    const Block b = grid.block(i);
    for (int y = b.y0; y < b.y0 + b.size; ++y) {
      std::fill_n(pixels.begin() + static_cast<std::ptrdiff_t>(y) * width + b.x0,
                  b.size, std::uint8_t{1});
    }
  }
  return from_pixels(width, height, std::move(pixels), grid);
}

Mask Mask::full(const GrayImage &image, const BlockGrid &grid) {
  std::vector<std::uint8_t> flags(grid.count(), 1);
  return from_blocks(image.width(), image.height(), grid, flags);
}

void Mask::derive() {
  blocks_.assign(grid_.count(), 0);
  fg_blocks_ = 0;
  const long area = static_cast<long>(grid_.block_size) * grid_.block_size;
  for (int i = 0; i < grid_.count(); ++i) {
    const Block b = grid_.block(i);
    long n = 0;
    for (int y = b.y0; y < b.y0 + b.size; ++y) {
      const auto *rowp = pixels_.data() + static_cast<std::size_t>(y) * width_;
      for (int x = b.x0; x < b.x0 + b.size; ++x) n += rowp[x];
    }
    if (2 * n >= area) {
      blocks_[i] = 1;
      ++fg_blocks_;
    }
  }

  fg_pixels_ = 0;
  double sx = 0.0;
  double sy = 0.0;
  bbox_ = {width_, height_, 0, 0};
  for (int y = 0; y < height_; ++y) {
    const auto *rowp = pixels_.data() + static_cast<std::size_t>(y) * width_;
    for (int x = 0; x < width_; ++x) {
      if (!rowp[x]) continue;
      ++fg_pixels_;
      sx += x;
      sy += y;
      bbox_.x0 = std::min(bbox_.x0, x);
      bbox_.y0 = std::min(bbox_.y0, y);
      bbox_.x1 = std::max(bbox_.x1, x + 1);
      bbox_.y1 = std::max(bbox_.y1, y + 1);
    }
  }
  if (fg_pixels_ > 0) {
    const double n = static_cast<double>(fg_pixels_);
    centroid_ = Point{sx / n, sy / n};
  } else {
    centroid_.reset();
    bbox_ = {};
  }
}

// --- PGM ---------------------------------------------------------------------

namespace {

constexpr std::array<unsigned char, 8> kPngSignature = {0x89, 'P', 'N', 'G',
                                                        '\r', '\n', 0x1a, '\n'};

std::vector<unsigned char> read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  return bytes;
}

class PgmHeaderReader {
public:
  PgmHeaderReader(const std::vector<unsigned char> &bytes, std::string name)
      : bytes_(bytes), name_(std::move(name)) {}

  // Skips whitespace and comments; a comment of the form "# dpi <value>" or
  // "# dpi=<value>" sets the resolution.
  void skip_space() {
    while (pos_ < bytes_.size()) {
      const unsigned char c = bytes_[pos_];
      if (c == '#') {
        std::string comment;
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n')
          comment.push_back(static_cast<char>(bytes_[pos_++]));
        parse_comment(comment);
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long read_int() {
    skip_space();
    long value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_++] - '0');
      if (value > 1'000'000) fail("header value out of range");
      ++digits;
    }
    if (digits == 0) fail("malformed header");
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void skip_single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
      fail("malformed header");
    ++pos_;
  }

  std::size_t pos() const noexcept { return pos_; }
  void advance(std::size_t n) { pos_ += n; }
  std::optional<double> dpi() const noexcept { return dpi_; }

  [[noreturn]] void fail(const std::string &what) const {
    throw Error(ErrorCode::UnsupportedFormat, name_ + ": " + what);
  }

private:
  void parse_comment(const std::string &comment) {
    std::string body = comment.substr(1);
    std::replace(body.begin(), body.end(), '=', ' ');
    std::istringstream is(body);
    std::string key;
    double value = 0.0;
    if (is >> key >> value && key == "dpi" && value > 0.0) dpi_ = value;
  }

  const std::vector<unsigned char> &bytes_;
  std::string name_;
  std::size_t pos_ = 0;
  std::optional<double> dpi_;
};

GrayImage decode_pgm(const std::vector<unsigned char> &bytes,
                     const std::string &name) {
  PgmHeaderReader reader(bytes, name);
  if (bytes.size() < 2 || bytes[0] != 'P') reader.fail("not a PGM file");
  if (bytes[1] != '5') reader.fail("only binary P5 PGM is supported");
  reader.advance(2);
  const long width = reader.read_int();
  const long height = reader.read_int();
  const long maxval = reader.read_int();
  if (maxval != 255) reader.fail("only 8-bit PGM (maxval 255) is supported");
  reader.skip_single_space();
  check_dimensions(static_cast<int>(width), static_cast<int>(height));
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (bytes.size() - reader.pos() < n) reader.fail("truncated raster");
  std::vector<std::uint8_t> pixels(bytes.begin() + reader.pos(),
                                   bytes.begin() + reader.pos() + n);
  return GrayImage(static_cast<int>(width), static_cast<int>(height),
                   std::move(pixels), reader.dpi().value_or(GrayImage::kDefaultDpi));
}

void write_pgm(const std::filesystem::path &path, int width, int height,
               double dpi, std::span<const std::uint8_t> pixels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  char dpi_text[64];
  std::snprintf(dpi_text, sizeof dpi_text, "%.17g", dpi);
  out << "P5\n# dpi " << dpi_text << "\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char *>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

// --- PNG ---------------------------------------------------------------------

struct PngMemoryReader {
  const std::vector<unsigned char> *bytes;
  std::size_t pos;
};

void png_read_callback(png_structp png, png_bytep out, png_size_t length) {
  auto *src = static_cast<PngMemoryReader *>(png_get_io_ptr(png));
  if (src->pos + length > src->bytes->size()) {
    png_error(png, "truncated PNG");
  }
  std::copy_n(src->bytes->data() + src->pos, length, out);
  src->pos += length;
}

void png_error_callback(png_structp, png_const_charp message) {
  throw Error(ErrorCode::UnsupportedFormat, std::string("PNG: ") + message);
}

void png_warning_callback(png_structp, png_const_charp) {}

GrayImage decode_png(const std::vector<unsigned char> &bytes,
                     const std::string &name) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           png_error_callback,
                                           png_warning_callback);
  if (!png) throw Error(ErrorCode::IoError, "libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp *png;
    png_infop *info;
    ~Guard() { png_destroy_read_struct(png, info, nullptr); }
  } guard{&png, &info};
  if (!info) throw Error(ErrorCode::IoError, "libpng initialization failed");

  PngMemoryReader reader{&bytes, 0};
  png_set_read_fn(png, &reader, png_read_callback);
  png_read_info(png, info);

  const auto width = static_cast<int>(png_get_image_width(png, info));
  const auto height = static_cast<int>(png_get_image_height(png, info));
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (color != PNG_COLOR_TYPE_GRAY) {
    throw Error(ErrorCode::UnsupportedFormat,
                name + ": PNG must be single-channel grayscale");
  }
  if (depth != 8) {
    throw Error(ErrorCode::UnsupportedFormat,
                name + ": PNG bit depth " + std::to_string(depth) +
                    " unsupported, expected 8");
  }
  check_dimensions(width, height);

  double dpi = GrayImage::kDefaultDpi;
  png_uint_32 res_x = 0, res_y = 0;
  int unit = 0;
  if (png_get_pHYs(png, info, &res_x, &res_y, &unit) &&
      unit == PNG_RESOLUTION_METER && res_x > 0) {
    dpi = std::round(res_x * 0.0254 * 100.0) / 100.0;
  }

  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y)
    rows[y] = pixels.data() + static_cast<std::size_t>(y) * width;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  return GrayImage(width, height, std::move(pixels), dpi);
}

void png_write_callback(png_structp png, png_bytep data, png_size_t length) {
  auto *out = static_cast<std::ofstream *>(png_get_io_ptr(png));
  out->write(reinterpret_cast<const char *>(data),
             static_cast<std::streamsize>(length));
}

void png_flush_callback(png_structp png) {
  static_cast<std::ofstream *>(png_get_io_ptr(png))->flush();
}

void write_png(const std::filesystem::path &path, int width, int height,
               double dpi, std::span<const std::uint8_t> pixels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            png_error_callback,
                                            png_warning_callback);
  if (!png) throw Error(ErrorCode::IoError, "libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp *png;
    png_infop *info;
    ~Guard() { png_destroy_write_struct(png, info); }
  } guard{&png, &info};
  if (!info) throw Error(ErrorCode::IoError, "libpng initialization failed");

  png_set_write_fn(png, &out, png_write_callback, png_flush_callback);
  png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  const auto ppm = static_cast<png_uint_32>(std::lround(dpi / 0.0254));
  png_set_pHYs(png, info, ppm, ppm, PNG_RESOLUTION_METER);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(pixels.data() +
                                             static_cast<std::size_t>(y) * width));
  }
  png_write_end(png, nullptr);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

bool wants_png(const std::filesystem::path &path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png";
}

} // namespace

GrayImage load_image(const std::filesystem::path &path) {
  const auto bytes = read_file(path);
  if (bytes.size() >= kPngSignature.size() &&
      std::equal(kPngSignature.begin(), kPngSignature.end(), bytes.begin())) {
    return decode_png(bytes, path.string());
  }
  return decode_pgm(bytes, path.string());
}

void save_image(const std::filesystem::path &path, const GrayImage &image) {
  if (wants_png(path)) {
    write_png(path, image.width(), image.height(), image.dpi(), image.pixels());
  } else {
    write_pgm(path, image.width(), image.height(), image.dpi(), image.pixels());
  }
}

void save_mask(const std::filesystem::path &path, const Mask &mask) {
  std::vector<std::uint8_t> pixels(mask.pixel_flags().begin(),
                                   mask.pixel_flags().end());
  for (auto &p : pixels) p = p ? 255 : 0;
  write_pgm(path, mask.width(), mask.height(), GrayImage::kDefaultDpi, pixels);
}

} // namespace livqual
