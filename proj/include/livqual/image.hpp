#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace livqual {

/// 8-bit grayscale raster, row-major, immutable after construction.
class GrayImage {
public:
  static constexpr int kMinSide = 32;
  static constexpr double kDefaultDpi = 500.0;

  GrayImage(int width, int height, std::vector<std::uint8_t> pixels,
            double dpi = kDefaultDpi);
  GrayImage(int width, int height, std::uint8_t fill,
            double dpi = kDefaultDpi);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double dpi() const noexcept { return dpi_; }

  std::uint8_t at(int x, int y) const noexcept {
    return pixels_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<const std::uint8_t> row(int y) const noexcept {
    return std::span(pixels_).subspan(static_cast<std::size_t>(y) * width_,
                                      width_);
  }

  friend bool operator==(const GrayImage &, const GrayImage &) = default;

private:
  int width_;
  int height_;
  double dpi_;
  std::vector<std::uint8_t> pixels_;
};

/// Square, non-overlapping block, top-left corner in pixels.
struct Block {
  int x0 = 0;
  int y0 = 0;
  int size = 0;

  double center_x() const noexcept { return x0 + 0.5 * size - 0.5; }
  double center_y() const noexcept { return y0 + 0.5 * size - 0.5; }
};

/// Partition anchored at the top-left corner; partial edge blocks are
/// discarded.
struct BlockGrid {
  int block_size = 0;
  int cols = 0;
  int rows = 0;

  int count() const noexcept { return cols * rows; }
  int index(int col, int row) const noexcept { return row * cols + col; }
  Block block(int col, int row) const noexcept {
    return {col * block_size, row * block_size, block_size};
  }
  Block block(int index) const noexcept {
    return block(index % cols, index / cols);
  }
  int covered_width() const noexcept { return cols * block_size; }
  int covered_height() const noexcept { return rows * block_size; }

  friend bool operator==(const BlockGrid &, const BlockGrid &) = default;
};

BlockGrid block_partition(const GrayImage &image, int block_size);
BlockGrid block_partition(int width, int height, int block_size);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Inclusive-exclusive pixel rectangle.
struct Box {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const noexcept { return x1 - x0; }
  int height() const noexcept { return y1 - y0; }
  bool empty() const noexcept { return x1 <= x0 || y1 <= y0; }
};

/// Per-pixel foreground flags plus the block flags derived from them: a block
/// is foreground iff at least half of its pixels are.
class Mask {
public:
  static Mask from_pixels(int width, int height,
                          std::vector<std::uint8_t> pixel_flags,
                          const BlockGrid &grid);
  /// Pixels inside each flagged block become foreground; everything else,
  /// including the uncovered border strip, is background.
  static Mask from_blocks(int width, int height, const BlockGrid &grid,
                          std::span<const std::uint8_t> block_flags);
  static Mask full(const GrayImage &image, const BlockGrid &grid);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  const BlockGrid &grid() const noexcept { return grid_; }

  bool pixel(int x, int y) const noexcept {
    return pixels_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  bool block(int col, int row) const noexcept {
    return blocks_[grid_.index(col, row)] != 0;
  }
  bool block(int index) const noexcept { return blocks_[index] != 0; }
  std::span<const std::uint8_t> pixel_flags() const noexcept { return pixels_; }
  std::span<const std::uint8_t> block_flags() const noexcept { return blocks_; }

  std::size_t foreground_pixels() const noexcept { return fg_pixels_; }
  int foreground_blocks() const noexcept { return fg_blocks_; }
  bool empty() const noexcept { return fg_pixels_ == 0; }

  /// Mean position of foreground pixels; empty when there are none.
  std::optional<Point> centroid() const noexcept { return centroid_; }
  Box bounding_box() const noexcept { return bbox_; }

private:
  Mask() = default;
  void derive();

  int width_ = 0;
  int height_ = 0;
  BlockGrid grid_;
  std::vector<std::uint8_t> pixels_;
  std::vector<std::uint8_t> blocks_;
  std::size_t fg_pixels_ = 0;
  int fg_blocks_ = 0;
  std::optional<Point> centroid_;
  Box bbox_;
};

/// Reads binary PGM (P5, maxval 255) or 8-bit single-channel PNG, chosen by
/// file signature.
GrayImage load_image(const std::filesystem::path &path);

/// Writes PNG when the extension is `.png`, PGM otherwise.
void save_image(const std::filesystem::path &path, const GrayImage &image);

void save_mask(const std::filesystem::path &path, const Mask &mask);

} // namespace livqual
