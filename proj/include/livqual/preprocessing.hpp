#pragma once

#include <filesystem>
#include <vector>

#include "livqual/config.hpp"
#include "livqual/image.hpp"

namespace livqual {

/// Sobel derivatives of an image, replicated border, row-major.
struct GradientImage {
  int width = 0;
  int height = 0;
  std::vector<double> gx;
  std::vector<double> gy;
};

GradientImage sobel_gradients(const GrayImage &image);

/// Second-order gradient moments accumulated over one block.
struct GradientMoments {
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
};

GradientMoments block_moments(const GradientImage &gradients, const Block &block);

/// Per-block ridge direction. theta is the undirected ridge angle in [0, pi),
/// measured from the +x axis with y pointing down.
struct OrientationSample {
  double theta = 0.0;
  double coherence = 0.0;
  bool valid = false;

  friend bool operator==(const OrientationSample &, const OrientationSample &) = default;
};

class OrientationField {
public:
  OrientationField(BlockGrid grid, std::vector<OrientationSample> samples);

  const BlockGrid &grid() const noexcept { return grid_; }
  const OrientationSample &at(int col, int row) const noexcept {
    return samples_[grid_.index(col, row)];
  }
  const OrientationSample &at(int index) const noexcept { return samples_[index]; }
  std::span<const OrientationSample> samples() const noexcept { return samples_; }
  int valid_count() const noexcept;

  friend bool operator==(const OrientationField &, const OrientationField &) = default;

private:
  BlockGrid grid_;
  std::vector<OrientationSample> samples_;
};

/// Spread (population standard deviation) of the block-averaged Gabor
/// response magnitudes across the filter orientations, one value per block.
std::vector<double> gabor_block_spread(const GrayImage &image,
                                       const BlockGrid &grid,
                                       const GaborBankParams &params);

/// Gabor-bank foreground segmentation followed by block-level cleanup: the
/// largest 4-connected foreground component is kept and enclosed background
/// holes are filled.
Mask segment_foreground(const GrayImage &image, const BlockGrid &grid,
                        const GaborBankParams &params);

/// Averaged squared-gradient orientation on every foreground block; blocks
/// whose gradient energy is below `energy_min` are marked invalid.
OrientationField estimate_orientation(const GrayImage &image,
                                      const BlockGrid &grid, const Mask &mask,
                                      double energy_min = 1e-6);

/// CSV dump: block_row,block_col,theta,coherence,valid.
void save_orientation_csv(const std::filesystem::path &path,
                          const OrientationField &field);

} // namespace livqual
