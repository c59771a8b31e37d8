#include "livqual/preprocessing.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <queue>

#include "livqual/error.hpp"

namespace livqual {

namespace {

constexpr double kPi = std::numbers::pi;

inline int clamp_index(int i, int n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

} // namespace

GradientImage sobel_gradients(const GrayImage &image) {
  const int w = image.width();
  const int h = image.height();
  GradientImage g{w, h, std::vector<double>(static_cast<std::size_t>(w) * h),
                  std::vector<double>(static_cast<std::size_t>(w) * h)};
  for (int y = 0; y < h; ++y) {
    const int ym = clamp_index(y - 1, h);
    const int yp = clamp_index(y + 1, h);
    for (int x = 0; x < w; ++x) {
      const int xm = clamp_index(x - 1, w);
      const int xp = clamp_index(x + 1, w);
      const double a = image.at(xm, ym), b = image.at(x, ym), c = image.at(xp, ym);
      const double d = image.at(xm, y), f = image.at(xp, y);
      const double p = image.at(xm, yp), q = image.at(x, yp), r = image.at(xp, yp);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      g.gx[i] = (c + 2.0 * f + r) - (a + 2.0 * d + p);
      g.gy[i] = (p + 2.0 * q + r) - (a + 2.0 * b + c);
    }
  }
  return g;
}

GradientMoments block_moments(const GradientImage &g, const Block &block) {
  GradientMoments m;
  for (int y = block.y0; y < block.y0 + block.size; ++y) {
    const std::size_t base = static_cast<std::size_t>(y) * g.width;
    for (int x = block.x0; x < block.x0 + block.size; ++x) {
      const double gx = g.gx[base + x];
      const double gy = g.gy[base + x];
      m.sxx += gx * gx;
      m.syy += gy * gy;
      m.sxy += gx * gy;
    }
  }
  return m;
}

OrientationField::OrientationField(BlockGrid grid,
                                   std::vector<OrientationSample> samples)
    : grid_(grid), samples_(std::move(samples)) {
  if (samples_.size() != static_cast<std::size_t>(grid_.count())) {
    throw Error(ErrorCode::InvalidArgument, "orientation sample count mismatch");
  }
  for (auto &s : samples_) {
    if (!s.valid) s.coherence = 0.0;
  }
}

int OrientationField::valid_count() const noexcept {
  return static_cast<int>(std::count_if(samples_.begin(), samples_.end(),
                                        [](const auto &s) { return s.valid; }));
}

// --- Gabor bank ----------------------------------------------------------------

std::vector<double> gabor_block_spread(const GrayImage &image,
                                       const BlockGrid &grid,
                                       const GaborBankParams &params) {
  params.validate();
  using cd = std::complex<double>;
  const int w = image.width();
  const int h = image.height();
  const int radius = static_cast<int>(std::ceil(3.0 * params.sigma));
  const int taps = 2 * radius + 1;

  std::vector<double> gauss(taps);
  double gsum = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    gauss[t + radius] = std::exp(-(t * t) / (2.0 * params.sigma * params.sigma));
    gsum += gauss[t + radius];
  }
  for (auto &v : gauss) v /= gsum;

  std::vector<double> src(image.pixels().begin(), image.pixels().end());

  // Separable Gaussian blur, used to remove the DC response of each complex
  // kernel so the bank ignores constant offsets.
  std::vector<double> tmp(src.size()), blurred(src.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t)
        acc += gauss[t + radius] * src[static_cast<std::size_t>(y) * w + clamp_index(x + t, w)];
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t)
        acc += gauss[t + radius] * tmp[static_cast<std::size_t>(clamp_index(y + t, h)) * w + x];
      blurred[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }

  const int nb = grid.count();
  const double block_area = static_cast<double>(grid.block_size) * grid.block_size;
  // block_means[k * nb + b]: mean response magnitude of orientation k on block b.
  std::vector<double> block_means(static_cast<std::size_t>(params.n_orientations) * nb, 0.0);
  std::vector<cd> row_pass(src.size());
  std::vector<cd> hx(taps), hy(taps);

  for (int k = 0; k < params.n_orientations; ++k) {
    const double angle = kPi * k / params.n_orientations;
    const double wx = 2.0 * kPi * params.frequency * std::cos(angle);
    const double wy = 2.0 * kPi * params.frequency * std::sin(angle);
    cd sx = 0.0, sy = 0.0;
    for (int t = -radius; t <= radius; ++t) {
      hx[t + radius] = gauss[t + radius] * std::polar(1.0, wx * t);
      hy[t + radius] = gauss[t + radius] * std::polar(1.0, wy * t);
      sx += hx[t + radius];
      sy += hy[t + radius];
    }
    const cd dc = sx * sy;

    for (int y = 0; y < h; ++y) {
      const std::size_t base = static_cast<std::size_t>(y) * w;
      for (int x = 0; x < w; ++x) {
        cd acc = 0.0;
        for (int t = -radius; t <= radius; ++t)
          acc += hx[t + radius] * src[base + clamp_index(x + t, w)];
        row_pass[base + x] = acc;
      }
    }
    for (int b = 0; b < nb; ++b) {
      const Block blk = grid.block(b);
      double sum = 0.0;
      for (int y = blk.y0; y < blk.y0 + blk.size; ++y) {
        for (int x = blk.x0; x < blk.x0 + blk.size; ++x) {
          cd acc = 0.0;
          for (int t = -radius; t <= radius; ++t)
            acc += hy[t + radius] *
                   row_pass[static_cast<std::size_t>(clamp_index(y + t, h)) * w + x];
          acc -= dc * blurred[static_cast<std::size_t>(y) * w + x];
          sum += std::abs(acc);
        }
      }
      block_means[static_cast<std::size_t>(k) * nb + b] = sum / block_area;
    }
  }

  std::vector<double> spread(nb, 0.0);
  for (int b = 0; b < nb; ++b) {
    double mean = 0.0;
    for (int k = 0; k < params.n_orientations; ++k)
      mean += block_means[static_cast<std::size_t>(k) * nb + b];
    mean /= params.n_orientations;
    double var = 0.0;
    for (int k = 0; k < params.n_orientations; ++k) {
      const double d = block_means[static_cast<std::size_t>(k) * nb + b] - mean;
      var += d * d;
    }
    spread[b] = std::sqrt(var / params.n_orientations);
  }
  return spread;
}

namespace {

// Labels 4-connected components of `flags == value`; returns the label map
// (-1 where flags != value) and per-label sizes, labels in raster order.
std::vector<int> label_components(const BlockGrid &grid,
                                  const std::vector<std::uint8_t> &flags,
                                  std::uint8_t value, std::vector<int> &sizes) {
  std::vector<int> label(flags.size(), -1);
  sizes.clear();
  std::queue<int> frontier;
  for (int start = 0; start < grid.count(); ++start) {
    if (flags[start] != value || label[start] >= 0) continue;
    const int id = static_cast<int>(sizes.size());
    sizes.push_back(0);
    label[start] = id;
    frontier.push(start);
    while (!frontier.empty()) {
      const int cur = frontier.front();
      frontier.pop();
      ++sizes[id];
      const int col = cur % grid.cols;
      const int row = cur / grid.cols;
      const int nbrs[4][2] = {{col - 1, row}, {col + 1, row}, {col, row - 1}, {col, row + 1}};
      for (const auto &n : nbrs) {
        if (n[0] < 0 || n[0] >= grid.cols || n[1] < 0 || n[1] >= grid.rows) continue;
        const int ni = grid.index(n[0], n[1]);
        if (flags[ni] != value || label[ni] >= 0) continue;
        label[ni] = id;
        frontier.push(ni);
      }
    }
  }
  return label;
}

} // namespace

Mask segment_foreground(const GrayImage &image, const BlockGrid &grid,
                        const GaborBankParams &params) {
  const std::vector<double> spread = gabor_block_spread(image, grid, params);
  std::vector<std::uint8_t> flags(grid.count(), 0);
  for (int b = 0; b < grid.count(); ++b)
    flags[b] = spread[b] > params.segmentation_threshold ? 1 : 0;

  std::vector<int> sizes;
  const std::vector<int> fg_label = label_components(grid, flags, 1, sizes);
  if (!sizes.empty()) {
    const int keep = static_cast<int>(
        std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    for (int b = 0; b < grid.count(); ++b) flags[b] = fg_label[b] == keep ? 1 : 0;

    const std::vector<int> bg_label = label_components(grid, flags, 0, sizes);
    std::vector<std::uint8_t> touches_border(sizes.size(), 0);
    for (int b = 0; b < grid.count(); ++b) {
      if (bg_label[b] < 0) continue;
      const int col = b % grid.cols;
      const int row = b / grid.cols;
      if (col == 0 || row == 0 || col == grid.cols - 1 || row == grid.rows - 1)
        touches_border[bg_label[b]] = 1;
    }
    for (int b = 0; b < grid.count(); ++b) {
      if (bg_label[b] >= 0 && !touches_border[bg_label[b]]) flags[b] = 1;
    }
  }
  return Mask::from_blocks(image.width(), image.height(), grid, flags);
}

// --- Orientation ------------------------------------------------------------

OrientationField estimate_orientation(const GrayImage &image,
                                      const BlockGrid &grid, const Mask &mask,
                                      double energy_min) {
  if (!(mask.grid() == grid)) {
    throw Error(ErrorCode::InvalidArgument, "mask was built on a different grid");
  }
  const GradientImage g = sobel_gradients(image);
  std::vector<OrientationSample> samples(grid.count());
  for (int b = 0; b < grid.count(); ++b) {
    if (!mask.block(b)) continue;
    const GradientMoments m = block_moments(g, grid.block(b));
    const double energy = m.sxx + m.syy;
    if (!(energy >= energy_min) || energy <= 0.0) continue;
    const double dxx = m.sxx - m.syy;
    const double dxy = 2.0 * m.sxy;
    // Gradient direction in (-pi/2, pi/2]; ridges run perpendicular to it.
    double theta = 0.5 * std::atan2(dxy, dxx) + kPi / 2.0;
    if (theta >= kPi) theta -= kPi;
    if (theta < 0.0) theta += kPi;
    const double coherence = std::hypot(dxx, dxy) / energy;
    samples[b] = {theta, std::clamp(coherence, 0.0, 1.0), true};
  }
  return OrientationField(grid, std::move(samples));
}

void save_orientation_csv(const std::filesystem::path &path,
                          const OrientationField &field) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "block_row,block_col,theta,coherence,valid\n";
  char line[128];
  const BlockGrid &grid = field.grid();
  for (int row = 0; row < grid.rows; ++row) {
    for (int col = 0; col < grid.cols; ++col) {
      const auto &s = field.at(col, row);
      std::snprintf(line, sizeof line, "%d,%d,%.9g,%.9g,%d\n", row, col, s.theta,
                    s.coherence, s.valid ? 1 : 0);
      out << line;
    }
  }
}

} // namespace livqual
