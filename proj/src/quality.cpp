#include "livqual/quality.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>

#include "livqual/error.hpp"

namespace livqual {

namespace {

constexpr double kPi = std::numbers::pi;

// Profile bin of a signed offset along the ridge normal. For axis-aligned
// ridges the offsets are exact half-integers and sin/cos leave ~1e-16 noise,
// so the nudge keeps every pixel of a column in the same bin.
inline int profile_bin(double u) { return static_cast<int>(std::floor(u + 0.5 + 1e-7)); }

void require_foreground(const Mask &mask) {
  if (mask.empty() || mask.foreground_blocks() == 0) {
    throw Error(ErrorCode::EmptyForeground, "mask has no foreground block");
  }
}

} // namespace

std::vector<std::string> range_violations(const QualityVector &q) {
  std::vector<std::string> bad;
  for (int i = 0; i < kFeatureCount; ++i) {
    double hi = 1.0;
    if (i == static_cast<int>(Feature::mean)) hi = 255.0;
    if (i == static_cast<int>(Feature::std_dev)) hi = 127.5;
    const double v = q[i];
    if (!(v >= 0.0 && v <= hi)) bad.emplace_back(kFeatureNames[i]);
  }
  return bad;
}

Eigenvalues2 symmetric_eigenvalues(double a, double b, double c) noexcept {
  const double half_trace = 0.5 * (a + c);
  const double radius = std::hypot(0.5 * (a - c), b);
  return {half_trace + radius, half_trace - radius};
}

// --- OCL ---------------------------------------------------------------------

std::vector<double> ocl_block_scores(const GrayImage &image, const BlockGrid &grid,
                                     const Mask &mask) {
  const GradientImage g = sobel_gradients(image);
  std::vector<double> scores(grid.count(), 0.0);
  for (int b = 0; b < grid.count(); ++b) {
    if (!mask.block(b)) continue;
    const GradientMoments m = block_moments(g, grid.block(b));
    const Eigenvalues2 ev = symmetric_eigenvalues(m.sxx, m.sxy, m.syy);
    if (ev.max < 1e-9) continue;
    scores[b] = std::clamp(1.0 - std::max(ev.min, 0.0) / ev.max, 0.0, 1.0);
  }
  return scores;
}

double compute_ocl(const GrayImage &image, const BlockGrid &grid, const Mask &mask) {
  require_foreground(mask);
  const std::vector<double> scores = ocl_block_scores(image, grid, mask);
  const Point c = *mask.centroid();
  const Box box = mask.bounding_box();
  const double r = 0.5 * std::hypot(box.width(), box.height());
  double num = 0.0;
  double den = 0.0;
  for (int b = 0; b < grid.count(); ++b) {
    if (!mask.block(b)) continue;
    const Block blk = grid.block(b);
    const double dx = blk.center_x() - c.x;
    const double dy = blk.center_y() - c.y;
    const double w = r > 0.0 ? std::exp(-(dx * dx + dy * dy) / (2.0 * r * r)) : 1.0;
    num += w * scores[b];
    den += w;
  }
  return den > 0.0 ? std::clamp(num / den, 0.0, 1.0) : 0.0;
}

// --- power spectrum ----------------------------------------------------------

namespace {

// FFTW's planner is not reentrant; execution of a finished plan is.
std::mutex &fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : data(static_cast<fftw_complex *>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (!data) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer &) = delete;
  FftwBuffer &operator=(const FftwBuffer &) = delete;
  fftw_complex *data;
};

} // namespace

std::vector<double> ring_band_energies(const GrayImage &image, const Mask &mask,
                                       const SpectrumParams &params) {
  params.validate();
  require_foreground(mask);
  const Box box = mask.bounding_box();
  if (box.width() < params.min_extent || box.height() < params.min_extent) {
    throw Error(ErrorCode::ForegroundTooSmall,
                "foreground box " + std::to_string(box.width()) + "x" +
                    std::to_string(box.height()) + " below " +
                    std::to_string(params.min_extent) + "x" +
                    std::to_string(params.min_extent));
  }
  const int w = box.width();
  const int h = box.height();

  // Background inside the crop is set to the foreground mean so that only
  // ridge texture contributes power.
  double fg_sum = 0.0;
  std::size_t fg_n = 0;
  for (int y = box.y0; y < box.y1; ++y)
    for (int x = box.x0; x < box.x1; ++x)
      if (mask.pixel(x, y)) {
        fg_sum += image.at(x, y);
        ++fg_n;
      }
  const double fg_mean = fg_sum / static_cast<double>(fg_n);

  std::vector<double> wx(w), wy(h);
  for (int i = 0; i < w; ++i) wx[i] = std::pow(std::sin(kPi * (i + 0.5) / w), 2);
  for (int i = 0; i < h; ++i) wy[i] = std::pow(std::sin(kPi * (i + 0.5) / h), 2);

  const std::size_t n = static_cast<std::size_t>(w) * h;
  FftwBuffer in(n), out(n);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const int px = box.x0 + x;
      const int py = box.y0 + y;
      const double v = mask.pixel(px, py) ? image.at(px, py) - fg_mean : 0.0;
      in.data[i][0] = v * wx[x] * wy[y];
      in.data[i][1] = 0.0;
    }
  }

  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_2d(h, w, in.data, out.data, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }

  std::vector<double> energies(params.n_bands, 0.0);
  const double span = params.f_max - params.f_min;
  for (int ky = 0; ky < h; ++ky) {
    const double fy = static_cast<double>(ky <= h / 2 ? ky : ky - h) / h;
    for (int kx = 0; kx < w; ++kx) {
      const double fx = static_cast<double>(kx <= w / 2 ? kx : kx - w) / w;
      const double r = std::hypot(fx, fy);
      if (r < params.f_min || r >= params.f_max) continue;
      const int band = std::min(
          static_cast<int>((r - params.f_min) / span * params.n_bands),
          params.n_bands - 1);
      const std::size_t i = static_cast<std::size_t>(ky) * w + kx;
      energies[band] += out.data[i][0] * out.data[i][0] + out.data[i][1] * out.data[i][1];
    }
  }
  return energies;
}

double band_concentration(std::span<const double> energies) {
  if (energies.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "need at least two bands");
  }
  double total = 0.0;
  std::size_t nonzero = 0;
  for (double e : energies) {
    if (e < 0.0 || !std::isfinite(e)) {
      throw Error(ErrorCode::InvalidArgument, "band energy must be finite and >= 0");
    }
    total += e;
    if (e > 0.0) ++nonzero;
  }
  // No ridge power at all: nothing is concentrated.
  if (total <= 0.0) return 0.0;
  if (nonzero < 2) return 1.0;
  // H = ln S - (sum E ln E) / S, with p = E / S.
  double weighted = 0.0;
  for (double e : energies)
    if (e > 0.0) weighted += e * std::log(e);
  const double entropy = std::log(total) - weighted / total;
  return std::clamp(1.0 - entropy / std::log(static_cast<double>(energies.size())),
                    0.0, 1.0);
}

double compute_energy_concentration(const GrayImage &image, const Mask &mask,
                                    const SpectrumParams &params) {
  return band_concentration(ring_band_energies(image, mask, params));
}

// --- orientation continuity ----------------------------------------------------

double orientation_difference(double a, double b) noexcept {
  const double d = std::fabs(a - b);
  return std::min(d, kPi - d);
}

double compute_loq(const OrientationField &field) {
  const BlockGrid &grid = field.grid();
  double total = 0.0;
  int blocks = 0;
  for (int row = 0; row < grid.rows; ++row) {
    for (int col = 0; col < grid.cols; ++col) {
      const auto &s = field.at(col, row);
      if (!s.valid) continue;
      double diff = 0.0;
      int nbrs = 0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const int c = col + dc;
          const int r = row + dr;
          if (c < 0 || r < 0 || c >= grid.cols || r >= grid.rows) continue;
          const auto &n = field.at(c, r);
          if (!n.valid) continue;
          diff += orientation_difference(s.theta, n.theta);
          ++nbrs;
        }
      }
      if (nbrs == 0) continue;
      total += std::clamp(1.0 - (diff / nbrs) / (kPi / 2.0), 0.0, 1.0);
      ++blocks;
    }
  }
  if (blocks == 0) {
    throw Error(ErrorCode::NoComparableBlocks,
                "no valid block has a valid neighbour");
  }
  return total / blocks;
}

double compute_cof(const OrientationField &field, double abrupt_change) {
  const BlockGrid &grid = field.grid();
  long pairs = 0;
  long violations = 0;
  auto visit = [&](const OrientationSample &a, const OrientationSample &b) {
    if (!a.valid || !b.valid) return;
    ++pairs;
    if (orientation_difference(a.theta, b.theta) > abrupt_change) ++violations;
  };
  for (int row = 0; row < grid.rows; ++row)
    for (int col = 0; col + 1 < grid.cols; ++col)
      visit(field.at(col, row), field.at(col + 1, row));
  for (int col = 0; col < grid.cols; ++col)
    for (int row = 0; row + 1 < grid.rows; ++row)
      visit(field.at(col, row), field.at(col, row + 1));
  if (pairs == 0) {
    throw Error(ErrorCode::NoComparableBlocks, "no consecutive valid block pair");
  }
  return 1.0 - static_cast<double>(violations) / static_cast<double>(pairs);
}

// --- gray statistics -----------------------------------------------------------

GrayStats compute_gray_stats(const GrayImage &image, const Mask &mask) {
  if (mask.foreground_pixels() < 2) {
    throw Error(ErrorCode::EmptyForeground, "fewer than two foreground pixels");
  }
  // Integer moments are exact, so the variance numerator has no cancellation.
  __extension__ typedef unsigned __int128 u128;
  u128 sum = 0;
  u128 sum_sq = 0;
  u128 n = 0;
  for (int y = 0; y < image.height(); ++y) {
    const auto row = image.row(y);
    for (int x = 0; x < image.width(); ++x) {
      if (!mask.pixel(x, y)) continue;
      const unsigned v = row[x];
      sum += v;
      sum_sq += v * v;
      ++n;
    }
  }
  const u128 numerator = n * sum_sq - sum * sum;
  const double nd = static_cast<double>(n);
  return {static_cast<double>(sum) / nd,
          std::sqrt(static_cast<double>(numerator)) / nd};
}

// --- ridge / valley sinusoid ---------------------------------------------------

int RidgeSignature::bin_of(int x, int y) const noexcept {
  const double u = (x - center.x) * -std::sin(theta) + (y - center.y) * std::cos(theta);
  return profile_bin(u) - first_bin;
}

namespace {

struct Extremum {
  double position;
  double value;
};

// Parabolic refinement through three samples around index i.
Extremum refine(const std::vector<double> &p, std::size_t i) {
  const double l = p[i - 1], m = p[i], r = p[i + 1];
  const double denom = l - 2.0 * m + r;
  if (denom == 0.0) return {static_cast<double>(i), m};
  const double offset = std::clamp(0.5 * (l - r) / denom, -0.5, 0.5);
  return {i + offset, m - 0.25 * (l - r) * offset};
}

} // namespace

RidgeSignature extract_signature(const GrayImage &image, const Block &block,
                                 double theta, const RidgeParams &params) {
  RidgeSignature sig;
  sig.theta = theta;
  sig.center = {block.center_x(), block.center_y()};

  // Bin every block pixel by its rounded offset along the ridge normal.
  const double nx = -std::sin(theta);
  const double ny = std::cos(theta);
  const int reach = static_cast<int>(std::ceil(block.size * std::numbers::sqrt2 / 2.0)) + 1;
  const int nbins = 2 * reach + 1;
  std::vector<double> sums(nbins, 0.0);
  std::vector<int> counts(nbins, 0);
  for (int y = block.y0; y < block.y0 + block.size; ++y) {
    for (int x = block.x0; x < block.x0 + block.size; ++x) {
      const double u = (x - sig.center.x) * nx + (y - sig.center.y) * ny;
      const int bin = profile_bin(u) + reach;
      sums[bin] += image.at(x, y);
      ++counts[bin];
    }
  }

  // Bins crossing only a corner of the block average too few pixels.
  const int min_count = std::max(1, block.size / 4);
  int lo = 0;
  while (lo < nbins && counts[lo] < min_count) ++lo;
  int hi = nbins - 1;
  while (hi >= lo && counts[hi] < min_count) --hi;
  if (hi < lo) return sig;
  sig.first_bin = lo - reach;
  for (int b = lo; b <= hi; ++b) sig.profile.push_back(sums[b] / counts[b]);

  const auto &p = sig.profile;
  double mean = 0.0;
  for (double v : p) mean += v;
  mean /= static_cast<double>(p.size());
  double var = 0.0;
  for (double v : p) var += (v - mean) * (v - mean);
  sig.profile_mean = mean;
  sig.variance = var / static_cast<double>(p.size());

  std::vector<Extremum> maxima, minima;
  for (std::size_t i = 1; i + 1 < p.size(); ++i) {
    if (p[i] > p[i - 1] && p[i] >= p[i + 1]) maxima.push_back(refine(p, i));
    if (p[i] < p[i - 1] && p[i] <= p[i + 1]) minima.push_back(refine(p, i));
  }
  if (!maxima.empty() && !minima.empty()) {
    double max_mean = 0.0, min_mean = 0.0;
    for (const auto &e : maxima) max_mean += e.value;
    for (const auto &e : minima) min_mean += e.value;
    max_mean /= static_cast<double>(maxima.size());
    min_mean /= static_cast<double>(minima.size());
    sig.amplitude = std::max(0.0, 0.5 * (max_mean - min_mean));
  }
  double spacing = 0.0;
  int gaps = 0;
  for (const auto *list : {&maxima, &minima}) {
    for (std::size_t i = 1; i < list->size(); ++i) {
      spacing += (*list)[i].position - (*list)[i - 1].position;
      ++gaps;
    }
  }
  if (gaps > 0 && spacing > 0.0) sig.frequency = gaps / spacing;

  sig.reliable = sig.amplitude >= params.amplitude_min &&
                 sig.frequency >= params.frequency_min &&
                 sig.frequency <= params.frequency_max;
  return sig;
}

std::optional<ClarityCounts> block_clarity(const GrayImage &image, const Block &block,
                                           const RidgeSignature &signature) {
  const int nbins = static_cast<int>(signature.profile.size());
  double ridge_sum = 0.0, valley_sum = 0.0;
  ClarityCounts c;
  for (int y = block.y0; y < block.y0 + block.size; ++y) {
    for (int x = block.x0; x < block.x0 + block.size; ++x) {
      const int bin = signature.bin_of(x, y);
      if (bin < 0 || bin >= nbins) continue;
      if (signature.profile[bin] < signature.profile_mean) {
        ridge_sum += image.at(x, y);
        ++c.ridge_pixels;
      } else {
        valley_sum += image.at(x, y);
        ++c.valley_pixels;
      }
    }
  }
  if (c.ridge_pixels == 0 || c.valley_pixels == 0) return std::nullopt;
  c.threshold = 0.5 * (ridge_sum / static_cast<double>(c.ridge_pixels) +
                       valley_sum / static_cast<double>(c.valley_pixels));
  for (int y = block.y0; y < block.y0 + block.size; ++y) {
    for (int x = block.x0; x < block.x0 + block.size; ++x) {
      const int bin = signature.bin_of(x, y);
      if (bin < 0 || bin >= nbins) continue;
      const double v = image.at(x, y);
      if (signature.profile[bin] < signature.profile_mean) {
        if (v > c.threshold) ++c.ridge_above;
      } else if (v < c.threshold) {
        ++c.valley_below;
      }
    }
  }
  c.alpha = static_cast<double>(c.ridge_above) / static_cast<double>(c.ridge_pixels);
  c.beta = static_cast<double>(c.valley_below) / static_cast<double>(c.valley_pixels);
  c.overlap = 0.5 * (c.alpha + c.beta);
  return c;
}

namespace {

struct RidgeBlock {
  bool foreground = false;
  bool oriented = false;
  RidgeSignature signature;
  std::optional<ClarityCounts> clarity;
};

std::vector<RidgeBlock> analyze_ridges(const GrayImage &image, const BlockGrid &grid,
                                       const Mask &mask, const OrientationField &field,
                                       const RidgeParams &params) {
  params.validate();
  require_foreground(mask);
  if (!(field.grid() == grid)) {
    throw Error(ErrorCode::InvalidArgument, "orientation field grid mismatch");
  }
  std::vector<RidgeBlock> out(grid.count());
  for (int b = 0; b < grid.count(); ++b) {
    if (!mask.block(b)) continue;
    out[b].foreground = true;
    const auto &o = field.at(b);
    if (!o.valid) continue;
    out[b].oriented = true;
    out[b].signature = extract_signature(image, grid.block(b), o.theta, params);
    if (out[b].signature.reliable)
      out[b].clarity = block_clarity(image, grid.block(b), out[b].signature);
  }
  return out;
}

ClarityScores clarity_from(const std::vector<RidgeBlock> &blocks,
                           const RidgeParams &params) {
  ClarityScores s;
  double reliable_sum = 0.0;
  for (const auto &b : blocks) {
    if (!b.foreground) continue;
    ++s.foreground_blocks;
    if (b.clarity) {
      ++s.reliable_blocks;
      reliable_sum += b.clarity->overlap;
    }
  }
  const int unreliable = s.foreground_blocks - s.reliable_blocks;
  if (s.reliable_blocks > 0) {
    s.lcs1 = reliable_sum / s.reliable_blocks;
  } else {
    s.lcs1 = params.unreliable_overlap;
    s.lcs1_fallback = true;
  }
  s.lcs2 = (reliable_sum + params.unreliable_overlap * unreliable) / s.foreground_blocks;
  return s;
}

SinusoidGoodness goodness_from(const std::vector<RidgeBlock> &blocks,
                               const RidgeParams &params) {
  int fg = 0, amp_good = 0, var_good = 0;
  for (const auto &b : blocks) {
    if (!b.foreground) continue;
    ++fg;
    if (!b.oriented) continue;
    if (b.signature.amplitude >= params.amplitude_min) ++amp_good;
    if (b.signature.variance >= params.variance_min) ++var_good;
  }
  return {static_cast<double>(amp_good) / fg, static_cast<double>(var_good) / fg};
}

} // namespace

ClarityScores compute_lcs(const GrayImage &image, const BlockGrid &grid,
                          const Mask &mask, const OrientationField &field,
                          const RidgeParams &params) {
  return clarity_from(analyze_ridges(image, grid, mask, field, params), params);
}

SinusoidGoodness compute_sinusoid_goodness(const GrayImage &image,
                                           const BlockGrid &grid, const Mask &mask,
                                           const OrientationField &field,
                                           const RidgeParams &params) {
  return goodness_from(analyze_ridges(image, grid, mask, field, params), params);
}

// --- extraction ----------------------------------------------------------------

QualityExtraction extract_quality_details(const GrayImage &image,
                                          const Config &config) {
  config.validate();
  const BlockGrid grid = block_partition(image, config.block_size);
  Mask mask = segment_foreground(image, grid, config.gabor);
  require_foreground(mask);
  OrientationField field =
      estimate_orientation(image, grid, mask, config.orientation_energy_min);

  QualityVector q;
  q[Feature::ocl] = compute_ocl(image, grid, mask);
  q[Feature::energy] = compute_energy_concentration(image, mask, config.spectrum);
  q[Feature::loq] = compute_loq(field);
  q[Feature::cof] = compute_cof(field, config.abrupt_change);
  const GrayStats stats = compute_gray_stats(image, mask);
  q[Feature::mean] = stats.mean;
  q[Feature::std_dev] = stats.std_dev;

  const auto ridges = analyze_ridges(image, grid, mask, field, config.ridge);
  const ClarityScores clarity = clarity_from(ridges, config.ridge);
  q[Feature::lcs1] = clarity.lcs1;
  q[Feature::lcs2] = clarity.lcs2;
  const SinusoidGoodness good = goodness_from(ridges, config.ridge);
  q[Feature::amplitude] = good.amplitude;
  q[Feature::variance] = good.variance;

  return {q, std::move(mask), std::move(field), clarity.lcs1_fallback};
}

QualityVector extract_quality_vector(const GrayImage &image, const Config &config) {
  return extract_quality_details(image, config).vector;
}

} // namespace livqual
