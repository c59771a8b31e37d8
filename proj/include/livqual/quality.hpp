#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "livqual/config.hpp"
#include "livqual/image.hpp"
#include "livqual/preprocessing.hpp"

namespace livqual {

/// Feature order of the quality parameterization; the index is part of every
/// file format (feature CSV columns, model and subset bit strings).
enum class Feature : int {
  ocl = 0,
  energy = 1,
  loq = 2,
  cof = 3,
  mean = 4,
  std_dev = 5,
  lcs1 = 6,
  lcs2 = 7,
  amplitude = 8,
  variance = 9,
};

inline constexpr int kFeatureCount = 10;
inline constexpr int kFeatureOrderVersion = 1;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "q_ocl", "q_e", "q_loq", "q_cof", "q_mean",
    "q_std", "q_lcs1", "q_lcs2", "q_a", "q_var"};

struct QualityVector {
  std::array<double, kFeatureCount> values{};

  double &operator[](Feature f) noexcept { return values[static_cast<int>(f)]; }
  double operator[](Feature f) const noexcept { return values[static_cast<int>(f)]; }
  double &operator[](int i) noexcept { return values[i]; }
  double operator[](int i) const noexcept { return values[i]; }

  friend bool operator==(const QualityVector &, const QualityVector &) = default;
};

/// Names of the features whose value falls outside its documented range.
std::vector<std::string> range_violations(const QualityVector &q);

/// Eigenvalues of the symmetric 2x2 matrix [[a, b], [b, c]], larger first.
struct Eigenvalues2 {
  double max = 0.0;
  double min = 0.0;
};
Eigenvalues2 symmetric_eigenvalues(double a, double b, double c) noexcept;

// --- ridge strength ------------------------------------------------------------

/// Per-block orientation certainty, 1 - lambda_min / lambda_max; 0 on
/// background blocks and blocks with no gradient.
std::vector<double> ocl_block_scores(const GrayImage &image, const BlockGrid &grid,
                                     const Mask &mask);

/// Centroid-weighted mean of the block certainty scores.
double compute_ocl(const GrayImage &image, const BlockGrid &grid, const Mask &mask);

/// Power of the windowed foreground crop accumulated into equal-width radial
/// bands.
std::vector<double> ring_band_energies(const GrayImage &image, const Mask &mask,
                                       const SpectrumParams &params);

/// 1 - H / ln(R) for the band-energy distribution; 1 when the energy sits in a
/// single band, 0 when it is spread evenly.
double band_concentration(std::span<const double> energies);

double compute_energy_concentration(const GrayImage &image, const Mask &mask,
                                    const SpectrumParams &params);

// --- ridge continuity ----------------------------------------------------------

/// Undirected angular difference, in [0, pi/2].
double orientation_difference(double a, double b) noexcept;

double compute_loq(const OrientationField &field);
double compute_cof(const OrientationField &field, double abrupt_change);

// --- ridge clarity -------------------------------------------------------------

struct GrayStats {
  double mean = 0.0;
  double std_dev = 0.0;
};

GrayStats compute_gray_stats(const GrayImage &image, const Mask &mask);

/// Gray profile of one block projected across the ridges, plus the sinusoid
/// parameters read off it.
struct RidgeSignature {
  double theta = 0.0;
  Point center;
  int first_bin = 0;            // bin index of profile[0]
  std::vector<double> profile;  // mean gray per bin along the ridge normal
  double profile_mean = 0.0;
  double amplitude = 0.0;
  double variance = 0.0;
  double frequency = 0.0;
  bool reliable = false;

  /// Profile bin of pixel (x, y); may fall outside the profile.
  int bin_of(int x, int y) const noexcept;
};

RidgeSignature extract_signature(const GrayImage &image, const Block &block,
                                 double theta, const RidgeParams &params);

/// Ridge/valley overlap of one block. Ridges are pixels whose profile bin is
/// darker than the profile mean.
struct ClarityCounts {
  std::size_t ridge_pixels = 0;
  std::size_t valley_pixels = 0;
  std::size_t ridge_above = 0;   // ridge pixels brighter than the threshold
  std::size_t valley_below = 0;  // valley pixels darker than the threshold
  double threshold = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double overlap = 0.0;
};

/// Empty when either class has no pixels.
std::optional<ClarityCounts> block_clarity(const GrayImage &image, const Block &block,
                                           const RidgeSignature &signature);

struct ClarityScores {
  double lcs1 = 0.0;
  double lcs2 = 0.0;
  int reliable_blocks = 0;
  int foreground_blocks = 0;
  bool lcs1_fallback = false;  // no reliable block; lcs1 holds the fallback
};

ClarityScores compute_lcs(const GrayImage &image, const BlockGrid &grid,
                          const Mask &mask, const OrientationField &field,
                          const RidgeParams &params);

struct SinusoidGoodness {
  double amplitude = 0.0;  // q_a
  double variance = 0.0;   // q_var
};

SinusoidGoodness compute_sinusoid_goodness(const GrayImage &image,
                                           const BlockGrid &grid, const Mask &mask,
                                           const OrientationField &field,
                                           const RidgeParams &params);

// --- full extraction -----------------------------------------------------------

struct QualityExtraction {
  QualityVector vector;
  Mask mask;
  OrientationField field;
  bool lcs1_fallback = false;
};

QualityExtraction extract_quality_details(const GrayImage &image,
                                          const Config &config);

QualityVector extract_quality_vector(const GrayImage &image, const Config &config);

} // namespace livqual
