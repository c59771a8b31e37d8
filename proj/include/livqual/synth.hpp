#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "livqual/evaluation.hpp"
#include "livqual/image.hpp"

namespace livqual {

/// SplitMix64: state advances by a fixed odd increment and each output is a
/// bijective mix of the state, so streams are reproducible on any platform.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller.
  double normal() noexcept;

private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

enum class FlowPattern {
  parallel,  // horizontal ridges
  rotated,   // straight ridges along `angle`
  smooth,    // low-order polynomial phase bent around `angle`
};

enum class ForegroundShape { full, rectangle, ellipse };

struct Degradation {
  enum class Kind { gaussian_blur, additive_noise, contrast_scale, block_flatten };
  Kind kind;
  double value;  // sigma, sigma, contrast factor, or block fraction

  static Degradation blur(double sigma) { return {Kind::gaussian_blur, sigma}; }
  static Degradation noise(double sigma) { return {Kind::additive_noise, sigma}; }
  static Degradation contrast(double factor) { return {Kind::contrast_scale, factor}; }
  static Degradation flatten(double fraction) { return {Kind::block_flatten, fraction}; }
};

struct SynthSpec {
  std::uint64_t seed = 0;
  int width = 256;
  int height = 256;
  double frequency = 0.1;  // cycles/pixel
  FlowPattern flow = FlowPattern::parallel;
  double angle = 0.0;      // ridge direction, radians
  double bend = 0.0;       // smooth flow: quadratic bend along the ridges
  double shear = 0.0;      // smooth flow: cross term
  double phase = 0.0;      // cycles
  double amplitude = 40.0;
  double background = 200.0;
  ForegroundShape shape = ForegroundShape::full;
  double extent = 1.0;     // rectangle/ellipse size as a fraction of the image
  int block_size = 32;     // grid used for ground truth and block_flatten
  std::vector<Degradation> degradations;

  void validate() const;
};

struct GroundTruth {
  BlockGrid grid;
  std::vector<double> block_theta;        // ridge direction at block centers
  std::vector<std::uint8_t> block_inside; // block entirely inside the foreground
  std::vector<std::uint8_t> block_outside;// block entirely outside
  std::vector<std::uint8_t> flattened;
  std::vector<std::uint8_t> pixel_foreground;
  std::size_t clamped_pixels = 0;

  int inside_count() const noexcept;
  int flattened_count() const noexcept;
};

struct SynthImage {
  GrayImage image;
  GroundTruth truth;
};

SynthImage generate(const SynthSpec &spec);

void save_ground_truth(const std::filesystem::path &path, const SynthSpec &spec,
                       const GroundTruth &truth);

/// Real/fake pairs: each fake is the real spec with blur, noise and contrast
/// loss applied. The first half of the pairs goes to dev, the rest to test.
struct CorpusOptions {
  int n_per_class = 100;
  std::uint64_t seed = 1;
  int size = 256;
  std::string sensor = "synthetic";
};

/// Spec of the i-th real sample of a corpus.
SynthSpec corpus_real_spec(const CorpusOptions &options, int index);
SynthSpec corpus_fake_spec(const CorpusOptions &options, int index);

/// Writes images, ground-truth sidecars and manifest.csv into `out_dir`; the
/// manifest paths are relative to it.
DatasetManifest make_liveness_corpus(const CorpusOptions &options,
                                     const std::filesystem::path &out_dir);

} // namespace livqual
