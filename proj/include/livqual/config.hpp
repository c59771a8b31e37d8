#pragma once

#include <filesystem>
#include <numbers>
#include <string>
#include <string_view>

namespace livqual {

/// Gabor filter bank used for foreground segmentation.
struct GaborBankParams {
  int n_orientations = 8;
  double frequency = 0.1;  // cycles/pixel
  double sigma = 4.0;      // pixels
  /// A block is foreground when the spread (gray levels) of its
  /// per-orientation response magnitudes exceeds this value.
  double segmentation_threshold = 0.5;

  void validate() const;

  friend bool operator==(const GaborBankParams &, const GaborBankParams &) = default;
};

/// Radial band layout for the power-spectrum energy concentration.
struct SpectrumParams {
  int n_bands = 30;
  double f_min = 0.06;  // cycles/pixel
  double f_max = 0.46;  // cycles/pixel
  int min_extent = 64;  // pixels, per side of the foreground box

  void validate() const;

  friend bool operator==(const SpectrumParams &, const SpectrumParams &) = default;
};

/// Thresholds of the sinusoidal ridge/valley model.
struct RidgeParams {
  double amplitude_min = 8.0;    // gray levels
  double variance_min = 25.0;    // gray^2
  double frequency_min = 0.04;   // cycles/pixel
  double frequency_max = 0.25;   // cycles/pixel
  double unreliable_overlap = 0.5;

  void validate() const;

  friend bool operator==(const RidgeParams &, const RidgeParams &) = default;
};

/// Every tunable of the extraction and classification chain. Serialized into
/// model files so extraction can be replayed exactly.
struct Config {
  int block_size = 32;
  GaborBankParams gabor;
  double orientation_energy_min = 1e-6;
  SpectrumParams spectrum;
  double abrupt_change = std::numbers::pi / 8.0;  // radians
  RidgeParams ridge;
  double lda_epsilon_scale = 1e-6;

  void validate() const;

  friend bool operator==(const Config &, const Config &) = default;
};

std::string dump_config(const Config &config);
Config parse_config(std::string_view json_text);
Config load_config(const std::filesystem::path &path);
void save_config(const std::filesystem::path &path, const Config &config);

} // namespace livqual
