#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "livqual/image.hpp"
#include "livqual/synth.hpp"

namespace fixtures {

inline constexpr double kPi = std::numbers::pi;

inline std::uint8_t to_gray(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
}

/// Image from a per-pixel intensity function.
inline livqual::GrayImage render(int w, int h, const std::function<double(int, int)> &f) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) px[static_cast<std::size_t>(y) * w + x] = to_gray(f(x, y));
  return livqual::GrayImage(w, h, std::move(px));
}

/// mean + amp * sin(2 pi f u), u measured across ridges running along `theta`.
inline double stripe_value(int x, int y, double f, double theta, double mean, double amp) {
  const double u = -x * std::sin(theta) + y * std::cos(theta);
  return mean + amp * std::sin(2.0 * kPi * f * u);
}

inline livqual::GrayImage stripes(int w, int h, double f, double theta, double mean = 128.0,
                                  double amp = 40.0) {
  return render(w, h, [&](int x, int y) { return stripe_value(x, y, f, theta, mean, amp); });
}

inline livqual::GrayImage noise(int w, int h, std::uint64_t seed, double mean = 128.0,
                               double sigma = 40.0) {
  livqual::SplitMix64 rng(seed);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h);
  for (auto &p : px) p = to_gray(mean + sigma * rng.normal());
  return livqual::GrayImage(w, h, std::move(px));
}

inline livqual::GrayImage uniform_noise(int w, int h, std::uint64_t seed) {
  livqual::SplitMix64 rng(seed);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h);
  for (auto &p : px) p = static_cast<std::uint8_t>(rng.next() & 0xFF);
  return livqual::GrayImage(w, h, std::move(px));
}

/// Scratch directory unique to the test binary, created fresh.
inline std::filesystem::path temp_dir(const std::string &name) {
  const char *base = std::getenv("LIVQUAL_TEST_TMP");
  std::filesystem::path p = base ? std::filesystem::path(base)
                                 : std::filesystem::temp_directory_path() / "livqual_tests";
  p /= name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

} // namespace fixtures
