#include "livqual/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "livqual/error.hpp"

namespace livqual {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::uint64_t SplitMix64::next() noexcept {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() noexcept {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double SplitMix64::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * kPi * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * kPi * u2);
}

void SynthSpec::validate() const {
  auto require = [](bool ok, const char *what) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, std::string("synth spec: ") + what);
  };
  require(width >= GrayImage::kMinSide && height >= GrayImage::kMinSide,
          "image must be at least 32x32");
  require(frequency > 0.0 && frequency < 0.5, "frequency must be in (0, 0.5)");
  require(amplitude >= 0.0, "amplitude must be >= 0");
  require(extent > 0.0 && extent <= 1.0, "extent must be in (0, 1]");
  require(block_size >= 8 && block_size <= std::min(width, height), "bad block size");
  for (const auto &d : degradations) {
    switch (d.kind) {
    case Degradation::Kind::gaussian_blur:
    case Degradation::Kind::additive_noise: require(d.value >= 0.0, "sigma must be >= 0"); break;
    case Degradation::Kind::contrast_scale: require(d.value >= 0.0, "contrast must be >= 0"); break;
    case Degradation::Kind::block_flatten:
      require(d.value >= 0.0 && d.value <= 1.0, "flatten fraction must be in [0, 1]");
      break;
    }
  }
}

int GroundTruth::inside_count() const noexcept {
  return static_cast<int>(std::count(block_inside.begin(), block_inside.end(), 1));
}

int GroundTruth::flattened_count() const noexcept {
  return static_cast<int>(std::count(flattened.begin(), flattened.end(), 1));
}

namespace {

void gaussian_blur(std::vector<double> &img, int w, int h, double sigma) {
  if (sigma <= 0.0) return;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int t = -radius; t <= radius; ++t) sum += k[t + radius] = std::exp(-(t * t) / (2.0 * sigma * sigma));
  for (auto &v : k) v /= sum;
  auto clampi = [](int i, int n) { return std::clamp(i, 0, n - 1); };
  std::vector<double> tmp(img.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t)
        acc += k[t + radius] * img[static_cast<std::size_t>(y) * w + clampi(x + t, w)];
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t)
        acc += k[t + radius] * tmp[static_cast<std::size_t>(clampi(y + t, h)) * w + x];
      img[static_cast<std::size_t>(y) * w + x] = acc;
    }
}

} // namespace

SynthImage generate(const SynthSpec &spec) {
  spec.validate();
  const int w = spec.width;
  const int h = spec.height;
  const double cx = 0.5 * (w - 1);
  const double cy = 0.5 * (h - 1);
  const double scale = std::max(w, h);
  const double angle = spec.flow == FlowPattern::parallel ? 0.0 : spec.angle;
  const double tx = std::cos(angle), ty = std::sin(angle);   // along ridges
  const double nx = -std::sin(angle), ny = std::cos(angle);  // across ridges
  const double bend = spec.flow == FlowPattern::smooth ? spec.bend : 0.0;
  const double shear = spec.flow == FlowPattern::smooth ? spec.shear : 0.0;

  auto inside = [&](double x, double y) {
    const double hx = 0.5 * spec.extent * w;
    const double hy = 0.5 * spec.extent * h;
    switch (spec.shape) {
    case ForegroundShape::full: return true;
    case ForegroundShape::rectangle:
      return x >= cx - hx && x < cx + hx && y >= cy - hy && y < cy + hy;
    case ForegroundShape::ellipse: {
      const double ex = (x - cx) / hx, ey = (y - cy) / hy;
      return ex * ex + ey * ey <= 1.0;
    }
    }
    return true;
  };
  // Phase in cycles: f * (u + (bend v^2 + 2 shear u v) / (2 scale)).
  auto phase_at = [&](double x, double y) {
    const double u = (x - cx) * nx + (y - cy) * ny;
    const double v = (x - cx) * tx + (y - cy) * ty;
    return spec.frequency * (u + (bend * v * v + 2.0 * shear * u * v) / (2.0 * scale)) + spec.phase;
  };
  auto ridge_theta_at = [&](double x, double y) {
    const double u = (x - cx) * nx + (y - cy) * ny;
    const double v = (x - cx) * tx + (y - cy) * ty;
    const double du = 1.0 + shear * v / scale;
    const double dv = (bend * v + shear * u) / scale;
    const double gx = du * nx + dv * tx;
    const double gy = du * ny + dv * ty;
    double theta = std::atan2(gy, gx) - kPi / 2.0;
    theta = std::fmod(theta, kPi);
    if (theta < 0.0) theta += kPi;
    if (theta >= kPi) theta -= kPi;
    return theta;
  };

  GroundTruth truth;
  truth.grid = block_partition(w, h, spec.block_size);
  truth.pixel_foreground.assign(static_cast<std::size_t>(w) * h, 0);

  const double ridge_mean = spec.background - spec.amplitude;
  std::vector<double> img(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (inside(x, y)) {
        truth.pixel_foreground[i] = 1;
        img[i] = ridge_mean + spec.amplitude * std::cos(2.0 * kPi * phase_at(x, y));
      } else {
        img[i] = spec.background;
      }
    }
  }

  const BlockGrid &grid = truth.grid;
  truth.block_theta.assign(grid.count(), 0.0);
  truth.block_inside.assign(grid.count(), 0);
  truth.block_outside.assign(grid.count(), 0);
  truth.flattened.assign(grid.count(), 0);
  for (int b = 0; b < grid.count(); ++b) {
    const Block blk = grid.block(b);
    truth.block_theta[b] = ridge_theta_at(blk.center_x(), blk.center_y());
    std::size_t n = 0;
    for (int y = blk.y0; y < blk.y0 + blk.size; ++y)
      for (int x = blk.x0; x < blk.x0 + blk.size; ++x)
        n += truth.pixel_foreground[static_cast<std::size_t>(y) * w + x];
    truth.block_inside[b] = n == static_cast<std::size_t>(blk.size) * blk.size;
    truth.block_outside[b] = n == 0;
  }

  SplitMix64 rng(spec.seed);
  for (const auto &d : spec.degradations) {
    switch (d.kind) {
    case Degradation::Kind::gaussian_blur: gaussian_blur(img, w, h, d.value); break;
    case Degradation::Kind::additive_noise:
      for (auto &v : img) v += d.value * rng.normal();
      break;
    case Degradation::Kind::contrast_scale: {
      double mean = 0.0;
      for (double v : img) mean += v;
      mean /= static_cast<double>(img.size());
      for (auto &v : img) v = mean + d.value * (v - mean);
      break;
    }
    case Degradation::Kind::block_flatten: {
      std::vector<int> candidates;
      for (int b = 0; b < grid.count(); ++b)
        if (truth.block_inside[b] && !truth.flattened[b]) candidates.push_back(b);
      const auto pick = static_cast<std::size_t>(
          std::floor(d.value * static_cast<double>(truth.inside_count())));
      for (std::size_t i = candidates.size(); i > 1; --i) {
        std::swap(candidates[i - 1], candidates[rng.next() % i]);
      }
      for (std::size_t k = 0; k < std::min(pick, candidates.size()); ++k) {
        const Block blk = grid.block(candidates[k]);
        double mean = 0.0;
        for (int y = blk.y0; y < blk.y0 + blk.size; ++y)
          for (int x = blk.x0; x < blk.x0 + blk.size; ++x) mean += img[static_cast<std::size_t>(y) * w + x];
        mean /= static_cast<double>(blk.size) * blk.size;
        for (int y = blk.y0; y < blk.y0 + blk.size; ++y)
          for (int x = blk.x0; x < blk.x0 + blk.size; ++x) img[static_cast<std::size_t>(y) * w + x] = mean;
        truth.flattened[candidates[k]] = 1;
      }
      break;
    }
    }
  }

  std::vector<std::uint8_t> pixels(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double v = std::round(img[i]);
    if (v < 0.0 || v > 255.0) ++truth.clamped_pixels;
    pixels[i] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
  }
  return {GrayImage(w, h, std::move(pixels)), std::move(truth)};
}

namespace {

const char *flow_name(FlowPattern f) {
  switch (f) {
  case FlowPattern::parallel: return "parallel";
  case FlowPattern::rotated: return "rotated";
  case FlowPattern::smooth: return "smooth";
  }
  return "";
}

const char *shape_name(ForegroundShape s) {
  switch (s) {
  case ForegroundShape::full: return "full";
  case ForegroundShape::rectangle: return "rectangle";
  case ForegroundShape::ellipse: return "ellipse";
  }
  return "";
}

const char *degradation_name(Degradation::Kind k) {
  switch (k) {
  case Degradation::Kind::gaussian_blur: return "gaussian_blur";
  case Degradation::Kind::additive_noise: return "additive_noise";
  case Degradation::Kind::contrast_scale: return "contrast_scale";
  case Degradation::Kind::block_flatten: return "block_flatten";
  }
  return "";
}

} // namespace

void save_ground_truth(const std::filesystem::path &path, const SynthSpec &spec,
                       const GroundTruth &truth) {
  auto degradations = nlohmann::json::array();
  for (const auto &d : spec.degradations)
    degradations.push_back({{"kind", degradation_name(d.kind)}, {"value", d.value}});
  const nlohmann::json j = {
      {"prng", "splitmix64"},
      {"spec",
       {{"seed", spec.seed},
        {"width", spec.width},
        {"height", spec.height},
        {"frequency", spec.frequency},
        {"flow", flow_name(spec.flow)},
        {"angle", spec.angle},
        {"bend", spec.bend},
        {"shear", spec.shear},
        {"phase", spec.phase},
        {"amplitude", spec.amplitude},
        {"background", spec.background},
        {"shape", shape_name(spec.shape)},
        {"extent", spec.extent},
        {"block_size", spec.block_size},
        {"degradations", degradations}}},
      {"grid", {{"block_size", truth.grid.block_size}, {"cols", truth.grid.cols}, {"rows", truth.grid.rows}}},
      {"block_theta", truth.block_theta},
      {"block_inside", truth.block_inside},
      {"block_outside", truth.block_outside},
      {"flattened", truth.flattened},
      {"clamped_pixels", truth.clamped_pixels},
  };
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump() << "\n";
}

SynthSpec corpus_real_spec(const CorpusOptions &options, int index) {
  SplitMix64 rng(options.seed ^ (0xD1B54A32D192ED03ull * static_cast<std::uint64_t>(index + 1)));
  SynthSpec s;
  s.seed = rng.next();
  s.width = options.size;
  s.height = options.size;
  s.flow = FlowPattern::smooth;
  s.frequency = rng.uniform(0.085, 0.115);
  s.angle = rng.uniform(0.0, kPi);
  s.bend = rng.uniform(-0.8, 0.8);
  s.shear = rng.uniform(-0.4, 0.4);
  s.phase = rng.uniform();
  s.amplitude = rng.uniform(30.0, 45.0);
  s.background = rng.uniform(190.0, 215.0);
  s.shape = ForegroundShape::ellipse;
  s.extent = rng.uniform(0.75, 0.9);
  return s;
}

SynthSpec corpus_fake_spec(const CorpusOptions &options, int index) {
  SynthSpec s = corpus_real_spec(options, index);
  s.degradations = {Degradation::blur(1.5), Degradation::noise(12.0), Degradation::contrast(0.7)};
  return s;
}

DatasetManifest make_liveness_corpus(const CorpusOptions &options,
                                     const std::filesystem::path &out_dir) {
  if (options.n_per_class < 10) {
    throw Error(ErrorCode::InvalidArgument, "corpus needs n_per_class >= 10");
  }
  std::filesystem::create_directories(out_dir);
  DatasetManifest m;
  m.sensors = {options.sensor};
  const int dev_count = options.n_per_class / 2;
  for (int i = 0; i < options.n_per_class; ++i) {
    const Split split = i < dev_count ? Split::dev : Split::test;
    for (Label label : {Label::real, Label::fake}) {
      const SynthSpec spec = label == Label::real ? corpus_real_spec(options, i)
                                                  : corpus_fake_spec(options, i);
      const SynthImage img = generate(spec);
      char stem[64];
      std::snprintf(stem, sizeof stem, "%s_%04d", label == Label::real ? "real" : "fake", i);
      save_image(out_dir / (std::string(stem) + ".pgm"), img.image);
      save_ground_truth(out_dir / (std::string(stem) + ".json"), spec, img.truth);
      m.rows.push_back({std::string(stem) + ".pgm", label, options.sensor, split,
                        std::nullopt, std::nullopt});
    }
  }
  save_manifest(out_dir / "manifest.csv", m);
  return m;
}

} // namespace livqual
