#include "livqual/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json_config.hpp"
#include "livqual/error.hpp"

namespace livqual {

namespace {

void require(bool ok, const std::string &what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, "config: " + what);
}

template <typename T>
void read_field(const nlohmann::json &j, const char *key, T &out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::ParseError,
                std::string("config field '") + key + "': " + e.what());
  }
}

} // namespace

void GaborBankParams::validate() const {
  require(n_orientations >= 4, "gabor.n_orientations must be >= 4");
  require(frequency > 0.0 && frequency < 0.5,
          "gabor.frequency must be in (0, 0.5)");
  require(sigma > 0.0 && std::isfinite(sigma), "gabor.sigma must be > 0");
  require(segmentation_threshold >= 0.0, "gabor.segmentation_threshold must be >= 0");
}

void SpectrumParams::validate() const {
  require(n_bands >= 2, "spectrum.n_bands must be >= 2");
  require(f_min >= 0.0 && f_min < f_max && f_max <= 0.5,
          "spectrum band edges must satisfy 0 <= f_min < f_max <= 0.5");
  require(min_extent >= 8, "spectrum.min_extent must be >= 8");
}

void RidgeParams::validate() const {
  require(amplitude_min >= 0.0, "ridge.amplitude_min must be >= 0");
  require(variance_min >= 0.0, "ridge.variance_min must be >= 0");
  require(frequency_min > 0.0 && frequency_min < frequency_max &&
              frequency_max < 0.5,
          "ridge frequency range must satisfy 0 < min < max < 0.5");
  require(unreliable_overlap >= 0.0 && unreliable_overlap <= 1.0,
          "ridge.unreliable_overlap must be in [0, 1]");
}

void Config::validate() const {
  require(block_size >= 8, "block_size must be >= 8");
  gabor.validate();
  require(orientation_energy_min >= 0.0, "orientation_energy_min must be >= 0");
  spectrum.validate();
  require(abrupt_change > 0.0 && abrupt_change < std::numbers::pi / 2.0,
          "abrupt_change must be in (0, pi/2)");
  ridge.validate();
  require(lda_epsilon_scale >= 0.0, "lda_epsilon_scale must be >= 0");
}

namespace detail {

nlohmann::json config_to_json(const Config &c) {
  return {
      {"block_size", c.block_size},
      {"gabor",
       {{"n_orientations", c.gabor.n_orientations},
        {"frequency", c.gabor.frequency},
        {"sigma", c.gabor.sigma},
        {"segmentation_threshold", c.gabor.segmentation_threshold}}},
      {"orientation_energy_min", c.orientation_energy_min},
      {"spectrum",
       {{"n_bands", c.spectrum.n_bands},
        {"f_min", c.spectrum.f_min},
        {"f_max", c.spectrum.f_max},
        {"min_extent", c.spectrum.min_extent}}},
      {"abrupt_change", c.abrupt_change},
      {"ridge",
       {{"amplitude_min", c.ridge.amplitude_min},
        {"variance_min", c.ridge.variance_min},
        {"frequency_min", c.ridge.frequency_min},
        {"frequency_max", c.ridge.frequency_max},
        {"unreliable_overlap", c.ridge.unreliable_overlap}}},
      {"lda_epsilon_scale", c.lda_epsilon_scale},
  };
}

// Missing keys keep their defaults so partial config files are accepted.
Config config_from_json(const nlohmann::json &j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
  Config c;
  read_field(j, "block_size", c.block_size);
  if (j.contains("gabor")) {
    const auto &g = j.at("gabor");
    read_field(g, "n_orientations", c.gabor.n_orientations);
    read_field(g, "frequency", c.gabor.frequency);
    read_field(g, "sigma", c.gabor.sigma);
    read_field(g, "segmentation_threshold", c.gabor.segmentation_threshold);
  }
  read_field(j, "orientation_energy_min", c.orientation_energy_min);
  if (j.contains("spectrum")) {
    const auto &s = j.at("spectrum");
    read_field(s, "n_bands", c.spectrum.n_bands);
    read_field(s, "f_min", c.spectrum.f_min);
    read_field(s, "f_max", c.spectrum.f_max);
    read_field(s, "min_extent", c.spectrum.min_extent);
  }
  read_field(j, "abrupt_change", c.abrupt_change);
  if (j.contains("ridge")) {
    const auto &r = j.at("ridge");
    read_field(r, "amplitude_min", c.ridge.amplitude_min);
    read_field(r, "variance_min", c.ridge.variance_min);
    read_field(r, "frequency_min", c.ridge.frequency_min);
    read_field(r, "frequency_max", c.ridge.frequency_max);
    read_field(r, "unreliable_overlap", c.ridge.unreliable_overlap);
  }
  read_field(j, "lda_epsilon_scale", c.lda_epsilon_scale);
  c.validate();
  return c;
}

} // namespace detail

std::string dump_config(const Config &config) {
  return detail::config_to_json(config).dump(2);
}

Config parse_config(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
  return detail::config_from_json(j);
}

Config load_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void save_config(const std::filesystem::path &path, const Config &config) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << dump_config(config) << "\n";
}

} // namespace livqual
