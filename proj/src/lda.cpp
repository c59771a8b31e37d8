#include "livqual/lda.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json_config.hpp"
#include "livqual/error.hpp"

namespace livqual {

// --- FeatureMask ---------------------------------------------------------------

FeatureMask::FeatureMask(std::uint16_t bits) : bits_(bits) {
  if (bits > kAllBits) {
    throw Error(ErrorCode::InvalidArgument, "feature mask has bits beyond the ten features");
  }
}

FeatureMask FeatureMask::parse(std::string_view bit_string) {
  if (bit_string.size() != kFeatureCount) {
    throw Error(ErrorCode::ParseError,
                "mask bit string must have 10 characters: '" + std::string(bit_string) + "'");
  }
  std::uint16_t bits = 0;
  for (int i = 0; i < kFeatureCount; ++i) {
    if (bit_string[i] == '1') {
      bits |= static_cast<std::uint16_t>(1u << i);
    } else if (bit_string[i] != '0') {
      throw Error(ErrorCode::ParseError, "mask bit string must be 0/1 only");
    }
  }
  return FeatureMask(bits);
}

FeatureMask FeatureMask::of(std::initializer_list<Feature> features) {
  std::uint16_t bits = 0;
  for (Feature f : features) bits |= static_cast<std::uint16_t>(1u << static_cast<int>(f));
  return FeatureMask(bits);
}

int FeatureMask::cardinality() const noexcept { return std::popcount(bits_); }

std::vector<int> FeatureMask::indices() const {
  std::vector<int> out;
  for (int i = 0; i < kFeatureCount; ++i)
    if ((bits_ >> i) & 1u) out.push_back(i);
  return out;
}

std::string FeatureMask::to_string() const {
  std::string s(kFeatureCount, '0');
  for (int i = 0; i < kFeatureCount; ++i)
    if ((bits_ >> i) & 1u) s[i] = '1';
  return s;
}

std::size_t Dataset::count(Label label) const noexcept {
  std::size_t n = 0;
  for (Label l : labels) n += l == label;
  return n;
}

// --- model -------------------------------------------------------------------

LdaModel::LdaModel(Parameters params) : p_(std::move(params)) {
  const int d = p_.subset_mask.cardinality();
  if (d == 0) throw Error(ErrorCode::EmptyMask, "model subset mask is empty");
  const auto n = static_cast<Eigen::Index>(d);
  if (p_.norm_mean.size() != n || p_.norm_std.size() != n ||
      p_.mean_real.size() != n || p_.mean_fake.size() != n ||
      p_.covariance.rows() != n || p_.covariance.cols() != n ||
      p_.zero_variance.size() != static_cast<std::size_t>(d)) {
    throw Error(ErrorCode::ModelDimensionMismatch,
                "model arrays do not match subset dimension " + std::to_string(d));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(p_.norm_std[i] > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "normalization std must be > 0");
    }
  }
  if (p_.covariance != p_.covariance.transpose()) {
    throw Error(ErrorCode::InvalidArgument, "covariance is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(p_.covariance);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::InvalidArgument, "covariance is not positive definite");
  }
  weights_ = llt.solve(p_.mean_real - p_.mean_fake);
  bias_ = -0.5 * (p_.mean_real + p_.mean_fake).dot(weights_);
}

bool LdaModel::has_zero_variance_feature() const noexcept {
  for (bool z : p_.zero_variance)
    if (z) return true;
  return false;
}

Eigen::VectorXd LdaModel::project(const QualityVector &q) const {
  const auto idx = p_.subset_mask.indices();
  Eigen::VectorXd x(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    x[i] = (q[idx[k]] - p_.norm_mean[i]) / p_.norm_std[i];
  }
  return x;
}

double LdaModel::score(const QualityVector &q) const {
  return weights_.dot(project(q)) + bias_;
}

LivenessDecision LdaModel::classify(const QualityVector &q) const {
  const double s = score(q);
  // Ties go to fake.
  return {s > 0.0 ? Label::real : Label::fake, s};
}

LivenessDecision LdaModel::classify(std::span<const double> features) const {
  if (features.size() != kFeatureCount) {
    throw Error(ErrorCode::ModelDimensionMismatch,
                "expected " + std::to_string(kFeatureCount) + " features, got " +
                    std::to_string(features.size()));
  }
  QualityVector q;
  std::copy(features.begin(), features.end(), q.values.begin());
  return classify(q);
}

// --- fitting -------------------------------------------------------------------

LdaModel fit_lda(std::span<const QualityVector> features, std::span<const Label> labels,
                 FeatureMask subset_mask, std::string sensor, double epsilon_scale) {
  if (subset_mask.empty()) throw Error(ErrorCode::EmptyMask, "subset mask is empty");
  if (features.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "features and labels differ in length");
  }
  std::size_t n_real = 0;
  for (Label l : labels) n_real += l == Label::real;
  const std::size_t n_fake = labels.size() - n_real;
  if (n_real < 2 || n_fake < 2) {
    throw Error(ErrorCode::InsufficientSamples,
                "need >= 2 samples per class, got " + std::to_string(n_real) +
                    " real / " + std::to_string(n_fake) + " fake");
  }

  const std::vector<int> idx = subset_mask.indices();
  const auto d = static_cast<Eigen::Index>(idx.size());
  const std::size_t n = features.size();
  const double nd = static_cast<double>(n);

  LdaModel::Parameters p;
  p.subset_mask = subset_mask;
  p.sensor = std::move(sensor);
  p.norm_mean = Eigen::VectorXd::Zero(d);
  p.norm_std = Eigen::VectorXd::Zero(d);
  p.zero_variance.assign(idx.size(), false);

  // Population statistics, two passes.
  for (Eigen::Index k = 0; k < d; ++k) {
    double sum = 0.0;
    for (const auto &q : features) sum += q[idx[k]];
    const double mean = sum / nd;
    double ss = 0.0;
    for (const auto &q : features) ss += (q[idx[k]] - mean) * (q[idx[k]] - mean);
    double sd = std::sqrt(ss / nd);
    if (!(sd > 1e-12 * std::max(1.0, std::fabs(mean)))) {
      sd = 1.0;
      p.zero_variance[k] = true;
    }
    p.norm_mean[k] = mean;
    p.norm_std[k] = sd;
  }

  Eigen::MatrixXd z(d, static_cast<Eigen::Index>(n));
  for (std::size_t s = 0; s < n; ++s)
    for (Eigen::Index k = 0; k < d; ++k)
      z(k, static_cast<Eigen::Index>(s)) = (features[s][idx[k]] - p.norm_mean[k]) / p.norm_std[k];

  // Class means and scatter matrices go through identical code so that
  // swapping the labels swaps them exactly.
  auto class_stats = [&](Label which, Eigen::VectorXd &mean, Eigen::MatrixXd &scatter) {
    mean = Eigen::VectorXd::Zero(d);
    double count = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      if (labels[s] != which) continue;
      mean += z.col(static_cast<Eigen::Index>(s));
      count += 1.0;
    }
    mean /= count;
    scatter = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t s = 0; s < n; ++s) {
      if (labels[s] != which) continue;
      const Eigen::VectorXd c = z.col(static_cast<Eigen::Index>(s)) - mean;
      scatter.noalias() += c * c.transpose();
    }
  };
  Eigen::MatrixXd scatter_real, scatter_fake;
  class_stats(Label::real, p.mean_real, scatter_real);
  class_stats(Label::fake, p.mean_fake, scatter_fake);

  Eigen::MatrixXd pooled = (scatter_real + scatter_fake) / (nd - 2.0);
  pooled = 0.5 * (pooled + pooled.transpose()).eval();
  const double trace = pooled.trace();
  // A zero-trace pooled matrix (all selected features constant) still gets a
  // unit-scale ridge so the model stays well-defined.
  p.epsilon = epsilon_scale * (trace > 0.0 ? trace / static_cast<double>(d) : 1.0);
  pooled.diagonal().array() += p.epsilon;
  p.covariance = std::move(pooled);
  return LdaModel(std::move(p));
}

LdaModel fit_lda(const Dataset &data, FeatureMask subset_mask, std::string sensor,
                 double epsilon_scale) {
  return fit_lda(data.features, data.labels, subset_mask, std::move(sensor), epsilon_scale);
}

// --- serialization -------------------------------------------------------------

namespace {

constexpr int kModelSchemaVersion = 1;

nlohmann::json to_array(const Eigen::VectorXd &v) {
  auto a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd from_array(const nlohmann::json &a, const char *what) {
  if (!a.is_array()) throw Error(ErrorCode::ParseError, std::string(what) + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

} // namespace

std::string dump_model(const LdaModel &model) {
  const auto &p = model.parameters();
  const auto d = p.covariance.rows();
  auto cov = nlohmann::json::array();
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) cov.push_back(p.covariance(r, c));
  nlohmann::json j = {
      {"schema_version", kModelSchemaVersion},
      {"feature_order_version", kFeatureOrderVersion},
      {"sensor", p.sensor},
      {"subset_mask", p.subset_mask.to_string()},
      {"normalization",
       {{"mean", to_array(p.norm_mean)},
        {"std", to_array(p.norm_std)},
        {"zero_variance", p.zero_variance}}},
      {"means", {{"real", to_array(p.mean_real)}, {"fake", to_array(p.mean_fake)}}},
      {"covariance", cov},
      {"epsilon", p.epsilon},
  };
  if (p.config) j["config"] = detail::config_to_json(*p.config);
  return j.dump(2);
}

LdaModel parse_model(std::string_view json_text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(json_text);
    const int version = j.at("schema_version").get<int>();
    if (version != kModelSchemaVersion) {
      throw Error(ErrorCode::ParseError,
                  "unsupported model schema_version " + std::to_string(version));
    }
    if (j.value("feature_order_version", kFeatureOrderVersion) != kFeatureOrderVersion) {
      throw Error(ErrorCode::ParseError, "model uses a different feature order");
    }
    LdaModel::Parameters p;
    p.sensor = j.at("sensor").get<std::string>();
    p.subset_mask = FeatureMask::parse(j.at("subset_mask").get<std::string>());
    const auto &norm = j.at("normalization");
    p.norm_mean = from_array(norm.at("mean"), "normalization.mean");
    p.norm_std = from_array(norm.at("std"), "normalization.std");
    p.zero_variance = norm.value("zero_variance",
                                 std::vector<bool>(static_cast<std::size_t>(p.norm_mean.size()), false));
    p.mean_real = from_array(j.at("means").at("real"), "means.real");
    p.mean_fake = from_array(j.at("means").at("fake"), "means.fake");
    const Eigen::VectorXd flat = from_array(j.at("covariance"), "covariance");
    const Eigen::Index d = p.norm_mean.size();
    if (flat.size() != d * d) {
      throw Error(ErrorCode::ModelDimensionMismatch, "covariance size does not match dimension");
    }
    p.covariance.resize(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < d; ++c) p.covariance(r, c) = flat[r * d + c];
    p.epsilon = j.at("epsilon").get<double>();
    if (j.contains("config")) p.config = detail::config_from_json(j.at("config"));
    return LdaModel(std::move(p));
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::ParseError, std::string("model: ") + e.what());
  }
}

void save_model(const std::filesystem::path &path, const LdaModel &model) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << dump_model(model) << "\n";
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

LdaModel load_model(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

} // namespace livqual
