#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "livqual/config.hpp"
#include "livqual/labels.hpp"
#include "livqual/quality.hpp"

namespace livqual {

/// Subset of the ten quality features. Bit i selects feature i; the text form
/// lists features in their canonical order, so "1000000000" is q_ocl alone.
class FeatureMask {
public:
  static constexpr std::uint16_t kAllBits = (1u << kFeatureCount) - 1;

  constexpr FeatureMask() = default;
  explicit FeatureMask(std::uint16_t bits);

  static FeatureMask all() { return FeatureMask(kAllBits); }
  static FeatureMask parse(std::string_view bit_string);
  static FeatureMask of(std::initializer_list<Feature> features);

  std::uint16_t bits() const noexcept { return bits_; }
  int cardinality() const noexcept;
  bool empty() const noexcept { return bits_ == 0; }
  bool contains(Feature f) const noexcept {
    return (bits_ >> static_cast<int>(f)) & 1u;
  }
  std::vector<int> indices() const;
  std::string to_string() const;

  friend bool operator==(FeatureMask, FeatureMask) = default;

private:
  std::uint16_t bits_ = 0;
};

/// Feature vectors with their ground-truth classes.
struct Dataset {
  std::vector<QualityVector> features;
  std::vector<Label> labels;

  std::size_t size() const noexcept { return features.size(); }
  std::size_t count(Label label) const noexcept;
  void add(const QualityVector &q, Label label) {
    features.push_back(q);
    labels.push_back(label);
  }
};

struct LivenessDecision {
  Label label = Label::fake;
  double score = 0.0;  // > 0 means real
};

/// Two-class linear discriminant with equal priors over z-scored features.
class LdaModel {
public:
  struct Parameters {
    FeatureMask subset_mask;
    std::string sensor;
    Eigen::VectorXd norm_mean;
    Eigen::VectorXd norm_std;
    std::vector<bool> zero_variance;
    Eigen::VectorXd mean_real;
    Eigen::VectorXd mean_fake;
    Eigen::MatrixXd covariance;  // pooled, regularization included
    double epsilon = 0.0;
    std::optional<Config> config;
  };

  /// Validates dimensions and positive definiteness, then derives the
  /// discriminant direction.
  explicit LdaModel(Parameters params);

  const Parameters &parameters() const noexcept { return p_; }
  const FeatureMask &subset_mask() const noexcept { return p_.subset_mask; }
  const std::string &sensor() const noexcept { return p_.sensor; }
  int dimension() const noexcept { return static_cast<int>(p_.norm_mean.size()); }
  const Eigen::VectorXd &weights() const noexcept { return weights_; }
  double bias() const noexcept { return bias_; }
  bool has_zero_variance_feature() const noexcept;

  /// Normalized subset of a full feature vector.
  Eigen::VectorXd project(const QualityVector &q) const;
  double score(const QualityVector &q) const;
  LivenessDecision classify(const QualityVector &q) const;
  /// Raw feature array; must hold exactly kFeatureCount values.
  LivenessDecision classify(std::span<const double> features) const;

  void set_config(const Config &config) { p_.config = config; }

private:
  Parameters p_;
  Eigen::VectorXd weights_;
  double bias_ = 0.0;
};

LdaModel fit_lda(std::span<const QualityVector> features, std::span<const Label> labels,
                 FeatureMask subset_mask, std::string sensor,
                 double epsilon_scale = 1e-6);
LdaModel fit_lda(const Dataset &data, FeatureMask subset_mask, std::string sensor,
                 double epsilon_scale = 1e-6);

inline LivenessDecision classify(const LdaModel &model, const QualityVector &q) {
  return model.classify(q);
}

std::string dump_model(const LdaModel &model);
LdaModel parse_model(std::string_view json_text);
void save_model(const std::filesystem::path &path, const LdaModel &model);
LdaModel load_model(const std::filesystem::path &path);

} // namespace livqual
