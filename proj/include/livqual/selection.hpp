#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "livqual/lda.hpp"

namespace livqual {

/// Leave-one-out performance of one feature subset. Rates are percentages.
struct SubsetScore {
  FeatureMask mask;
  int cardinality = 0;
  double loo_ace = 0.0;
  double loo_flr = 0.0;
  double loo_ffr = 0.0;
  std::size_t fakes_as_real = 0;
  std::size_t reals_as_fake = 0;
};

/// Total order used to rank subsets: lower ACE, then fewer features, then
/// smaller mask value.
bool ranks_before(const SubsetScore &a, const SubsetScore &b) noexcept;

/// Per-sample LOO predictions for one subset, in dataset order.
std::vector<Label> loo_predictions(const Dataset &data, FeatureMask mask,
                                   double epsilon_scale = 1e-6);

SubsetScore loo_ace(const Dataset &data, FeatureMask mask, double epsilon_scale = 1e-6);

struct SelectionResult {
  std::string sensor;
  SubsetScore best;
  std::vector<SubsetScore> ranking;  // sorted by ranks_before
};

/// Scores every non-empty subset of the ten features. `threads` <= 0 uses
/// default_thread_count().
SelectionResult exhaustive_select(const Dataset &devset, std::string sensor,
                                  int threads = 0, double epsilon_scale = 1e-6);

struct CurvePoint {
  int cardinality = 0;
  double best_ace = 0.0;
  FeatureMask mask;
};

/// Best LOO ACE for each subset size 1..10.
std::array<CurvePoint, kFeatureCount> best_by_cardinality(std::span<const SubsetScore> ranking);

void save_subset(const std::filesystem::path &path, const std::string &sensor,
                 const SubsetScore &score);

struct SubsetFile {
  std::string sensor;
  FeatureMask mask;
  double loo_ace = 0.0;
  double loo_flr = 0.0;
  double loo_ffr = 0.0;
};
SubsetFile load_subset(const std::filesystem::path &path);

/// `mask_bits,cardinality,ace,flr,ffr`, one row per subset in ranking order.
void save_ranking_csv(const std::filesystem::path &path,
                      std::span<const SubsetScore> ranking);
/// `cardinality,best_ace,mask_bits`.
void save_curve_csv(const std::filesystem::path &path,
                    std::span<const CurvePoint> curve);

} // namespace livqual
