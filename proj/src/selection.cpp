#include "livqual/selection.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "livqual/csv.hpp"
#include "livqual/error.hpp"
#include "livqual/parallel.hpp"

namespace livqual {

bool ranks_before(const SubsetScore &a, const SubsetScore &b) noexcept {
  if (a.loo_ace != b.loo_ace) return a.loo_ace < b.loo_ace;
  if (a.cardinality != b.cardinality) return a.cardinality < b.cardinality;
  return a.mask.bits() < b.mask.bits();
}

std::vector<Label> loo_predictions(const Dataset &data, FeatureMask mask,
                                   double epsilon_scale) {
  if (mask.empty()) throw Error(ErrorCode::EmptyMask, "subset mask is empty");
  if (data.features.size() != data.labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "features and labels differ in length");
  }
  if (data.count(Label::real) < 3 || data.count(Label::fake) < 3) {
    throw Error(ErrorCode::InsufficientSamples,
                "leave-one-out needs >= 3 samples per class");
  }
  const std::size_t n = data.size();
  std::vector<Label> predicted(n);
  std::vector<QualityVector> train_x;
  std::vector<Label> train_y;
  train_x.reserve(n - 1);
  train_y.reserve(n - 1);
  for (std::size_t held = 0; held < n; ++held) {
    train_x.clear();
    train_y.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (i == held) continue;
      train_x.push_back(data.features[i]);
      train_y.push_back(data.labels[i]);
    }
    const LdaModel model = fit_lda(train_x, train_y, mask, "", epsilon_scale);
    predicted[held] = model.classify(data.features[held]).label;
  }
  return predicted;
}

SubsetScore loo_ace(const Dataset &data, FeatureMask mask, double epsilon_scale) {
  const std::vector<Label> predicted = loo_predictions(data, mask, epsilon_scale);
  SubsetScore s;
  s.mask = mask;
  s.cardinality = mask.cardinality();
  std::size_t reals = 0, fakes = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.labels[i] == Label::real) {
      ++reals;
      s.reals_as_fake += predicted[i] == Label::fake;
    } else {
      ++fakes;
      s.fakes_as_real += predicted[i] == Label::real;
    }
  }
  s.loo_flr = 100.0 * static_cast<double>(s.fakes_as_real) / static_cast<double>(fakes);
  s.loo_ffr = 100.0 * static_cast<double>(s.reals_as_fake) / static_cast<double>(reals);
  s.loo_ace = 0.5 * (s.loo_flr + s.loo_ffr);
  return s;
}

SelectionResult exhaustive_select(const Dataset &devset, std::string sensor,
                                  int threads, double epsilon_scale) {
  constexpr std::size_t kSubsets = FeatureMask::kAllBits;  // 2^10 - 1
  std::vector<SubsetScore> scores(kSubsets);
  parallel_for(kSubsets, threads > 0 ? threads : default_thread_count(),
               [&](std::size_t i) {
                 scores[i] = loo_ace(devset, FeatureMask(static_cast<std::uint16_t>(i + 1)),
                                     epsilon_scale);
               });
  std::sort(scores.begin(), scores.end(), ranks_before);
  SelectionResult r;
  r.sensor = std::move(sensor);
  r.best = scores.front();
  r.ranking = std::move(scores);
  return r;
}

std::array<CurvePoint, kFeatureCount> best_by_cardinality(std::span<const SubsetScore> ranking) {
  std::array<CurvePoint, kFeatureCount> curve;
  std::array<bool, kFeatureCount> seen{};
  for (int k = 0; k < kFeatureCount; ++k) {
    curve[k].cardinality = k + 1;
    curve[k].best_ace = std::numeric_limits<double>::quiet_NaN();
  }
  for (const auto &s : ranking) {
    const int k = s.cardinality - 1;
    if (k < 0 || k >= kFeatureCount) continue;
    if (!seen[k] || ranks_before(s, SubsetScore{curve[k].mask, s.cardinality, curve[k].best_ace})) {
      curve[k].best_ace = s.loo_ace;
      curve[k].mask = s.mask;
      seen[k] = true;
    }
  }
  return curve;
}

void save_subset(const std::filesystem::path &path, const std::string &sensor,
                 const SubsetScore &score) {
  const nlohmann::json j = {{"sensor", sensor},
                            {"mask_bits", score.mask.to_string()},
                            {"loo_ace", score.loo_ace},
                            {"loo_flr", score.loo_flr},
                            {"loo_ffr", score.loo_ffr}};
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

SubsetFile load_subset(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    nlohmann::json j;
    in >> j;
    SubsetFile f;
    f.sensor = j.at("sensor").get<std::string>();
    f.mask = FeatureMask::parse(j.at("mask_bits").get<std::string>());
    f.loo_ace = j.value("loo_ace", 0.0);
    f.loo_flr = j.value("loo_flr", 0.0);
    f.loo_ffr = j.value("loo_ffr", 0.0);
    if (f.mask.empty()) throw Error(ErrorCode::EmptyMask, path.string() + ": empty subset");
    return f;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void save_ranking_csv(const std::filesystem::path &path,
                      std::span<const SubsetScore> ranking) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "mask_bits,cardinality,ace,flr,ffr\n";
  for (const auto &s : ranking) {
    out << s.mask.to_string() << ',' << s.cardinality << ',' << format_csv_double(s.loo_ace)
        << ',' << format_csv_double(s.loo_flr) << ',' << format_csv_double(s.loo_ffr) << '\n';
  }
}

void save_curve_csv(const std::filesystem::path &path, std::span<const CurvePoint> curve) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "cardinality,best_ace,mask_bits\n";
  for (const auto &p : curve) {
    out << p.cardinality << ',' << format_csv_double(p.best_ace) << ','
        << p.mask.to_string() << '\n';
  }
}

} // namespace livqual
