#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "livqual/labels.hpp"
#include "livqual/lda.hpp"
#include "livqual/quality.hpp"

namespace livqual {

/// One row of the feature CSV:
/// path,label,sensor,split,q_ocl,q_e,q_loq,q_cof,q_mean,q_std,q_lcs1,q_lcs2,q_a,q_var
struct FeatureRow {
  std::string path;
  std::optional<Label> label;
  std::string sensor;
  std::optional<Split> split;
  QualityVector features;
};

std::string feature_csv_header();
void write_feature_csv(std::ostream &out, const std::vector<FeatureRow> &rows);
void save_feature_csv(const std::filesystem::path &path, const std::vector<FeatureRow> &rows);
std::vector<FeatureRow> parse_feature_csv(std::istream &in, const std::string &name = "features");
std::vector<FeatureRow> load_feature_csv(const std::filesystem::path &path);

/// Indices of the labeled rows matching `sensor` and `split`, in file order.
std::vector<std::size_t> matching_rows(const std::vector<FeatureRow> &rows,
                                       const std::string &sensor, std::optional<Split> split);

/// Labeled rows matching `sensor` (any sensor when empty) and `split` (any
/// split when empty).
Dataset select_rows(const std::vector<FeatureRow> &rows, const std::string &sensor,
                    std::optional<Split> split);

} // namespace livqual
