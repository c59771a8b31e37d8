#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "livqual/labels.hpp"
#include "livqual/lda.hpp"

namespace livqual {

enum class Material { silicone, gelatin, playdoh };
enum class Procedure { cooperative, non_cooperative };
enum class GroupBy { material, procedure };

std::string_view to_string(Material m) noexcept;
std::string_view to_string(Procedure p) noexcept;

struct ManifestRow {
  std::string path;
  Label label = Label::real;
  std::string sensor;
  Split split = Split::dev;
  std::optional<Material> material;
  std::optional<Procedure> procedure;
};

/// CSV header: path,label,sensor,split[,material[,procedure]]. An optional
/// leading `# sensors=a;b;c` line declares the sensor list; without it the
/// list is the set of sensors that appear.
struct DatasetManifest {
  std::vector<std::string> sensors;
  std::vector<ManifestRow> rows;
};

DatasetManifest parse_manifest(std::istream &in, const std::string &name = "manifest");
DatasetManifest load_manifest(const std::filesystem::path &path);
void save_manifest(const std::filesystem::path &path, const DatasetManifest &manifest);

struct ManifestCount {
  std::string sensor;
  Split split = Split::dev;
  Label label = Label::real;
  std::size_t count = 0;
  std::size_t silicone = 0, gelatin = 0, playdoh = 0;
  std::size_t cooperative = 0, non_cooperative = 0;
};

/// Counts per (sensor, split, label), in sensor-declaration order.
std::vector<ManifestCount> summarize(const DatasetManifest &manifest);
std::string format_summary(const DatasetManifest &manifest);

/// FLR, FFR and ACE in percent. A rate is empty when its class is absent;
/// ACE is then withheld.
struct EvaluationReport {
  std::size_t real_as_real = 0;
  std::size_t real_as_fake = 0;
  std::size_t fake_as_fake = 0;
  std::size_t fake_as_real = 0;
  std::optional<double> flr;
  std::optional<double> ffr;
  std::optional<double> ace;

  std::size_t total() const noexcept {
    return real_as_real + real_as_fake + fake_as_fake + fake_as_real;
  }
  bool complete() const noexcept { return ace.has_value(); }
};

EvaluationReport compute_rates(std::span<const Label> decisions, std::span<const Label> truth);

struct CrossValReport {
  EvaluationReport stage1;  // train on dev, evaluate on test
  EvaluationReport stage2;  // train on test, evaluate on dev
  double ace1 = 0.0, flr1 = 0.0, ffr1 = 0.0;
  double ace2 = 0.0, flr2 = 0.0, ffr2 = 0.0;
  double final_ace = 0.0;
};

/// Both stage reports must be complete (both classes present).
CrossValReport combine_stages(const EvaluationReport &stage1, const EvaluationReport &stage2);

struct CrossValRun {
  CrossValReport report;
  std::vector<LivenessDecision> test_decisions;  // stage 1, test order
  std::vector<LivenessDecision> dev_decisions;   // stage 2, dev order
};

CrossValRun cross_validate_detailed(const Dataset &dev, const Dataset &test,
                                    FeatureMask subset_mask, const std::string &sensor,
                                    double epsilon_scale = 1e-6);

CrossValReport cross_validate(const Dataset &dev, const Dataset &test,
                              FeatureMask subset_mask, const std::string &sensor,
                              double epsilon_scale = 1e-6);

struct GroupReport {
  std::string group;
  std::size_t fakes = 0;
  EvaluationReport report;
};

/// Splits the fake samples by attribute and scores each group against the
/// full real set. `attribute[i]` is the group of sample i (ignored for reals).
/// Empty groups are omitted and noted in `warnings`.
std::vector<GroupReport> breakdown_report(std::span<const Label> decisions,
                                          std::span<const Label> truth,
                                          std::span<const std::optional<std::string>> attribute,
                                          GroupBy group_by,
                                          std::vector<std::string> *warnings = nullptr);

/// Table of the stage rates, rounded to one decimal for display.
std::string format_crossval(const std::string &sensor, const CrossValReport &report);

/// Machine form: `sensor,stage,flr,ffr,ace` rows for stages 1, 2 and final.
void write_crossval_csv(std::ostream &out, const std::string &sensor,
                        const CrossValReport &report, bool header = true);

} // namespace livqual
