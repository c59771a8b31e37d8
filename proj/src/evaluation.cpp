#include "livqual/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "livqual/csv.hpp"
#include "livqual/error.hpp"

namespace livqual {

std::string_view to_string(Material m) noexcept {
  switch (m) {
  case Material::silicone: return "silicone";
  case Material::gelatin: return "gelatin";
  case Material::playdoh: return "playdoh";
  }
  return "";
}

std::string_view to_string(Procedure p) noexcept {
  return p == Procedure::cooperative ? "cooperative" : "non-cooperative";
}

namespace {

bool is_blank(std::string_view s) { return s.empty() || s == "-" || s == "\xE2\x80\x94"; }

std::vector<std::string> split_list(const std::string &text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t\r") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

} // namespace

// --- manifest ----------------------------------------------------------------

DatasetManifest parse_manifest(std::istream &in, const std::string &name) {
  DatasetManifest m;
  std::string line;
  std::size_t lineno = 0;
  bool declared = false;
  bool have_header = false;
  std::vector<std::string> header;
  std::set<std::string> paths;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (!have_header && eq != std::string::npos &&
          line.substr(0, eq).find("sensors") != std::string::npos) {
        m.sensors = split_list(line.substr(eq + 1));
        declared = true;
      }
      continue;
    }
    auto f = split_csv_line(line);
    if (!have_header) {
      header = f;
      if (header.size() < 4 || header[0] != "path" || header[1] != "label" ||
          header[2] != "sensor" || header[3] != "split" ||
          (header.size() > 4 && header[4] != "material") ||
          (header.size() > 5 && header[5] != "procedure") || header.size() > 6) {
        throw Error(ErrorCode::ParseError,
                    where + ": header must be path,label,sensor,split[,material[,procedure]]");
      }
      have_header = true;
      continue;
    }
    if (f.size() != header.size()) {
      throw Error(ErrorCode::ParseError, where + ": expected " +
                                             std::to_string(header.size()) + " fields");
    }
    ManifestRow r;
    r.path = f[0];
    if (r.path.empty()) throw Error(ErrorCode::ParseError, where + ": empty path");
    const auto label = parse_label(f[1]);
    if (!label) throw Error(ErrorCode::ParseError, where + ": unknown label '" + f[1] + "'");
    r.label = *label;
    r.sensor = f[2];
    if (r.sensor.empty()) throw Error(ErrorCode::ParseError, where + ": empty sensor");
    const auto split = parse_split(f[3]);
    if (!split) throw Error(ErrorCode::ParseError, where + ": unknown split '" + f[3] + "'");
    r.split = *split;
    if (f.size() > 4 && !is_blank(f[4])) {
      if (f[4] == "silicone") r.material = Material::silicone;
      else if (f[4] == "gelatin" || f[4] == "gelatine") r.material = Material::gelatin;
      else if (f[4] == "playdoh") r.material = Material::playdoh;
      else throw Error(ErrorCode::ParseError, where + ": unknown material '" + f[4] + "'");
    }
    if (f.size() > 5 && !is_blank(f[5])) {
      if (f[5] == "cooperative") r.procedure = Procedure::cooperative;
      else if (f[5] == "non-cooperative") r.procedure = Procedure::non_cooperative;
      else throw Error(ErrorCode::ParseError, where + ": unknown procedure '" + f[5] + "'");
    }
    if (!paths.insert(r.path).second) {
      throw Error(ErrorCode::ParseError, where + ": duplicate path '" + r.path + "'");
    }
    if (declared) {
      if (std::find(m.sensors.begin(), m.sensors.end(), r.sensor) == m.sensors.end()) {
        throw Error(ErrorCode::ParseError, where + ": sensor '" + r.sensor + "' not declared");
      }
    } else if (std::find(m.sensors.begin(), m.sensors.end(), r.sensor) == m.sensors.end()) {
      m.sensors.push_back(r.sensor);
    }
    m.rows.push_back(std::move(r));
  }
  if (!have_header) throw Error(ErrorCode::ParseError, name + ": empty manifest");
  if (m.rows.empty()) throw Error(ErrorCode::ParseError, name + ": manifest has no rows");
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return parse_manifest(in, path.string());
}

void save_manifest(const std::filesystem::path &path, const DatasetManifest &manifest) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "# sensors=";
  for (std::size_t i = 0; i < manifest.sensors.size(); ++i)
    out << (i ? ";" : "") << manifest.sensors[i];
  out << "\npath,label,sensor,split,material,procedure\n";
  for (const auto &r : manifest.rows) {
    out << r.path << ',' << to_string(r.label) << ',' << r.sensor << ',' << to_string(r.split)
        << ',' << (r.material ? to_string(*r.material) : "") << ','
        << (r.procedure ? to_string(*r.procedure) : "") << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

std::vector<ManifestCount> summarize(const DatasetManifest &manifest) {
  std::vector<ManifestCount> out;
  for (const auto &sensor : manifest.sensors) {
    for (Split split : {Split::dev, Split::test}) {
      for (Label label : {Label::real, Label::fake}) {
        ManifestCount c{sensor, split, label};
        for (const auto &r : manifest.rows) {
          if (r.sensor != sensor || r.split != split || r.label != label) continue;
          ++c.count;
          if (r.material == Material::silicone) ++c.silicone;
          if (r.material == Material::gelatin) ++c.gelatin;
          if (r.material == Material::playdoh) ++c.playdoh;
          if (r.procedure == Procedure::cooperative) ++c.cooperative;
          if (r.procedure == Procedure::non_cooperative) ++c.non_cooperative;
        }
        out.push_back(c);
      }
    }
  }
  return out;
}

std::string format_summary(const DatasetManifest &manifest) {
  std::ostringstream os;
  for (const auto &c : summarize(manifest)) {
    os << c.sensor << ' ' << to_string(c.split) << ' ' << to_string(c.label) << ": " << c.count;
    if (c.silicone + c.gelatin + c.playdoh > 0)
      os << " (" << c.silicone << "s+" << c.gelatin << "g+" << c.playdoh << "p)";
    if (c.cooperative + c.non_cooperative > 0)
      os << " (" << c.cooperative << "c+" << c.non_cooperative << "nc)";
    os << '\n';
  }
  return os.str();
}

// --- rates -------------------------------------------------------------------

EvaluationReport compute_rates(std::span<const Label> decisions, std::span<const Label> truth) {
  if (decisions.size() != truth.size()) {
    throw Error(ErrorCode::LengthMismatch, "decisions and labels differ in length");
  }
  if (decisions.empty()) throw Error(ErrorCode::InvalidArgument, "no decisions to evaluate");
  EvaluationReport r;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == Label::real) {
      (decisions[i] == Label::real ? r.real_as_real : r.real_as_fake)++;
    } else {
      (decisions[i] == Label::fake ? r.fake_as_fake : r.fake_as_real)++;
    }
  }
  const std::size_t fakes = r.fake_as_fake + r.fake_as_real;
  const std::size_t reals = r.real_as_real + r.real_as_fake;
  if (fakes > 0) r.flr = 100.0 * static_cast<double>(r.fake_as_real) / static_cast<double>(fakes);
  if (reals > 0) r.ffr = 100.0 * static_cast<double>(r.real_as_fake) / static_cast<double>(reals);
  if (r.flr && r.ffr) r.ace = 0.5 * (*r.flr + *r.ffr);
  return r;
}

CrossValReport combine_stages(const EvaluationReport &stage1, const EvaluationReport &stage2) {
  if (!stage1.complete() || !stage2.complete()) {
    throw Error(ErrorCode::SingleClassInput,
                "cross-validation stages need both classes in every evaluation set");
  }
  CrossValReport c;
  c.stage1 = stage1;
  c.stage2 = stage2;
  c.flr1 = *stage1.flr;
  c.ffr1 = *stage1.ffr;
  c.ace1 = *stage1.ace;
  c.flr2 = *stage2.flr;
  c.ffr2 = *stage2.ffr;
  c.ace2 = *stage2.ace;
  c.final_ace = 0.5 * (c.ace1 + c.ace2);
  return c;
}

namespace {

std::vector<LivenessDecision> decide(const LdaModel &model, const Dataset &data) {
  std::vector<LivenessDecision> out;
  out.reserve(data.size());
  for (const auto &q : data.features) out.push_back(model.classify(q));
  return out;
}

std::vector<Label> labels_of(const std::vector<LivenessDecision> &d) {
  std::vector<Label> out;
  out.reserve(d.size());
  for (const auto &x : d) out.push_back(x.label);
  return out;
}

void require_both_classes(const Dataset &d, const char *which) {
  if (d.count(Label::real) == 0 || d.count(Label::fake) == 0) {
    throw Error(ErrorCode::SingleClassInput, std::string(which) + " set lacks a class");
  }
}

} // namespace

CrossValRun cross_validate_detailed(const Dataset &dev, const Dataset &test,
                                    FeatureMask subset_mask, const std::string &sensor,
                                    double epsilon_scale) {
  require_both_classes(dev, "development");
  require_both_classes(test, "test");
  CrossValRun run;
  const LdaModel on_dev = fit_lda(dev, subset_mask, sensor, epsilon_scale);
  run.test_decisions = decide(on_dev, test);
  const LdaModel on_test = fit_lda(test, subset_mask, sensor, epsilon_scale);
  run.dev_decisions = decide(on_test, dev);
  run.report = combine_stages(compute_rates(labels_of(run.test_decisions), test.labels),
                              compute_rates(labels_of(run.dev_decisions), dev.labels));
  return run;
}

CrossValReport cross_validate(const Dataset &dev, const Dataset &test,
                              FeatureMask subset_mask, const std::string &sensor,
                              double epsilon_scale) {
  return cross_validate_detailed(dev, test, subset_mask, sensor, epsilon_scale).report;
}

std::vector<GroupReport> breakdown_report(std::span<const Label> decisions,
                                          std::span<const Label> truth,
                                          std::span<const std::optional<std::string>> attribute,
                                          GroupBy group_by,
                                          std::vector<std::string> *warnings) {
  if (decisions.size() != truth.size() || attribute.size() != truth.size()) {
    throw Error(ErrorCode::LengthMismatch, "breakdown inputs differ in length");
  }
  std::vector<std::string> groups;
  if (group_by == GroupBy::material) {
    groups = {"silicone", "gelatin", "playdoh"};
  } else {
    groups = {"cooperative", "non-cooperative"};
  }
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] != Label::fake) continue;
    if (!attribute[i] ||
        std::find(groups.begin(), groups.end(), *attribute[i]) == groups.end()) {
      throw Error(ErrorCode::MissingAttribute,
                  "fake sample " + std::to_string(i) + " has no " +
                      (group_by == GroupBy::material ? "material" : "procedure"));
    }
  }
  std::vector<GroupReport> out;
  for (const auto &g : groups) {
    std::vector<Label> d, t;
    std::size_t fakes = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const bool keep = truth[i] == Label::real || *attribute[i] == g;
      if (!keep) continue;
      d.push_back(decisions[i]);
      t.push_back(truth[i]);
      fakes += truth[i] == Label::fake;
    }
    if (fakes == 0) {
      if (warnings) warnings->push_back("group '" + g + "' has no fake samples; omitted");
      continue;
    }
    out.push_back({g, fakes, compute_rates(d, t)});
  }
  return out;
}

std::string format_crossval(const std::string &sensor, const CrossValReport &r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%-12s FLR1/FLR2 %.1f/%.1f  FFR1/FFR2 %.1f/%.1f  ACE1/ACE2 %.1f/%.1f  ACE %.1f\n",
                sensor.c_str(), r.flr1, r.flr2, r.ffr1, r.ffr2, r.ace1, r.ace2, r.final_ace);
  return buf;
}

void write_crossval_csv(std::ostream &out, const std::string &sensor,
                        const CrossValReport &r, bool header) {
  if (header) out << "sensor,stage,flr,ffr,ace\n";
  out << sensor << ",1," << format_csv_double(r.flr1) << ',' << format_csv_double(r.ffr1) << ','
      << format_csv_double(r.ace1) << '\n';
  out << sensor << ",2," << format_csv_double(r.flr2) << ',' << format_csv_double(r.ffr2) << ','
      << format_csv_double(r.ace2) << '\n';
  out << sensor << ",final," << format_csv_double(0.5 * (r.flr1 + r.flr2)) << ','
      << format_csv_double(0.5 * (r.ffr1 + r.ffr2)) << ',' << format_csv_double(r.final_ace)
      << '\n';
}

} // namespace livqual
