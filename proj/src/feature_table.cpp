#include "livqual/feature_table.hpp"

#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

#include "livqual/csv.hpp"
#include "livqual/error.hpp"

namespace livqual {

std::string feature_csv_header() {
  std::string h = "path,label,sensor,split";
  for (auto name : kFeatureNames) {
    h += ',';
    h += name;
  }
  return h;
}

void write_feature_csv(std::ostream &out, const std::vector<FeatureRow> &rows) {
  out << feature_csv_header() << '\n';
  for (const auto &r : rows) {
    out << r.path << ',' << (r.label ? to_string(*r.label) : "") << ',' << r.sensor << ','
        << (r.split ? to_string(*r.split) : "");
    for (double v : r.features.values) out << ',' << format_csv_double(v);
    out << '\n';
  }
}

void save_feature_csv(const std::filesystem::path &path, const std::vector<FeatureRow> &rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_feature_csv(out, rows);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

std::vector<FeatureRow> parse_feature_csv(std::istream &in, const std::string &name) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, name + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != feature_csv_header()) {
    throw Error(ErrorCode::ParseError, name + ": unexpected header '" + line + "'");
  }
  std::vector<FeatureRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    const std::string where = name + ":" + std::to_string(lineno);
    if (f.size() != 4 + kFeatureCount) {
      throw Error(ErrorCode::ParseError, where + ": expected 14 fields");
    }
    FeatureRow r;
    r.path = f[0];
    if (!f[1].empty()) {
      r.label = parse_label(f[1]);
      if (!r.label) throw Error(ErrorCode::ParseError, where + ": bad label '" + f[1] + "'");
    }
    r.sensor = f[2];
    if (!f[3].empty()) {
      r.split = parse_split(f[3]);
      if (!r.split) throw Error(ErrorCode::ParseError, where + ": bad split '" + f[3] + "'");
    }
    for (int i = 0; i < kFeatureCount; ++i) {
      const std::string &text = f[4 + i];
      char *end = nullptr;
      r.features[i] = std::strtod(text.c_str(), &end);
      if (text.empty() || end != text.c_str() + text.size()) {
        throw Error(ErrorCode::ParseError, where + ": bad number '" + text + "'");
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<FeatureRow> load_feature_csv(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return parse_feature_csv(in, path.string());
}

std::vector<std::size_t> matching_rows(const std::vector<FeatureRow> &rows,
                                       const std::string &sensor, std::optional<Split> split) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto &r = rows[i];
    if (!r.label) continue;
    if (!sensor.empty() && r.sensor != sensor) continue;
    if (split && r.split != split) continue;
    out.push_back(i);
  }
  return out;
}

Dataset select_rows(const std::vector<FeatureRow> &rows, const std::string &sensor,
                    std::optional<Split> split) {
  Dataset d;
  for (std::size_t i : matching_rows(rows, sensor, split)) d.add(rows[i].features, *rows[i].label);
  return d;
}

} // namespace livqual
