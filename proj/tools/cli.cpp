#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "livqual/config.hpp"
#include "livqual/csv.hpp"
#include "livqual/error.hpp"
#include "livqual/evaluation.hpp"
#include "livqual/feature_table.hpp"
#include "livqual/image.hpp"
#include "livqual/lda.hpp"
#include "livqual/parallel.hpp"
#include "livqual/preprocessing.hpp"
#include "livqual/quality.hpp"
#include "livqual/selection.hpp"
#include "livqual/synth.hpp"

namespace fs = std::filesystem;

namespace livqual::cli {

namespace {

// Exit status of single-image classification.
constexpr int kExitReal = 0;
constexpr int kExitFake = 1;
constexpr int kExitError = 2;

std::string fmt(const char *pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string rate_text(const std::optional<double> &r) {
  return r ? fmt("%.2f", *r) : std::string("n/a");
}

std::optional<Split> split_option(const std::string &text) {
  if (text.empty() || text == "all") return std::nullopt;
  auto s = parse_split(text);
  if (!s) throw Error(ErrorCode::InvalidArgument, "unknown split '" + text + "'");
  return s;
}

Config resolve_config(const std::string &config_path, const std::string &model_path) {
  if (!config_path.empty() && !model_path.empty()) {
    throw Error(ErrorCode::InvalidArgument, "--config and --model are mutually exclusive");
  }
  if (!model_path.empty()) {
    const LdaModel model = load_model(model_path);
    if (!model.parameters().config) {
      throw Error(ErrorCode::MissingAttribute, "model " + model_path + " has no embedded config");
    }
    return *model.parameters().config;
  }
  if (!config_path.empty()) return load_config(config_path);
  return Config{};
}

FeatureMask resolve_mask(const std::string &subset_path, const std::string &mask_text) {
  if (!subset_path.empty() && !mask_text.empty()) {
    throw Error(ErrorCode::InvalidArgument, "--subset and --mask are mutually exclusive");
  }
  if (!subset_path.empty()) return load_subset(subset_path).mask;
  if (!mask_text.empty()) return FeatureMask::parse(mask_text);
  return FeatureMask();
}

std::vector<std::string> sensors_in(const std::vector<FeatureRow> &rows) {
  std::vector<std::string> out;
  for (const auto &r : rows)
    if (std::find(out.begin(), out.end(), r.sensor) == out.end()) out.push_back(r.sensor);
  return out;
}

// --- extract ---------------------------------------------------------------

struct ExtractOptions {
  std::string input;
  std::string manifest;
  std::string config;
  std::string model;
  std::string out;
  std::string sensor = "unknown";
  std::string debug_dir;
  int threads = 0;
};

struct ExtractJob {
  fs::path file;
  FeatureRow row;
};

bool is_image_file(const fs::path &p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".pgm";
}

std::vector<ExtractJob> collect_jobs(const ExtractOptions &o) {
  std::vector<ExtractJob> jobs;
  if (!o.manifest.empty()) {
    const DatasetManifest m = load_manifest(o.manifest);
    const fs::path base = fs::path(o.manifest).parent_path();
    for (const auto &r : m.rows) {
      ExtractJob j;
      const fs::path p(r.path);
      j.file = p.is_absolute() ? p : base / p;
      j.row.path = r.path;
      j.row.label = r.label;
      j.row.sensor = r.sensor;
      j.row.split = r.split;
      jobs.push_back(std::move(j));
    }
    return jobs;
  }
  const fs::path input(o.input);
  std::vector<fs::path> files;
  if (fs::is_directory(input)) {
    for (const auto &e : fs::directory_iterator(input))
      if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path());
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(input);
  }
  for (const auto &f : files) {
    ExtractJob j;
    j.file = f;
    j.row.path = f.string();
    j.row.sensor = o.sensor;
    jobs.push_back(std::move(j));
  }
  return jobs;
}

std::string debug_stem(const std::string &path) {
  std::string s = path;
  for (char &c : s)
    if (c == '/' || c == '\\' || c == ':') c = '_';
  const auto dot = s.find_last_of('.');
  return dot == std::string::npos ? s : s.substr(0, dot);
}

int cmd_extract(const ExtractOptions &o, std::ostream &out, std::ostream &err) {
  if (o.input.empty() == o.manifest.empty()) {
    throw Error(ErrorCode::InvalidArgument, "give exactly one of --input or --manifest");
  }
  const Config config = resolve_config(o.config, o.model);
  std::vector<ExtractJob> jobs = collect_jobs(o);
  if (jobs.empty()) throw Error(ErrorCode::InvalidArgument, "no input images");
  if (!o.debug_dir.empty()) fs::create_directories(o.debug_dir);

  std::vector<std::string> failures(jobs.size());
  std::vector<std::uint8_t> ok(jobs.size(), 0);
  parallel_for(jobs.size(), o.threads > 0 ? o.threads : default_thread_count(), [&](std::size_t i) {
    try {
      const GrayImage image = load_image(jobs[i].file);
      const QualityExtraction q = extract_quality_details(image, config);
      jobs[i].row.features = q.vector;
      if (!o.debug_dir.empty()) {
        const fs::path stem = fs::path(o.debug_dir) / debug_stem(jobs[i].row.path);
        save_mask(stem.string() + "_mask.pgm", q.mask);
        save_orientation_csv(stem.string() + "_orientation.csv", q.field);
      }
      ok[i] = 1;
    } catch (const std::exception &e) {
      failures[i] = e.what();
    }
  });

  std::vector<FeatureRow> rows;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (ok[i]) {
      rows.push_back(jobs[i].row);
    } else {
      err << "skip " << jobs[i].row.path << ": " << failures[i] << "\n";
    }
  }
  if (o.out.empty()) {
    write_feature_csv(out, rows);
  } else {
    save_feature_csv(o.out, rows);
  }
  err << "extracted " << rows.size() << " of " << jobs.size() << " images\n";
  return rows.empty() ? 1 : 0;
}

// --- select ----------------------------------------------------------------

struct SelectOptions {
  std::string features;
  std::string sensor;
  std::string split = "dev";
  std::string out;
  std::string ranking;
  std::string curve;
  std::string config;
  int threads = 0;
};

int cmd_select(const SelectOptions &o, std::ostream &out, std::ostream &) {
  const Config config = resolve_config(o.config, "");
  const auto rows = load_feature_csv(o.features);
  const Dataset dev = select_rows(rows, o.sensor, split_option(o.split));
  const SelectionResult r = exhaustive_select(dev, o.sensor, o.threads, config.lda_epsilon_scale);
  if (!o.out.empty()) save_subset(o.out, o.sensor, r.best);
  if (!o.ranking.empty()) save_ranking_csv(o.ranking, r.ranking);
  if (!o.curve.empty()) {
    const auto curve = best_by_cardinality(r.ranking);
    save_curve_csv(o.curve, curve);
  }
  out << "sensor " << o.sensor << ": best subset " << r.best.mask.to_string() << " (";
  bool first = true;
  for (int i : r.best.mask.indices()) {
    out << (first ? "" : " ") << kFeatureNames[i];
    first = false;
  }
  out << ") loo_ace " << fmt("%.2f", r.best.loo_ace) << " over " << dev.size() << " samples\n";
  return 0;
}

// --- train -----------------------------------------------------------------

struct TrainOptions {
  std::string features;
  std::string sensor;
  std::string split = "dev";
  std::string subset;
  std::string mask;
  std::string config;
  std::string out;
};

int cmd_train(const TrainOptions &o, std::ostream &out, std::ostream &) {
  const Config config = resolve_config(o.config, "");
  const FeatureMask mask = resolve_mask(o.subset, o.mask);
  if (mask.empty()) throw Error(ErrorCode::EmptyMask, "give --subset or --mask");
  const auto rows = load_feature_csv(o.features);
  const Dataset data = select_rows(rows, o.sensor, split_option(o.split));
  LdaModel model = fit_lda(data, mask, o.sensor, config.lda_epsilon_scale);
  model.set_config(config);
  save_model(o.out, model);
  out << "trained " << o.sensor << " model on " << data.size() << " samples, subset "
      << mask.to_string() << "\n";
  if (model.has_zero_variance_feature()) out << "warning: a selected feature is constant in training\n";
  return 0;
}

// --- classify --------------------------------------------------------------

struct ClassifyOptions {
  std::string model;
  std::string image;
  std::string features;
  std::string out;
};

void write_decisions_header(std::ostream &o) { o << "path,decision,score,truth\n"; }

int cmd_classify(const ClassifyOptions &o, std::ostream &out, std::ostream &err) {
  if (o.image.empty() == o.features.empty()) {
    throw Error(ErrorCode::InvalidArgument, "give exactly one of --image or --features");
  }
  if (!o.image.empty()) {
    try {
      const LdaModel model = load_model(o.model);
      const Config config = model.parameters().config.value_or(Config{});
      const GrayImage image = load_image(o.image);
      const LivenessDecision d = model.classify(extract_quality_vector(image, config));
      out << o.image << ' ' << to_string(d.label) << ' ' << format_csv_double(d.score) << "\n";
      return d.label == Label::real ? kExitReal : kExitFake;
    } catch (const std::exception &e) {
      err << "error: " << e.what() << "\n";
      return kExitError;
    }
  }
  const LdaModel model = load_model(o.model);
  const auto rows = load_feature_csv(o.features);
  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out);
    if (!file) throw Error(ErrorCode::IoError, "cannot write " + o.out);
    write_decisions_header(file);
  }
  for (const auto &r : rows) {
    const LivenessDecision d = model.classify(r.features);
    out << r.path << ' ' << to_string(d.label) << ' ' << format_csv_double(d.score) << "\n";
    if (file.is_open()) {
      file << r.path << ',' << to_string(d.label) << ',' << format_csv_double(d.score) << ','
           << (r.label ? to_string(*r.label) : "") << "\n";
    }
  }
  return 0;
}

// --- evaluate --------------------------------------------------------------

struct EvaluateOptions {
  std::string decisions;
  std::string model;
  std::string features;
  std::string sensor;
  std::string split;
  std::string out;
};

void read_decisions(const std::string &path, std::vector<Label> &decisions,
                    std::vector<Label> &truth) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, path + ": empty file");
  const auto header = split_csv_line(line);
  auto column = [&](const std::string &name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::ParseError, path + ": missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t dcol = column("decision");
  const std::size_t tcol = column("truth");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    const std::string where = path + ":" + std::to_string(lineno);
    if (f.size() != header.size()) throw Error(ErrorCode::ParseError, where + ": wrong field count");
    const auto d = parse_label(f[dcol]);
    const auto t = parse_label(f[tcol]);
    if (!d || !t) throw Error(ErrorCode::ParseError, where + ": bad label");
    decisions.push_back(*d);
    truth.push_back(*t);
  }
}

int cmd_evaluate(const EvaluateOptions &o, std::ostream &out, std::ostream &) {
  std::vector<Label> decisions, truth;
  if (!o.decisions.empty()) {
    if (!o.model.empty() || !o.features.empty()) {
      throw Error(ErrorCode::InvalidArgument, "--decisions excludes --model/--features");
    }
    read_decisions(o.decisions, decisions, truth);
  } else {
    if (o.model.empty() || o.features.empty()) {
      throw Error(ErrorCode::InvalidArgument, "give --decisions or both --model and --features");
    }
    const LdaModel model = load_model(o.model);
    const auto rows = load_feature_csv(o.features);
    for (std::size_t i : matching_rows(rows, o.sensor, split_option(o.split))) {
      decisions.push_back(model.classify(rows[i].features).label);
      truth.push_back(*rows[i].label);
    }
  }
  const EvaluationReport r = compute_rates(decisions, truth);
  out << "samples " << r.total() << "  FLR " << rate_text(r.flr) << "  FFR " << rate_text(r.ffr)
      << "  ACE " << rate_text(r.ace) << "\n";
  if (!o.out.empty()) {
    std::ofstream f(o.out);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + o.out);
    auto cell = [](const std::optional<double> &v) { return v ? format_csv_double(*v) : std::string(); };
    f << "flr,ffr,ace\n" << cell(r.flr) << ',' << cell(r.ffr) << ',' << cell(r.ace) << "\n";
  }
  return 0;
}

// --- crossval --------------------------------------------------------------

struct CrossvalOptions {
  std::string features;
  std::vector<std::string> sensors;
  std::string subset;
  std::string mask;
  std::string config;
  std::string out;
  std::string manifest;
  std::string group_by;
  int threads = 0;
};

void print_groups(std::ostream &out, const std::string &stage, const std::vector<GroupReport> &groups) {
  for (const auto &g : groups) {
    out << "  stage " << stage << "  " << g.group << " (" << g.fakes << " fakes)  FLR "
        << rate_text(g.report.flr) << "  FFR " << rate_text(g.report.ffr) << "  ACE "
        << rate_text(g.report.ace) << "\n";
  }
}

int cmd_crossval(const CrossvalOptions &o, std::ostream &out, std::ostream &err) {
  const Config config = resolve_config(o.config, "");
  const FeatureMask fixed_mask = resolve_mask(o.subset, o.mask);
  const auto rows = load_feature_csv(o.features);
  const std::vector<std::string> sensors = o.sensors.empty() ? sensors_in(rows) : o.sensors;

  std::optional<GroupBy> group_by;
  std::map<std::string, std::optional<std::string>> attribute_of;
  if (!o.group_by.empty()) {
    if (o.group_by == "material") group_by = GroupBy::material;
    else if (o.group_by == "procedure") group_by = GroupBy::procedure;
    else throw Error(ErrorCode::InvalidArgument, "unknown --group-by '" + o.group_by + "'");
    if (o.manifest.empty()) throw Error(ErrorCode::InvalidArgument, "--group-by needs --manifest");
    for (const auto &r : load_manifest(o.manifest).rows) {
      std::optional<std::string> a;
      if (*group_by == GroupBy::material && r.material) a = std::string(to_string(*r.material));
      if (*group_by == GroupBy::procedure && r.procedure) a = std::string(to_string(*r.procedure));
      attribute_of[r.path] = a;
    }
  }

  std::ofstream csv;
  if (!o.out.empty()) {
    csv.open(o.out);
    if (!csv) throw Error(ErrorCode::IoError, "cannot write " + o.out);
  }
  bool header = true;
  for (const auto &sensor : sensors) {
    const auto dev_idx = matching_rows(rows, sensor, Split::dev);
    const auto test_idx = matching_rows(rows, sensor, Split::test);
    const Dataset dev = select_rows(rows, sensor, Split::dev);
    const Dataset test = select_rows(rows, sensor, Split::test);
    FeatureMask mask = fixed_mask;
    if (mask.empty()) {
      mask = exhaustive_select(dev, sensor, o.threads, config.lda_epsilon_scale).best.mask;
    }
    const CrossValRun run = cross_validate_detailed(dev, test, mask, sensor, config.lda_epsilon_scale);
    out << format_crossval(sensor, run.report);
    out << "  subset " << mask.to_string() << "\n";
    if (csv.is_open()) {
      write_crossval_csv(csv, sensor, run.report, header);
      header = false;
    }
    if (group_by) {
      auto breakdown = [&](const std::vector<std::size_t> &idx,
                           const std::vector<LivenessDecision> &decided, const Dataset &data,
                           const std::string &stage) {
        std::vector<Label> labels;
        std::vector<std::optional<std::string>> attrs;
        for (std::size_t k = 0; k < idx.size(); ++k) {
          labels.push_back(decided[k].label);
          const auto it = attribute_of.find(rows[idx[k]].path);
          attrs.push_back(it == attribute_of.end() ? std::nullopt : it->second);
        }
        std::vector<std::string> warnings;
        const auto groups = breakdown_report(labels, data.labels, attrs, *group_by, &warnings);
        for (const auto &w : warnings) err << "warning: " << sensor << " stage " << stage << ": " << w << "\n";
        print_groups(out, stage, groups);
      };
      breakdown(test_idx, run.test_decisions, test, "1");
      breakdown(dev_idx, run.dev_decisions, dev, "2");
    }
  }
  return 0;
}

// --- synth / summary ---------------------------------------------------------

int cmd_synth(const CorpusOptions &o, const std::string &dir, std::ostream &out) {
  const DatasetManifest m = make_liveness_corpus(o, dir);
  out << "wrote " << m.rows.size() << " images to " << dir << "\n" << format_summary(m);
  return 0;
}

int cmd_summary(const std::string &manifest, std::ostream &out) {
  out << format_summary(load_manifest(manifest));
  return 0;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Fingerprint liveness detection from image quality measures", "livqual"};
  app.require_subcommand(1);

  ExtractOptions ext;
  auto *extract = app.add_subcommand("extract", "Compute the ten quality measures per image");
  extract->add_option("--input", ext.input, "Image file or directory of .png/.pgm images");
  extract->add_option("--manifest", ext.manifest, "Dataset manifest CSV");
  extract->add_option("--config", ext.config, "Extraction config (JSON)");
  extract->add_option("--model", ext.model, "Use the config embedded in this model");
  extract->add_option("--sensor", ext.sensor, "Sensor name for --input mode");
  extract->add_option("--out", ext.out, "Feature CSV (stdout when omitted)");
  extract->add_option("--debug-dir", ext.debug_dir, "Write masks and orientation fields here");
  extract->add_option("--threads", ext.threads, "Worker threads (default LIVQUAL_THREADS or all cores)");

  SelectOptions sel;
  auto *select = app.add_subcommand("select", "Exhaustive leave-one-out feature subset search");
  select->add_option("--dev,--features", sel.features, "Feature CSV")->required();
  select->add_option("--sensor", sel.sensor, "Sensor to select for")->required();
  select->add_option("--split", sel.split, "Split to search on (dev, test or all)");
  select->add_option("--out", sel.out, "Best subset (JSON)");
  select->add_option("--ranking", sel.ranking, "Ranking of all 1023 subsets (CSV)");
  select->add_option("--curve", sel.curve, "Best ACE per subset size (CSV)");
  select->add_option("--config", sel.config, "Config providing the LDA regularization");
  select->add_option("--threads", sel.threads, "Worker threads");

  TrainOptions tr;
  auto *train = app.add_subcommand("train", "Fit the per-sensor LDA model");
  train->add_option("--features", tr.features, "Feature CSV")->required();
  train->add_option("--sensor", tr.sensor, "Sensor")->required();
  train->add_option("--split", tr.split, "Training split (dev, test or all)");
  train->add_option("--subset", tr.subset, "Subset JSON from select");
  train->add_option("--mask", tr.mask, "Subset as a 10-character bit string");
  train->add_option("--config", tr.config, "Extraction config to embed in the model");
  train->add_option("--out", tr.out, "Model file (JSON)")->required();

  ClassifyOptions cl;
  auto *classify = app.add_subcommand("classify", "Classify an image or a feature CSV");
  classify->add_option("--model", cl.model, "Model file")->required();
  classify->add_option("--image", cl.image, "Single image; exit 0 real, 1 fake, 2 error");
  classify->add_option("--features", cl.features, "Feature CSV");
  classify->add_option("--out", cl.out, "Decisions CSV: path,decision,score,truth");

  EvaluateOptions ev;
  auto *evaluate = app.add_subcommand("evaluate", "FLR, FFR and ACE of a set of decisions");
  evaluate->add_option("--decisions", ev.decisions, "Decisions CSV with decision and truth columns");
  evaluate->add_option("--model", ev.model, "Model file");
  evaluate->add_option("--features", ev.features, "Feature CSV");
  evaluate->add_option("--sensor", ev.sensor, "Restrict to one sensor");
  evaluate->add_option("--split", ev.split, "Restrict to one split");
  evaluate->add_option("--out", ev.out, "Rates CSV");

  CrossvalOptions cv;
  auto *crossval = app.add_subcommand("crossval", "Two-stage dev/test cross-validation per sensor");
  crossval->add_option("--features", cv.features, "Feature CSV")->required();
  crossval->add_option("--sensor", cv.sensors, "Sensor (repeatable; default all)");
  crossval->add_option("--subset", cv.subset, "Fixed subset JSON (default: select on dev)");
  crossval->add_option("--mask", cv.mask, "Fixed subset bit string");
  crossval->add_option("--config", cv.config, "Config providing the LDA regularization");
  crossval->add_option("--out", cv.out, "CSV: sensor,stage,flr,ffr,ace");
  crossval->add_option("--manifest", cv.manifest, "Manifest with material/procedure columns");
  crossval->add_option("--group-by", cv.group_by, "material or procedure");
  crossval->add_option("--threads", cv.threads, "Worker threads for selection");

  CorpusOptions co;
  std::string synth_dir;
  auto *synth = app.add_subcommand("synth", "Write a synthetic real/fake corpus");
  synth->add_option("--n-per-class", co.n_per_class, "Images per class (>= 10)");
  synth->add_option("--seed", co.seed, "Corpus seed");
  synth->add_option("--size", co.size, "Image side in pixels");
  synth->add_option("--sensor", co.sensor, "Sensor name in the manifest");
  synth->add_option("--out", synth_dir, "Output directory")->required();

  std::string summary_manifest;
  auto *summary = app.add_subcommand("summary", "Per-sensor split and class counts of a manifest");
  summary->add_option("--manifest", summary_manifest, "Manifest CSV")->required();

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.push_back("livqual");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char *> argv;
  for (auto &a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError &e) {
    return app.exit(e, out, err);
  }

  try {
    if (*extract) return cmd_extract(ext, out, err);
    if (*select) return cmd_select(sel, out, err);
    if (*train) return cmd_train(tr, out, err);
    if (*classify) return cmd_classify(cl, out, err);
    if (*evaluate) return cmd_evaluate(ev, out, err);
    if (*crossval) return cmd_crossval(cv, out, err);
    if (*synth) return cmd_synth(co, synth_dir, out);
    if (*summary) return cmd_summary(summary_manifest, out);
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

int run(int argc, char **argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

} // namespace livqual::cli
