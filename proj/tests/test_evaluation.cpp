#include <doctest.h>

#include <algorithm>
#include <functional>
#include <sstream>

#include "fixtures.hpp"
#include "livqual/error.hpp"
#include "livqual/evaluation.hpp"
#include "oracles.hpp"

using namespace livqual;

namespace {

ErrorCode code_of(const std::function<void()> &f) {
  try {
    f();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

DatasetManifest parse(const std::string &text) {
  std::istringstream in(text);
  return parse_manifest(in);
}

// Decisions with `fake_wrong` of `fakes` and `real_wrong` of `reals` misclassified.
void append(std::vector<Label> &d, std::vector<Label> &t, std::size_t reals,
            std::size_t real_wrong, std::size_t fakes, std::size_t fake_wrong) {
  for (std::size_t i = 0; i < reals; ++i) {
    t.push_back(Label::real);
    d.push_back(i < real_wrong ? Label::fake : Label::real);
  }
  for (std::size_t i = 0; i < fakes; ++i) {
    t.push_back(Label::fake);
    d.push_back(i < fake_wrong ? Label::real : Label::fake);
  }
}

QualityVector one(double v) {
  QualityVector q;
  q[0] = v;
  return q;
}

void fill(Dataset &d, Label l, int n, double v) {
  for (int i = 0; i < n; ++i) d.add(one(v), l);
}

// One-feature sets built so that a model fit on either set misclassifies
// exactly the outlying samples of the other.
Dataset identix_dev() {
  Dataset d;
  fill(d, Label::real, 910, 1.0);
  fill(d, Label::real, 90, 0.3);
  fill(d, Label::fake, 920, 0.0);
  fill(d, Label::fake, 80, 0.7);
  return d;
}

Dataset identix_test() {
  Dataset d;
  fill(d, Label::real, 950, 0.9);
  fill(d, Label::real, 50, 0.2);
  fill(d, Label::fake, 952, 0.1);
  fill(d, Label::fake, 48, 0.8);
  return d;
}

std::vector<Label> oracle_decisions(const Dataset &train, const Dataset &eval) {
  oracles::Rows x;
  for (const auto &q : train.features) x.push_back({q[0]});
  const oracles::NaiveLda m = oracles::naive_fit(x, train.labels);
  std::vector<Label> out;
  for (const auto &q : eval.features) out.push_back(m.score({q[0]}) > 0.0 ? Label::real : Label::fake);
  return out;
}

} // namespace

TEST_CASE("manifest mirroring a LivDet development set") {
  std::ostringstream text;
  text << "path,label,sensor,split,material\n";
  for (int i = 0; i < 1000; ++i) text << "cm/real_" << i << ".png,real,CrossMatch,dev,\n";
  const char *materials[] = {"silicone", "gelatin", "playdoh"};
  const int counts[] = {310, 344, 346};
  int k = 0;
  for (int m = 0; m < 3; ++m)
    for (int i = 0; i < counts[m]; ++i) text << "cm/fake_" << k++ << ".png,fake,CrossMatch,dev," << materials[m] << '\n';
  const DatasetManifest man = parse(text.str());
  REQUIRE(man.sensors == std::vector<std::string>{"CrossMatch"});
  const auto summary = summarize(man);
  REQUIRE(summary.size() == 4);
  CHECK(summary[0].split == Split::dev);
  CHECK(summary[0].label == Label::real);
  CHECK(summary[0].count == 1000);
  CHECK(summary[1].label == Label::fake);
  CHECK(summary[1].count == 1000);
  CHECK(summary[1].silicone == 310);
  CHECK(summary[1].gelatin == 344);
  CHECK(summary[1].playdoh == 346);
  CHECK(summary[2].count == 0);
  CHECK(format_summary(man).find("CrossMatch dev fake: 1000 (310s+344g+346p)") != std::string::npos);
}

TEST_CASE("manifest mirroring an ATVS development set") {
  std::ostringstream text;
  text << "# sensors=Precise\npath,label,sensor,split,material,procedure\n";
  for (int i = 0; i < 255; ++i) text << "p/r" << i << ".bmp,real,Precise,dev,-,-\n";
  for (int i = 0; i < 255; ++i)
    text << "p/f" << i << ".bmp,fake,Precise,dev,silicone," << (i < 127 ? "cooperative" : "non-cooperative") << '\n';
  const auto summary = summarize(parse(text.str()));
  CHECK(summary[0].count == 255);
  CHECK(summary[1].count == 255);
  CHECK(summary[1].cooperative == 127);
  CHECK(summary[1].non_cooperative == 128);
  CHECK(summary[0].cooperative + summary[0].non_cooperative == 0);
}

TEST_CASE("manifest errors") {
  CHECK(code_of([] { parse(""); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse("path,label,sensor,split\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse("path,label,sensor,split\na,real,s,dev\na,fake,s,test\n"); }) ==
        ErrorCode::ParseError);
  CHECK(code_of([] { parse("path,label,sensor,split\na,alive,s,dev\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse("path,label,sensor,split\na,real,s,train\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse("path,label,sensor,split,material\na,fake,s,dev,latex\n"); }) ==
        ErrorCode::ParseError);
  CHECK(code_of([] { parse("path,label,sensor,split\na,real,s\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse("# sensors=x;y\npath,label,sensor,split\na,real,z,dev\n"); }) ==
        ErrorCode::ParseError);
  CHECK(code_of([] { load_manifest("/nonexistent/manifest.csv"); }) == ErrorCode::IoError);
}

TEST_CASE("manifest save and load round trip") {
  const auto dir = fixtures::temp_dir("manifest_roundtrip");
  const DatasetManifest m = parse("# sensors=a;b\npath,label,sensor,split,material,procedure\n"
                                  "x.png,real,a,dev,,\ny.png,fake,b,test,gelatin,cooperative\n");
  save_manifest(dir / "m.csv", m);
  const DatasetManifest r = load_manifest(dir / "m.csv");
  CHECK(r.sensors == m.sensors);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[1].material == Material::gelatin);
  CHECK(r.rows[1].procedure == Procedure::cooperative);
  CHECK_FALSE(r.rows[0].material.has_value());
  CHECK(r.rows[1].split == Split::test);
}

TEST_CASE("Identix stage one rates") {
  std::vector<Label> d, t;
  append(d, t, 1000, 50, 1000, 48);
  const EvaluationReport r = compute_rates(d, t);
  CHECK(r.flr == 4.8);
  CHECK(r.ffr == 5.0);
  CHECK(r.ace == 4.9);
  CHECK(r.real_as_fake == 50);
  CHECK(r.fake_as_real == 48);
  CHECK(r.total() == 2000);
}

TEST_CASE("degenerate rate examples") {
  std::vector<Label> d, t;
  append(d, t, 20, 0, 30, 0);
  EvaluationReport r = compute_rates(d, t);
  CHECK(r.flr == 0.0);
  CHECK(r.ffr == 0.0);
  CHECK(r.ace == 0.0);

  d.clear();
  t.clear();
  append(d, t, 20, 0, 30, 30);
  r = compute_rates(d, t);
  CHECK(r.flr == 100.0);
  CHECK(r.ffr == 0.0);
  CHECK(r.ace == 50.0);
}

TEST_CASE("rates are invariant to sample order and satisfy the ACE identity") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Label> d, t;
    const std::size_t reals = 1 + rng.next() % 200, fakes = 1 + rng.next() % 200;
    append(d, t, reals, rng.next() % (reals + 1), fakes, rng.next() % (fakes + 1));
    const EvaluationReport a = compute_rates(d, t);
    REQUIRE(a.complete());
    CHECK(std::fabs(*a.ace - 0.5 * (*a.flr + *a.ffr)) <= 1e-12);
    CHECK(*a.flr >= 0.0);
    CHECK(*a.flr <= 100.0);
    CHECK(*a.ffr >= 0.0);
    CHECK(*a.ffr <= 100.0);
    CHECK(a.total() == d.size());
    std::vector<std::size_t> idx(d.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.next() % i]);
    std::vector<Label> pd, pt;
    for (std::size_t i : idx) {
      pd.push_back(d[i]);
      pt.push_back(t[i]);
    }
    const EvaluationReport b = compute_rates(pd, pt);
    CHECK(b.flr == a.flr);
    CHECK(b.ffr == a.ffr);
    CHECK(b.ace == a.ace);
  }
}

TEST_CASE("rate errors and partial reports") {
  const std::vector<Label> two{Label::real, Label::fake};
  const std::vector<Label> three{Label::real, Label::fake, Label::fake};
  CHECK(code_of([&] { compute_rates(two, three); }) == ErrorCode::LengthMismatch);
  CHECK(code_of([] { compute_rates({}, {}); }) == ErrorCode::InvalidArgument);

  const std::vector<Label> reals{Label::real, Label::fake, Label::real, Label::real};
  const std::vector<Label> truth(4, Label::real);
  const EvaluationReport r = compute_rates(reals, truth);
  CHECK_FALSE(r.flr.has_value());
  CHECK(r.ffr == 25.0);
  CHECK_FALSE(r.ace.has_value());
  CHECK_FALSE(r.complete());
  CHECK(code_of([&] { combine_stages(r, r); }) == ErrorCode::SingleClassInput);
}

TEST_CASE("Identix cross-validation arithmetic") {
  std::vector<Label> d1, t1, d2, t2;
  append(d1, t1, 1000, 50, 1000, 48);
  append(d2, t2, 1000, 90, 1000, 80);
  const CrossValReport c = combine_stages(compute_rates(d1, t1), compute_rates(d2, t2));
  CHECK(c.ace1 == 4.9);
  CHECK(c.flr2 == 8.0);
  CHECK(c.ffr2 == 9.0);
  CHECK(c.ace2 == 8.5);
  CHECK(c.final_ace == 6.7);
}

TEST_CASE("cross_validate on prepared one-feature sets") {
  const Dataset dev = identix_dev(), test = identix_test();
  const CrossValRun run = cross_validate_detailed(dev, test, FeatureMask::parse("1000000000"), "Identix");
  std::vector<Label> stage1, stage2;
  for (const auto &x : run.test_decisions) stage1.push_back(x.label);
  for (const auto &x : run.dev_decisions) stage2.push_back(x.label);
  CHECK(stage1 == oracle_decisions(dev, test));
  CHECK(stage2 == oracle_decisions(test, dev));
  const CrossValReport &c = run.report;
  CHECK(c.flr1 == 4.8);
  CHECK(c.ffr1 == 5.0);
  CHECK(c.ace1 == 4.9);
  CHECK(c.flr2 == 8.0);
  CHECK(c.ffr2 == 9.0);
  CHECK(c.ace2 == 8.5);
  CHECK(c.final_ace == 6.7);
  CHECK(format_crossval("Identix", c).find("ACE1/ACE2 4.9/8.5  ACE 6.7") != std::string::npos);

  std::ostringstream csv;
  write_crossval_csv(csv, "Identix", c);
  CHECK(csv.str() == "sensor,stage,flr,ffr,ace\nIdentix,1,4.8,5,4.9\nIdentix,2,8,9,8.5\n"
                     "Identix,final,6.4,7,6.7\n");
}

TEST_CASE("cross-validation symmetry") {
  SplitMix64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    Dataset a, b;
    for (int i = 0; i < 40; ++i) {
      QualityVector q, r;
      for (int k = 0; k < 10; ++k) {
        q[k] = rng.normal();
        r[k] = rng.normal();
      }
      const Label l = i % 2 ? Label::real : Label::fake;
      if (l == Label::real) {
        q[1] += 1.0;
        r[1] += 1.0;
      }
      a.add(q, l);
      b.add(r, l);
    }
    const FeatureMask m = FeatureMask::parse("0110010000");
    const CrossValReport ab = cross_validate(a, b, m, "s");
    const CrossValReport ba = cross_validate(b, a, m, "s");
    CHECK(ab.ace1 == ba.ace2);
    CHECK(ab.flr1 == ba.flr2);
    CHECK(ab.ffr1 == ba.ffr2);
    CHECK(ab.ace2 == ba.ace1);
    CHECK(ab.flr2 == ba.flr1);
    CHECK(ab.ffr2 == ba.ffr1);
    CHECK(ab.final_ace == ba.final_ace);
    CHECK(ab.final_ace == 0.5 * (ab.ace1 + ab.ace2));

    const CrossValReport aa = cross_validate(a, a, m, "s");
    CHECK(aa.ace1 == aa.ace2);
    CHECK(aa.final_ace == aa.ace1);
  }
}

TEST_CASE("cross-validation needs both classes") {
  Dataset dev = identix_dev(), single;
  fill(single, Label::real, 5, 1.0);
  CHECK(code_of([&] { cross_validate(dev, single, FeatureMask::parse("1000000000"), "s"); }) ==
        ErrorCode::SingleClassInput);
  CHECK(code_of([&] { cross_validate(single, dev, FeatureMask::parse("1000000000"), "s"); }) ==
        ErrorCode::SingleClassInput);
}

TEST_CASE("breakdown by material shares the real samples") {
  std::vector<Label> d, t;
  std::vector<std::optional<std::string>> attr;
  // 10 reals (2 wrong), 10 silicone (1 wrong), 20 gelatin (5 wrong), no playdoh.
  append(d, t, 10, 2, 0, 0);
  attr.resize(10);
  append(d, t, 0, 0, 10, 1);
  attr.resize(20, "silicone");
  append(d, t, 0, 0, 20, 5);
  attr.resize(40, "gelatin");

  std::vector<std::string> warnings;
  const auto groups = breakdown_report(d, t, attr, GroupBy::material, &warnings);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].group == "silicone");
  CHECK(groups[0].report.flr == 10.0);
  CHECK(groups[0].report.ffr == 20.0);
  CHECK(groups[0].report.ace == 15.0);
  CHECK(groups[1].group == "gelatin");
  CHECK(groups[1].report.flr == 25.0);
  CHECK(groups[1].report.ffr == 20.0);
  CHECK(groups[0].fakes + groups[1].fakes == 30);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("playdoh") != std::string::npos);
}

TEST_CASE("breakdown group counts partition the fakes") {
  SplitMix64 rng(8);
  const char *names[] = {"cooperative", "non-cooperative"};
  std::vector<Label> d, t;
  std::vector<std::optional<std::string>> attr;
  std::size_t fakes = 0;
  for (int i = 0; i < 500; ++i) {
    const bool fake = rng.uniform() < 0.5;
    t.push_back(fake ? Label::fake : Label::real);
    d.push_back(rng.uniform() < 0.5 ? Label::fake : Label::real);
    attr.push_back(fake ? std::optional<std::string>(names[rng.next() % 2]) : std::nullopt);
    fakes += fake;
  }
  const auto groups = breakdown_report(d, t, attr, GroupBy::procedure);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].fakes + groups[1].fakes == fakes);
  CHECK(groups[0].report.ffr == groups[1].report.ffr);
}

TEST_CASE("breakdown errors") {
  const std::vector<Label> t{Label::real, Label::fake};
  const std::vector<Label> d{Label::real, Label::real};
  const std::vector<std::optional<std::string>> missing{std::nullopt, std::nullopt};
  CHECK(code_of([&] { breakdown_report(d, t, missing, GroupBy::material); }) ==
        ErrorCode::MissingAttribute);
  const std::vector<std::optional<std::string>> wrong{std::nullopt, std::string("silicone")};
  CHECK(code_of([&] { breakdown_report(d, t, wrong, GroupBy::procedure); }) ==
        ErrorCode::MissingAttribute);
  const std::vector<std::optional<std::string>> short_attr{std::nullopt};
  CHECK(code_of([&] { breakdown_report(d, t, short_attr, GroupBy::material); }) ==
        ErrorCode::LengthMismatch);
}
