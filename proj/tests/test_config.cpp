#include <doctest.h>

#include <fstream>

#include "fixtures.hpp"
#include "livqual/config.hpp"
#include "livqual/error.hpp"

using namespace livqual;

namespace {

ErrorCode parse_error(const std::string &text) {
  try {
    parse_config(text);
  } catch (const Error &e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

} // namespace

TEST_CASE("defaults are valid") {
  CHECK_NOTHROW(Config{}.validate());
}

TEST_CASE("config round trips through JSON") {
  Config c;
  c.block_size = 24;
  c.gabor.sigma = 3.25;
  c.gabor.segmentation_threshold = 0.75;
  c.spectrum.n_bands = 20;
  c.abrupt_change = 0.3;
  c.ridge.amplitude_min = 6.5;
  c.lda_epsilon_scale = 1e-8;
  CHECK(parse_config(dump_config(c)) == c);

  const auto dir = fixtures::temp_dir("config_roundtrip");
  save_config(dir / "c.json", c);
  CHECK(load_config(dir / "c.json") == c);
  CHECK(parse_config(dump_config(Config{})) == Config{});
}

TEST_CASE("missing keys keep their defaults") {
  const Config c = parse_config(R"({"block_size": 16, "ridge": {"variance_min": 10}})");
  Config expected;
  expected.block_size = 16;
  expected.ridge.variance_min = 10.0;
  CHECK(c == expected);
  CHECK(parse_config("{}") == Config{});
}

TEST_CASE("out-of-range values are rejected") {
  CHECK(parse_error(R"({"block_size": 4})") == ErrorCode::InvalidArgument);
  CHECK(parse_error(R"({"gabor": {"n_orientations": 2}})") == ErrorCode::InvalidArgument);
  CHECK(parse_error(R"({"gabor": {"frequency": 0.5}})") == ErrorCode::InvalidArgument);
  CHECK(parse_error(R"({"gabor": {"segmentation_threshold": -1}})") == ErrorCode::InvalidArgument);
  CHECK(parse_error(R"({"spectrum": {"f_min": 0.3, "f_max": 0.2}})") == ErrorCode::InvalidArgument);
  CHECK(parse_error(R"({"abrupt_change": 2.0})") == ErrorCode::InvalidArgument);
  CHECK(parse_error(R"({"ridge": {"unreliable_overlap": 1.5}})") == ErrorCode::InvalidArgument);
  CHECK(parse_error(R"({"ridge": {"frequency_min": 0.3}})") == ErrorCode::InvalidArgument);
  CHECK(parse_error(R"({"lda_epsilon_scale": -1e-6})") == ErrorCode::InvalidArgument);
}

TEST_CASE("malformed config text") {
  CHECK(parse_error("not json") == ErrorCode::ParseError);
  CHECK(parse_error("[1, 2]") == ErrorCode::ParseError);
  CHECK(parse_error(R"({"block_size": "big"})") == ErrorCode::ParseError);
  try {
    load_config("/nonexistent/c.json");
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
}
