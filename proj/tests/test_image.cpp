#include <doctest.h>

#include <fstream>

#include "fixtures.hpp"
#include "livqual/error.hpp"
#include "livqual/image.hpp"

using namespace livqual;

namespace {

void write_bytes(const std::filesystem::path &p, const std::string &bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

std::string pgm(int w, int h, int maxval, std::uint8_t fill, const std::string &comment = "") {
  std::string s = "P5\n" + comment + std::to_string(w) + " " + std::to_string(h) + "\n" +
                  std::to_string(maxval) + "\n";
  s.append(static_cast<std::size_t>(w) * h, static_cast<char>(fill));
  return s;
}

ErrorCode code_of(const std::function<void()> &f) {
  try {
    f();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

} // namespace

TEST_CASE("gray image validates its size") {
  CHECK(code_of([] { GrayImage(31, 64, std::uint8_t{0}); }) == ErrorCode::ImageTooSmall);
  CHECK(code_of([] { GrayImage(64, 64, std::vector<std::uint8_t>(10)); }) ==
        ErrorCode::InvalidArgument);
  const GrayImage img(40, 33, std::uint8_t{7});
  CHECK(img.pixels().size() == 40u * 33u);
  CHECK(img.dpi() == 500.0);
}

TEST_CASE("PGM loading") {
  const auto dir = fixtures::temp_dir("pgm");

  SUBCASE("4x4 image is rejected as too small") {
    write_bytes(dir / "tiny.pgm", pgm(4, 4, 255, 128));
    CHECK(code_of([&] { load_image(dir / "tiny.pgm"); }) == ErrorCode::ImageTooSmall);
  }
  SUBCASE("256x256 zeros read exactly") {
    write_bytes(dir / "zeros.pgm", pgm(256, 256, 255, 0));
    const GrayImage img = load_image(dir / "zeros.pgm");
    CHECK(img.width() == 256);
    CHECK(img.height() == 256);
    REQUIRE(img.pixels().size() == 65536u);
    CHECK(std::all_of(img.pixels().begin(), img.pixels().end(), [](auto v) { return v == 0; }));
    CHECK(img.dpi() == 500.0);
  }
  SUBCASE("dpi comment is honoured") {
    write_bytes(dir / "dpi.pgm", pgm(40, 40, 255, 3, "# dpi 569\n"));
    CHECK(load_image(dir / "dpi.pgm").dpi() == 569.0);
  }
  SUBCASE("16-bit PGM is unsupported") {
    write_bytes(dir / "deep.pgm", pgm(40, 40, 65535, 0) + std::string(1600, '\0'));
    CHECK(code_of([&] { load_image(dir / "deep.pgm"); }) == ErrorCode::UnsupportedFormat);
  }
  SUBCASE("ASCII PGM and truncated data are rejected") {
    write_bytes(dir / "ascii.pgm", "P2\n40 40\n255\n0 0 0\n");
    CHECK(code_of([&] { load_image(dir / "ascii.pgm"); }) == ErrorCode::UnsupportedFormat);
    std::string cut = pgm(40, 40, 255, 9);
    cut.resize(cut.size() - 10);
    write_bytes(dir / "cut.pgm", cut);
    CHECK_THROWS_AS(load_image(dir / "cut.pgm"), Error);
  }
  SUBCASE("missing file") {
    CHECK(code_of([&] { load_image(dir / "absent.pgm"); }) == ErrorCode::IoError);
  }
}

TEST_CASE("save/load round trip is bit-identical") {
  const auto dir = fixtures::temp_dir("roundtrip");
  SplitMix64 rng(2024);
  for (int i = 0; i < 100; ++i) {
    const int w = 32 + static_cast<int>(rng.next() % 97);
    const int h = 32 + static_cast<int>(rng.next() % 97);
    const GrayImage img = fixtures::uniform_noise(w, h, rng.next());
    const auto path = dir / (i % 2 ? "img.png" : "img.pgm");
    save_image(path, img);
    const GrayImage back = load_image(path);
    REQUIRE(back.width() == w);
    REQUIRE(back.height() == h);
    CHECK(std::equal(back.pixels().begin(), back.pixels().end(), img.pixels().begin()));
  }
}

TEST_CASE("PNG keeps the resolution") {
  const auto dir = fixtures::temp_dir("png_dpi");
  const GrayImage img(48, 40, std::vector<std::uint8_t>(48 * 40, 17), 686.0);
  save_image(dir / "a.png", img);
  const GrayImage back = load_image(dir / "a.png");
  CHECK(back.dpi() == doctest::Approx(686.0).epsilon(1e-3));
  save_image(dir / "a.pgm", img);
  CHECK(load_image(dir / "a.pgm").dpi() == 686.0);
}

TEST_CASE("block partition") {
  CHECK(block_partition(256, 256, 32) == BlockGrid{32, 8, 8});
  CHECK(block_partition(300, 256, 32) == BlockGrid{32, 9, 8});
  CHECK_THROWS_AS(block_partition(64, 64, 7), Error);
  CHECK_THROWS_AS(block_partition(64, 40, 41), Error);

  SplitMix64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const int w = 32 + static_cast<int>(rng.next() % 900);
    const int h = 32 + static_cast<int>(rng.next() % 900);
    const int b = 8 + static_cast<int>(rng.next() % (std::min(w, h) - 7));
    const BlockGrid g = block_partition(w, h, b);
    CHECK(g.cols == w / b);
    CHECK(g.rows == h / b);
    // Blocks tile the covered region exactly once.
    std::size_t area = 0;
    for (int k = 0; k < g.count(); ++k) {
      const Block blk = g.block(k);
      CHECK(blk.x0 + blk.size <= w);
      CHECK(blk.y0 + blk.size <= h);
      area += static_cast<std::size_t>(blk.size) * blk.size;
    }
    CHECK(area == static_cast<std::size_t>(g.covered_width()) * g.covered_height());
  }
}

TEST_CASE("mask block flags follow the 50% rule") {
  const BlockGrid g = block_partition(64, 64, 32);
  std::vector<std::uint8_t> px(64 * 64, 0);
  // Exactly half of block (0,0), one pixel short of half in block (1,0).
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 32; ++x) px[y * 64 + x] = 1;
  for (int i = 0; i < 511; ++i) px[(i / 32) * 64 + 32 + i % 32] = 1;
  const Mask m = Mask::from_pixels(64, 64, px, g);
  CHECK(m.block(0, 0));
  CHECK_FALSE(m.block(1, 0));
  CHECK(m.foreground_blocks() == 1);
  CHECK(m.foreground_pixels() == 512u + 511u);
}

TEST_CASE("mask derivation is idempotent and monotone") {
  SplitMix64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const int w = 64 + static_cast<int>(rng.next() % 64);
    const int h = 64 + static_cast<int>(rng.next() % 64);
    const BlockGrid g = block_partition(w, h, 16);
    std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h);
    const double p = rng.uniform();
    for (auto &v : px) v = rng.uniform() < p;
    const Mask m = Mask::from_pixels(w, h, px, g);

    const Mask again = Mask::from_pixels(w, h, {m.pixel_flags().begin(), m.pixel_flags().end()}, g);
    CHECK(std::equal(m.block_flags().begin(), m.block_flags().end(), again.block_flags().begin()));

    auto more = px;
    for (auto &v : more)
      if (rng.uniform() < 0.2) v = 1;
    const Mask grown = Mask::from_pixels(w, h, more, g);
    for (int b = 0; b < g.count(); ++b)
      if (m.block(b)) CHECK(grown.block(b));

    if (!m.empty()) {
      const auto c = m.centroid();
      REQUIRE(c.has_value());
      CHECK(c->x >= 0.0);
      CHECK(c->x <= w - 1);
      CHECK(c->y >= 0.0);
      CHECK(c->y <= h - 1);
    }
  }
}

TEST_CASE("mask from blocks") {
  const BlockGrid g = block_partition(70, 70, 32);  // 6-pixel border strip uncovered
  const std::vector<std::uint8_t> flags = {0, 1, 0, 0};
  const Mask m = Mask::from_blocks(70, 70, g, flags);
  CHECK(m.foreground_pixels() == 32u * 32u);
  CHECK(m.pixel(32, 0));
  CHECK_FALSE(m.pixel(31, 0));
  CHECK_FALSE(m.pixel(69, 0));
  const Box b = m.bounding_box();
  CHECK(b.x0 == 32);
  CHECK(b.x1 == 64);
  CHECK(b.y0 == 0);
  CHECK(b.y1 == 32);
  CHECK(m.centroid()->x == doctest::Approx(47.5));
  CHECK(m.centroid()->y == doctest::Approx(15.5));

  const GrayImage img(70, 70, std::uint8_t{0});
  const Mask full = Mask::full(img, g);
  CHECK(full.foreground_blocks() == 4);

  const Mask none = Mask::from_blocks(70, 70, g, std::vector<std::uint8_t>(4, 0));
  CHECK(none.empty());
  CHECK_FALSE(none.centroid().has_value());
}
