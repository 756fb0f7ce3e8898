#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "binopt/filters.hpp"
#include "binopt/image_io.hpp"
#include "binopt/reference.hpp"
#include "synthetic.hpp"

using namespace binopt;
namespace fs = std::filesystem;

namespace {

fs::path test_dir() {
    const fs::path dir = fs::temp_directory_path() / "binopt_test_imagecore";
    fs::create_directories(dir);
    return dir;
}

void write_bytes(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(bytes.data(), std::streamsize(bytes.size()));
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("image containers validate dimensions") {
    CHECK_THROWS_AS(GrayImage(0, 4), ParameterError);
    CHECK_THROWS_AS(ImageF(4, 0), ParameterError);
    CHECK_THROWS_AS(BinaryImage(-1, 2), ParameterError);
    GrayImage img(3, 2, 7);
    CHECK(img.pixel_count() == 6);
    img.at(2, 1) = 9;
    CHECK(img.data[5] == 9);
}

TEST_CASE("histogram counts every pixel") {
    GrayImage img(4, 4, 10);
    img.at(0, 0) = 200;
    img.at(1, 0) = 200;
    const Histogram h = Histogram::of(img);
    CHECK(h.total == 16);
    CHECK(h.bins[10] == 14);
    CHECK(h.bins[200] == 2);
    std::int64_t sum = 0;
    for (auto b : h.bins) sum += b;
    CHECK(sum == h.total);
}

TEST_CASE("gray/float/binary conversions") {
    GrayImage g(2, 1);
    g.at(0, 0) = 0;
    g.at(1, 0) = 255;
    const ImageF f = to_float(g);
    CHECK(f.at(0, 0) == 0.0);
    CHECK(f.at(1, 0) == 1.0);
    CHECK(quantize8(f) == g);

    ImageF clip(1, 1, 1.7);
    CHECK(quantize8(clip).at(0, 0) == 255);
    clip.at(0, 0) = -0.3;
    CHECK(quantize8(clip).at(0, 0) == 0);

    const BinaryImage b = binary_from_gray(g);
    CHECK(b.at(0, 0) == BinaryImage::kForeground);
    CHECK(b.at(1, 0) == BinaryImage::kBackground);
    CHECK(to_gray(b).at(0, 0) == 0);
    CHECK(to_gray(b).at(1, 0) == 255);

    CHECK(invert(g).at(0, 0) == 255);
    CHECK(invert(g).at(1, 0) == 0);
}

TEST_CASE("P5 load preserves bytes") {
    const fs::path p = test_dir() / "tiny.pgm";
    write_bytes(p, std::string("P5\n2 2\n255\n") + '\0' + char(128) + char(255) + char(64));
    const GrayImage img = load_image(p);
    CHECK(img.width == 2);
    CHECK(img.height == 2);
    CHECK(img.data == std::vector<std::uint8_t>{0, 128, 255, 64});
}

TEST_CASE("P5 header comments and whitespace are fine") {
    const fs::path p = test_dir() / "comment.pgm";
    write_bytes(p, std::string("P5 # a graymap\n# comment line\n 2\t1 \n255\n") + char(5) + char(6));
    const GrayImage img = load_image(p);
    CHECK(img.width == 2);
    CHECK(img.data[0] == 5);
    CHECK(img.data[1] == 6);
}

TEST_CASE("P6 reduces by BT.601 luminance") {
    const fs::path p = test_dir() / "tiny.ppm";
    const auto px = [](int r, int g, int b) { return std::string{char(r), char(g), char(b)}; };
    write_bytes(p, "P6\n2 1\n255\n" + px(255, 255, 255) + px(255, 0, 0));
    const GrayImage img = load_image(p);
    CHECK(img.data[0] == 255);  // white stays white
    CHECK(img.data[1] == 76);   // round(0.299 * 255)
}

TEST_CASE("load failures name the problem") {
    const fs::path dir = test_dir();
    CHECK_THROWS_AS(load_image(dir / "missing.pgm"), IoError);

    write_bytes(dir / "magic.pgm", "P7\n1 1\n255\nx");
    CHECK_THROWS_AS(load_image(dir / "magic.pgm"), IoError);

    write_bytes(dir / "depth.pgm", "P5\n1 1\n65535\nxx");
    CHECK_THROWS_WITH_AS(load_image(dir / "depth.pgm"),
                         doctest::Contains("unsupported bit depth"), IoError);

    write_bytes(dir / "short.pgm", "P5\n4 4\n255\nab");
    CHECK_THROWS_WITH_AS(load_image(dir / "short.pgm"), doctest::Contains("truncated"), IoError);

    write_bytes(dir / "header.pgm", "P5\nfoo 1\n255\nx");
    CHECK_THROWS_AS(load_image(dir / "header.pgm"), IoError);
}

TEST_CASE("save/load round trip is pixel-identical") {
    const fs::path dir = test_dir();
    std::mt19937_64 rng(42);
    for (auto [w, h] : {std::pair{1, 1}, {7, 3}, {33, 17}}) {
        const GrayImage img = testutil::random_gray(w, h, rng());
        const fs::path p = dir / ("rt_" + std::to_string(w) + "x" + std::to_string(h) + ".pgm");
        save_image(img, p);
        CHECK(load_image(p) == img);
    }
}

TEST_CASE("binary images save as 0/255 bytes") {
    const fs::path dir = test_dir();
    const std::string header = "P5\n3 2\n255\n";

    save_image(BinaryImage(3, 2, BinaryImage::kBackground), dir / "bg.pgm");
    CHECK(read_bytes(dir / "bg.pgm") == header + std::string(6, char(255)));

    save_image(BinaryImage(3, 2, BinaryImage::kForeground), dir / "fg.pgm");
    CHECK(read_bytes(dir / "fg.pgm") == header + std::string(6, char(0)));

    // round trip through the gray loader
    const BinaryImage mixed = testutil::random_binary(9, 5, 3, 0.5);
    save_image(mixed, dir / "mixed.pgm");
    CHECK(binary_from_gray(load_image(dir / "mixed.pgm")) == mixed);
}

TEST_CASE("saving into a missing directory fails without leaving junk") {
    const fs::path p = test_dir() / "no_such_dir" / "x.pgm";
    CHECK_THROWS_AS(save_image(GrayImage(1, 1), p), std::exception);
    CHECK(!fs::exists(p));
}

#ifdef BINOPT_HAVE_PNG
TEST_CASE("png round trip") {
    const fs::path p = test_dir() / "rt.png";
    const GrayImage img = testutil::random_gray(21, 13, 99);
    save_image(img, p);
    CHECK(load_image(p) == img);
}
#endif

TEST_CASE("median: constants, identity window, impulse") {
    const GrayImage flat(16, 12, 77);
    CHECK(median_filter(flat, 5) == flat);

    const GrayImage img = testutil::random_gray(10, 10, 5);
    CHECK(median_filter(img, 1) == img);

    GrayImage impulse(5, 5, 0);
    impulse.at(2, 2) = 255;
    const GrayImage out = median_filter(impulse, 3);
    for (auto v : out.data) CHECK(v == 0);

    CHECK_THROWS_AS(median_filter(img, 4), ParameterError);
    CHECK_THROWS_AS(median_filter(img, 0), ParameterError);
    CHECK_THROWS_AS(median_filter(img, -3), ParameterError);
}

TEST_CASE("median matches the serial reference") {
    for (int window : {1, 3, 5, 9}) {
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const GrayImage img = testutil::random_gray(32, 32, seed * 10 + window);
            CHECK(median_filter(img, window) == reference::median_filter(img, window));
        }
    }
    // window larger than the image: replicate padding still defined
    const GrayImage tiny = testutil::random_gray(5, 5, 123);
    CHECK(median_filter(tiny, 7) == reference::median_filter(tiny, 7));
    CHECK(median_filter(tiny, 35) == reference::median_filter(tiny, 35));
    // non-square
    const GrayImage wide = testutil::random_gray(33, 9, 55);
    CHECK(median_filter(wide, 9) == reference::median_filter(wide, 9));
}

TEST_CASE("mean: constants, identity, centre example") {
    const ImageF flat(9, 9, 0.375);
    const ImageF fout = mean_filter(flat, 7);
    for (auto v : fout.data) CHECK(v == doctest::Approx(0.375).epsilon(1e-12));

    const ImageF img = testutil::random_float(8, 8, 2);
    CHECK(mean_filter(img, 1) == img);

    ImageF spike(3, 3, 0.0);
    spike.at(1, 1) = 9.0;
    CHECK(mean_filter(spike, 3).at(1, 1) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(mean_filter(img, 2), ParameterError);
}

TEST_CASE("mean matches the serial reference") {
    for (int window : {1, 3, 5, 9}) {
        for (std::uint64_t seed : {4u, 5u, 6u}) {
            const ImageF img = testutil::random_float(32, 32, seed * 10 + window);
            const ImageF got = mean_filter(img, window);
            const ImageF want = reference::mean_filter(img, window);
            for (std::size_t i = 0; i < got.data.size(); ++i)
                CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-9));
        }
    }
    const ImageF tiny = testutil::random_float(5, 4, 7);
    const ImageF got = mean_filter(tiny, 9);
    const ImageF want = reference::mean_filter(tiny, 9);
    for (std::size_t i = 0; i < got.data.size(); ++i)
        CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-9));
}

TEST_CASE("filters stay inside the input range") {
    const GrayImage img = testutil::random_gray(24, 24, 9);
    const auto [gmin, gmax] = std::minmax_element(img.data.begin(), img.data.end());
    const GrayImage med = median_filter(img, 5);
    for (auto v : med.data) {
        CHECK(v >= *gmin);
        CHECK(v <= *gmax);
    }

    const ImageF f = testutil::random_float(24, 24, 10);
    const auto [fmin, fmax] = std::minmax_element(f.data.begin(), f.data.end());
    const ImageF mean = mean_filter(f, 5);
    for (auto v : mean.data) {
        CHECK(v >= *fmin - 1e-12);
        CHECK(v <= *fmax + 1e-12);
    }
}
