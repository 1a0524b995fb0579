#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "sdae/dataset.hpp"
#include "oracles.hpp"

using sdae::CorruptionKind;
using sdae::ImageDataset;
using sdae::RandomStream;
using sdae::Vector;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("sdae_test_" + std::to_string(std::uintptr_t(this)) + "_" +
                std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

ImageDataset tiny_dataset() {
    ImageDataset ds;
    ds.width = 2;
    ds.height = 2;
    ds.images = {Vector{0.0, 1.0, 100.0 / 255.0, 200.0 / 255.0},
                 Vector{1.0, 0.5, 0.0, 30.0 / 255.0}};
    ds.labels = {3, 7};
    return ds;
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

void push_be32(std::vector<std::uint8_t>& v, std::uint32_t x) {
    v.push_back(std::uint8_t(x >> 24));
    v.push_back(std::uint8_t(x >> 16));
    v.push_back(std::uint8_t(x >> 8));
    v.push_back(std::uint8_t(x));
}

}  // namespace

TEST_CASE("load_idx reads hand-built bytes, verified against independent oracle") {
    TempDir tmp;
    // image file: magic, 2 images of 2x2, raw pixels
    std::vector<std::uint8_t> img;
    push_be32(img, 0x00000803);
    push_be32(img, 2);
    push_be32(img, 2);
    push_be32(img, 2);
    for (std::uint8_t p : {0, 255, 100, 200, 255, 128, 0, 30}) img.push_back(p);
    std::vector<std::uint8_t> lab;
    push_be32(lab, 0x00000801);
    push_be32(lab, 2);
    lab.push_back(3);
    lab.push_back(7);
    write_bytes(tmp.file("img"), img);
    write_bytes(tmp.file("lab"), lab);

    const ImageDataset ds = sdae::load_idx(tmp.file("img"), tmp.file("lab"));
    REQUIRE(ds.size() == 2);
    CHECK(ds.width == 2);
    CHECK(ds.height == 2);
    CHECK(ds.labels == std::vector<int>{3, 7});
    CHECK(ds.images[0] == Vector{0.0, 1.0, 100.0 / 255.0, 200.0 / 255.0});
    CHECK(ds.images[1][1] == 128.0 / 255.0);

    // cross-check every byte against the independent reader
    const oracle::IdxImages oi = oracle::read_idx_images(tmp.file("img"));
    const oracle::IdxLabels ol = oracle::read_idx_labels(tmp.file("lab"));
    REQUIRE(oi.magic == 0x00000803);
    REQUIRE(ol.magic == 0x00000801);
    REQUIRE(oi.count == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(int(ol.labels[i]) == ds.labels[i]);
        for (std::size_t k = 0; k < 4; ++k)
            CHECK(ds.images[i][k] == Catch::Approx(oi.pixels[i * 4 + k] / 255.0));
    }
}

TEST_CASE("load_idx error taxonomy") {
    TempDir tmp;
    const ImageDataset ds = tiny_dataset();
    sdae::save_idx(ds, tmp.file("img"), tmp.file("lab"));

    SECTION("missing file is an I/O error") {
        CHECK_THROWS_AS(sdae::load_idx(tmp.file("nope"), tmp.file("lab")), sdae::IoError);
    }
    SECTION("bad image magic") {
        std::vector<std::uint8_t> img;
        push_be32(img, 0x00000802);
        push_be32(img, 0);
        push_be32(img, 2);
        push_be32(img, 2);
        write_bytes(tmp.file("badmagic"), img);
        CHECK_THROWS_WITH(sdae::load_idx(tmp.file("badmagic"), tmp.file("lab")),
                          Catch::Matchers::ContainsSubstring("magic"));
    }
    SECTION("truncated image file") {
        std::vector<std::uint8_t> img;
        push_be32(img, 0x00000803);
        push_be32(img, 2);
        push_be32(img, 2);
        push_be32(img, 2);
        img.push_back(1);  // 1 byte instead of 8
        write_bytes(tmp.file("short"), img);
        CHECK_THROWS_WITH(sdae::load_idx(tmp.file("short"), tmp.file("lab")),
                          Catch::Matchers::ContainsSubstring("truncated"));
    }
    SECTION("count mismatch") {
        std::vector<std::uint8_t> lab;
        push_be32(lab, 0x00000801);
        push_be32(lab, 3);
        lab.insert(lab.end(), {1, 2, 3});
        write_bytes(tmp.file("lab3"), lab);
        CHECK_THROWS_WITH(sdae::load_idx(tmp.file("img"), tmp.file("lab3")),
                          Catch::Matchers::ContainsSubstring("count mismatch"));
    }
}

TEST_CASE("save_idx round-trips labels and quantized pixels") {
    TempDir tmp;
    const ImageDataset ds = tiny_dataset();
    sdae::save_idx(ds, tmp.file("img"), tmp.file("lab"));
    const ImageDataset back = sdae::load_idx(tmp.file("img"), tmp.file("lab"));
    REQUIRE(back.size() == ds.size());
    CHECK(back.labels == ds.labels);
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t k = 0; k < ds.dim(); ++k)
            CHECK(back.images[i][k] == Catch::Approx(ds.images[i][k]).margin(0.5 / 255.0));
}

TEST_CASE("corrupt") {
    Vector x(64);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.1 + 0.01 * double(i);

    SECTION("probability 0 is a no-op") {
        RandomStream rng(1);
        CHECK(sdae::corrupt(x, {CorruptionKind::masking, 0.0}, rng) == x);
    }
    SECTION("probability 1 zeroes everything") {
        RandomStream rng(1);
        const Vector out = sdae::corrupt(x, {CorruptionKind::masking, 1.0}, rng);
        for (double v : out) CHECK(v == 0.0);
    }
    SECTION("input untouched, never increases, zeroed exactly where draw < p") {
        const Vector orig = x;
        RandomStream rng(99);
        const Vector out = sdae::corrupt(x, {CorruptionKind::masking, 0.4}, rng);
        CHECK(x == orig);
        RandomStream replay(99);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const bool zeroed = replay.next_double() < 0.4;
            CHECK(out[i] == (zeroed ? 0.0 : x[i]));
            CHECK(out[i] <= x[i]);
        }
    }
    SECTION("zeroed fraction concentrates around p") {
        Vector big(1000000, 1.0);
        RandomStream rng(7);
        const Vector out = sdae::corrupt(big, {CorruptionKind::masking, 0.25}, rng);
        std::size_t zeros = 0;
        for (double v : out) zeros += (v == 0.0);
        const double frac = double(zeros) / double(big.size());
        CHECK(frac > 0.245);
        CHECK(frac < 0.255);
    }
}

TEST_CASE("gen_bg_rand") {
    ImageDataset ds;
    ds.width = 8;
    ds.height = 8;
    ds.images = {Vector(64, 0.0), Vector(64, 1.0)};
    ds.labels = {0, 1};
    // a digit-like image: mostly background with a bright stroke
    Vector digit(64, 0.0);
    for (int i = 24; i < 40; ++i) digit[std::size_t(i)] = 0.9;
    ds.images.push_back(digit);
    ds.labels.push_back(2);

    RandomStream rng(5);
    const ImageDataset out = sdae::gen_bg_rand(ds, rng);
    REQUIRE(out.size() == ds.size());
    CHECK(out.labels == ds.labels);

    // all-zero image becomes pure uniform noise
    double mean0 = 0.0;
    for (double v : out.images[0]) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        mean0 += v;
    }
    CHECK(mean0 / 64.0 == Catch::Approx(0.5).margin(0.15));

    // all-one image is unchanged (max saturates)
    CHECK(out.images[1] == ds.images[1]);

    // digit mean strictly increases
    double before = 0.0, after = 0.0;
    for (std::size_t i = 0; i < 64; ++i) {
        before += ds.images[2][i];
        after += out.images[2][i];
    }
    CHECK(after > before);

    // reproducibility: same seed, bitwise-identical output
    RandomStream rng2(5);
    const ImageDataset again = sdae::gen_bg_rand(ds, rng2);
    for (std::size_t i = 0; i < ds.size(); ++i) CHECK(again.images[i] == out.images[i]);
}

TEST_CASE("gen_rot") {
    ImageDataset ds;
    ds.width = 9;
    ds.height = 9;
    Vector im(81, 0.0);
    for (int r = 2; r < 7; ++r) im[std::size_t(r * 9 + 4)] = 1.0;
    im[std::size_t(3 * 9 + 2)] = 0.5;
    ds.images = {im};
    ds.labels = {1};

    SECTION("forced angle 0 leaves the image unchanged") {
        RandomStream rng(1);
        const double zero = 0.0;
        const ImageDataset out = sdae::gen_rot(ds, rng, &zero);
        for (std::size_t k = 0; k < 81; ++k)
            CHECK(out.images[0][k] == Catch::Approx(im[k]).margin(1e-12));
    }
    SECTION("angle pi applied twice restores the image") {
        RandomStream rng(1);
        const double pi = M_PI;
        const ImageDataset once = sdae::gen_rot(ds, rng, &pi);
        const ImageDataset twice = sdae::gen_rot(once, rng, &pi);
        for (std::size_t k = 0; k < 81; ++k)
            CHECK(twice.images[0][k] == Catch::Approx(im[k]).margin(0.02));
    }
    SECTION("pixels stay in [0,1] for random angles") {
        RandomStream rng(42);
        const ImageDataset out = sdae::gen_rot(ds, rng);
        for (double v : out.images[0]) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    SECTION("same seed reproduces bitwise") {
        RandomStream a(9), b(9);
        const ImageDataset oa = sdae::gen_rot(ds, a);
        const ImageDataset ob = sdae::gen_rot(ds, b);
        CHECK(oa.images[0] == ob.images[0]);
    }
}

TEST_CASE("gen_bg_img") {
    TempDir tmp;
    ImageDataset ds;
    ds.width = 4;
    ds.height = 4;
    ds.images = {Vector(16, 0.0)};
    ds.images.push_back(Vector(16, 0.25));
    ds.labels = {0, 1};

    SECTION("single all-black background leaves digits unchanged") {
        sdae::PgmImage bg{8, 8, std::vector<std::uint8_t>(64, 0)};
        sdae::write_pgm(bg, tmp.file("black.pgm"));
        RandomStream rng(1);
        const ImageDataset out = sdae::gen_bg_img(ds, tmp.path.string(), rng);
        CHECK(out.images[0] == ds.images[0]);
        CHECK(out.images[1] == ds.images[1]);
        CHECK(out.labels == ds.labels);
    }
    SECTION("single all-white background saturates to ones") {
        sdae::PgmImage bg{8, 8, std::vector<std::uint8_t>(64, 255)};
        sdae::write_pgm(bg, tmp.file("white.pgm"));
        RandomStream rng(1);
        const ImageDataset out = sdae::gen_bg_img(ds, tmp.path.string(), rng);
        for (double v : out.images[0]) CHECK(v == 1.0);
        for (double v : out.images[1]) CHECK(v == 1.0);
    }
    SECTION("empty directory is a data error") {
        RandomStream rng(1);
        CHECK_THROWS_AS(sdae::gen_bg_img(ds, tmp.path.string(), rng), sdae::DataError);
    }
    SECTION("background smaller than digits is rejected") {
        sdae::PgmImage bg{2, 2, std::vector<std::uint8_t>(4, 0)};
        sdae::write_pgm(bg, tmp.file("small.pgm"));
        RandomStream rng(1);
        CHECK_THROWS_AS(sdae::gen_bg_img(ds, tmp.path.string(), rng), sdae::DataError);
    }
}

TEST_CASE("patch offsets are uniform (chi-square, p=0.01)") {
    // 40x40 background, 28x28 crop: 13x13 = 169 offset cells.
    const std::size_t cells = 13 * 13;
    const int draws = 10000;
    std::vector<int> counts(cells, 0);
    RandomStream rng(123);
    for (int i = 0; i < draws; ++i) {
        auto [r, c] = sdae::sample_patch_offset(40, 40, 28, 28, rng);
        REQUIRE(r < 13);
        REQUIRE(c < 13);
        ++counts[r * 13 + c];
    }
    const double expected = double(draws) / double(cells);
    double chi2 = 0.0;
    for (int c : counts) {
        const double d = double(c) - expected;
        chi2 += d * d / expected;
    }
    // chi2.ppf(0.99, df=168) = 213.5585
    CHECK(chi2 < 213.5585);
}
