#include <catch2/catch_amalgamated.hpp>

#include <dar/dar.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

using namespace dar;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) {
        path = (std::filesystem::temp_directory_path() / name).string();
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("codebook generation is deterministic in the seed with distinct rows") {
    const Codebook a = make_codebook(64, 8, 11);
    const Codebook b = make_codebook(64, 8, 11);
    const Codebook c = make_codebook(64, 8, 12);
    REQUIRE(a.codes.data == b.codes.data);
    REQUIRE(a.codes.data != c.codes.data);
    for (int i = 0; i < a.k; ++i) {
        for (int j = i + 1; j < a.k; ++j) {
            REQUIRE_FALSE(std::equal(a.code(i), a.code(i) + a.d, a.code(j)));
        }
    }
    REQUIRE_THROWS_AS(make_codebook(1, 8, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(make_codebook(4, 0, 0), std::invalid_argument);
}

TEST_CASE("nearest_code agrees with brute force over 1000 random features") {
    const Codebook cb = make_codebook(32, 6, 21);
    Rng rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<float> f(6);
        for (auto& x : f) x = static_cast<float>(rng.normal() * 1.5);
        const int got = nearest_code(f.data(), cb);
        int want = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < cb.k; ++j) {
            double d2 = 0.0;
            for (int t = 0; t < cb.d; ++t) {
                const double diff = static_cast<double>(f[static_cast<size_t>(t)]) - cb.code(j)[t];
                d2 += diff * diff;
            }
            if (d2 < best) {
                best = d2;
                want = j;
            }
        }
        REQUIRE(got == want);
    }
}

TEST_CASE("nearest_code breaks exact ties toward the lowest index") {
    Codebook cb;
    cb.k = 3;
    cb.d = 2;
    cb.codes = Tensor<float>(3, 2);
    // Codes at (1,0), (-1,0), (1,0)-duplicate; feature at origin ties 0 and 1.
    cb.codes.data = {1.0F, 0.0F, -1.0F, 0.0F, 1.0F, 0.0F};
    const float origin[2] = {0.0F, 0.0F};
    REQUIRE(nearest_code(origin, cb) == 0);
    const float right[2] = {2.0F, 0.0F};  // ties codes 0 and 2
    REQUIRE(nearest_code(right, cb) == 0);
}

TEST_CASE("quantize(decode(grid)) is the identity on token grids") {
    const Codebook cb = make_codebook(16, 4, 5);
    Rng rng(3);
    TokenGrid grid;
    grid.shape = {4, 5};
    grid.class_label = 2;
    grid.tokens.resize(20);
    for (auto& t : grid.tokens) t = static_cast<uint16_t>(rng.below(16));
    const Tensor<float> feats = decode(grid, cb);
    const TokenGrid back = quantize(feats, grid.shape, cb, grid.class_label);
    REQUIRE(back.tokens == grid.tokens);
    REQUIRE(back.class_label == 2);

    REQUIRE_THROWS_AS(quantize(Tensor<float>(20, 3), GridShape{4, 5}, cb), std::invalid_argument);
    REQUIRE_THROWS_AS(quantize(Tensor<float>(19, 4), GridShape{4, 5}, cb), std::invalid_argument);
    TokenGrid bad = grid;
    bad.tokens[0] = 16;
    REQUIRE_THROWS_AS(decode(bad, cb), std::invalid_argument);
}

TEST_CASE("codebook file round-trips bitwise and rejects corruption") {
    const Codebook cb = make_codebook(48, 7, 1234);
    TempFile f("dar_test_codebook.bin");
    save_codebook(cb, f.path);

    const Codebook back = load_codebook(f.path);
    REQUIRE(back.k == cb.k);
    REQUIRE(back.d == cb.d);
    REQUIRE(back.seed == cb.seed);
    REQUIRE(back.codes.data == cb.codes.data);

    SECTION("flipping a payload byte breaks the checksum") {
        std::fstream fs(f.path, std::ios::in | std::ios::out | std::ios::binary);
        fs.seekp(20);
        char b{};
        fs.seekg(20);
        fs.read(&b, 1);
        b = static_cast<char>(b ^ 0x40);
        fs.seekp(20);
        fs.write(&b, 1);
        fs.close();
        REQUIRE_THROWS_WITH(load_codebook(f.path), Catch::Matchers::ContainsSubstring("checksum"));
    }

    SECTION("bad magic is rejected") {
        std::fstream fs(f.path, std::ios::in | std::ios::out | std::ios::binary);
        fs.seekp(0);
        fs.write("XXXXXX", 6);
        fs.close();
        REQUIRE_THROWS_WITH(load_codebook(f.path), Catch::Matchers::ContainsSubstring("magic"));
    }

    SECTION("truncated file is reported") {
        std::filesystem::resize_file(f.path, 30);
        REQUIRE_THROWS_WITH(load_codebook(f.path), Catch::Matchers::ContainsSubstring("truncated"));
    }

    SECTION("missing file is reported with its path") {
        REQUIRE_THROWS_WITH(load_codebook("/no/such/codebook.bin"),
                            Catch::Matchers::ContainsSubstring("/no/such/codebook.bin"));
    }
}

TEST_CASE("ppm rendering emits a well-formed P6 image with block-constant cells") {
    const Codebook cb = make_codebook(8, 4, 77);
    TokenGrid grid;
    grid.shape = {2, 3};
    grid.tokens = {0, 1, 2, 3, 4, 5};
    std::ostringstream os(std::ios::binary);
    render_ppm(grid, cb, 4, os);
    const std::string img = os.str();

    std::istringstream is(img, std::ios::binary);
    std::string magic;
    int w = 0, h = 0, maxv = 0;
    is >> magic >> w >> h >> maxv;
    REQUIRE(magic == "P6");
    REQUIRE(w == 12);
    REQUIRE(h == 8);
    REQUIRE(maxv == 255);
    is.get();  // single whitespace after header
    std::vector<unsigned char> px(static_cast<size_t>(w) * h * 3);
    is.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
    REQUIRE(is.gcount() == static_cast<std::streamsize>(px.size()));

    // Every pixel inside a cell block matches the block's top-left pixel.
    auto at = [&](int y, int x, int c) { return px[(static_cast<size_t>(y) * w + x) * 3 + c]; };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                REQUIRE(at(y, x, c) == at(y / 4 * 4, x / 4 * 4, c));
            }
        }
    }

    // The affine map sends feature -3 -> 0 and +3 -> 255 with clamping.
    Codebook flat;
    flat.k = 2;
    flat.d = 3;
    flat.codes = Tensor<float>(2, 3);
    flat.codes.data = {-3.0F, 3.0F, 99.0F, 0.0F, 0.0F, -99.0F};
    TokenGrid g2;
    g2.shape = {1, 2};
    g2.tokens = {0, 1};
    std::ostringstream os2(std::ios::binary);
    render_ppm(g2, flat, 1, os2);
    const std::string img2 = os2.str();
    REQUIRE(img2.size() == std::string("P6\n2 1\n255\n").size() + 6);
    const auto* p = reinterpret_cast<const unsigned char*>(img2.data() + img2.size() - 6);
    REQUIRE(p[0] == 0);    // -3 -> 0
    REQUIRE(p[1] == 255);  // +3 -> 255
    REQUIRE(p[2] == 255);  // 99 clamps high
    REQUIRE(p[5] == 0);    // -99 clamps low

    REQUIRE_THROWS_AS(render_ppm(grid, cb, 0, os), std::invalid_argument);
}
