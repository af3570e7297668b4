#include <catch2/catch_amalgamated.hpp>

#include <dar/dar.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
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

DatasetSpec small_spec() {
    DatasetSpec spec;
    spec.height = 4;
    spec.width = 5;
    spec.vocab_size = 16;
    spec.num_classes = 3;
    spec.samples_per_class = 7;
    spec.noise_rate = 0.1;
    spec.family = PatternFamily::Stripes;
    spec.seed = 42;
    return spec;
}

// Writes magic + payload + crc, mirroring the on-disk layout, so tests can
// craft payloads the generator itself would never produce.
void write_raw_dataset(const std::string& path, const std::string& payload) {
    std::ofstream os(path, std::ios::binary);
    os.write(kDatasetMagic, sizeof(kDatasetMagic));
    os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    write_u32(os, crc32(payload.data(), payload.size()));
}

}  // namespace

TEST_CASE("pattern_token matches the per-family closed forms") {
    SECTION("constant family ignores position") {
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                REQUIRE(pattern_token(PatternFamily::Constant, 5, i, j, 4, 4, 16) == 5);
            }
        }
    }
    SECTION("stripes shift the class token by the row index") {
        REQUIRE(pattern_token(PatternFamily::Stripes, 3, 0, 9, 8, 10, 16) == 3);
        REQUIRE(pattern_token(PatternFamily::Stripes, 3, 2, 0, 8, 10, 16) == 5);
        REQUIRE(pattern_token(PatternFamily::Stripes, 14, 5, 1, 8, 10, 16) == 3);  // wraps mod 16
        // Independent of the column.
        for (int j = 0; j < 10; ++j) {
            REQUIRE(pattern_token(PatternFamily::Stripes, 7, 4, j, 8, 10, 16) == 11);
        }
    }
    SECTION("checker alternates between k and the half-vocab complement") {
        REQUIRE(pattern_token(PatternFamily::Checker, 3, 0, 0, 4, 4, 16) == 3);
        REQUIRE(pattern_token(PatternFamily::Checker, 3, 0, 1, 4, 4, 16) == 11);
        REQUIRE(pattern_token(PatternFamily::Checker, 3, 1, 0, 4, 4, 16) == 11);
        REQUIRE(pattern_token(PatternFamily::Checker, 3, 1, 1, 4, 4, 16) == 3);
        REQUIRE(pattern_token(PatternFamily::Checker, 12, 2, 1, 4, 4, 16) == 4);  // 12+8 mod 16
    }
    SECTION("gradient ramps from k to k + vocab - 1 across the anti-diagonal span") {
        const int h = 4, w = 4, vocab = 16;
        REQUIRE(pattern_token(PatternFamily::Gradient, 2, 0, 0, h, w, vocab) == 2);
        REQUIRE(pattern_token(PatternFamily::Gradient, 2, h - 1, w - 1, h, w, vocab) == (2 + vocab - 1) % vocab);
        // Interior cell: ramp = (i + j) * 15 / 6.
        REQUIRE(pattern_token(PatternFamily::Gradient, 0, 1, 2, h, w, vocab) == 3 * 15 / 6);
        // 1x1 grid has zero span; the ramp collapses to zero.
        REQUIRE(pattern_token(PatternFamily::Gradient, 9, 0, 0, 1, 1, vocab) == 9);
    }
}

TEST_CASE("generation is deterministic and ordered class-major") {
    const DatasetSpec spec = small_spec();
    const Dataset a = generate_dataset(spec);
    const Dataset b = generate_dataset(spec);
    REQUIRE(a.classes == b.classes);
    REQUIRE(a.tokens == b.tokens);
    REQUIRE(dataset_fingerprint(a) == dataset_fingerprint(b));

    REQUIRE(a.count() == spec.num_classes * spec.samples_per_class);
    REQUIRE(a.tokens.size() == static_cast<size_t>(a.count()) * a.cells());
    for (int i = 0; i < a.count(); ++i) {
        REQUIRE(a.classes[static_cast<size_t>(i)] == i / spec.samples_per_class);
    }

    DatasetSpec other = spec;
    other.seed = 43;
    REQUIRE(generate_dataset(other).tokens != a.tokens);
}

TEST_CASE("noiseless datasets do not consume randomness") {
    DatasetSpec spec = small_spec();
    spec.noise_rate = 0.0;
    DatasetSpec reseeded = spec;
    reseeded.seed = 999;
    const Dataset a = generate_dataset(spec);
    const Dataset b = generate_dataset(reseeded);
    REQUIRE(a.tokens == b.tokens);
    // And every token equals the clean pattern.
    for (int i = 0; i < a.count(); ++i) {
        const uint16_t* g = a.grid(i);
        for (int r = 0; r < a.height; ++r) {
            for (int c = 0; c < a.width; ++c) {
                const int want = pattern_token(spec.family, a.classes[static_cast<size_t>(i)], r, c,
                                               a.height, a.width, a.vocab_size);
                REQUIRE(g[r * a.width + c] == want);
            }
        }
    }
}

TEST_CASE("observed corruption rate matches noise_rate * (1 - 1/vocab)") {
    DatasetSpec spec;
    spec.height = 16;
    spec.width = 16;
    spec.vocab_size = 32;
    spec.num_classes = 4;
    spec.samples_per_class = 50;
    spec.noise_rate = 0.25;
    spec.family = PatternFamily::Checker;
    spec.seed = 7;
    const Dataset ds = generate_dataset(spec);

    int64_t mismatches = 0;
    int64_t total = 0;
    for (int i = 0; i < ds.count(); ++i) {
        const uint16_t* g = ds.grid(i);
        for (int r = 0; r < ds.height; ++r) {
            for (int c = 0; c < ds.width; ++c) {
                const int want = pattern_token(spec.family, ds.classes[static_cast<size_t>(i)], r, c,
                                               ds.height, ds.width, ds.vocab_size);
                mismatches += g[r * ds.width + c] != want;
                ++total;
            }
        }
    }
    // A corrupted cell only differs when the uniform redraw misses the clean
    // token, so the visible rate is eps * (1 - 1/K) = 0.2421875. With 51200
    // cells the binomial 5-sigma band is under 0.01.
    const double rate = static_cast<double>(mismatches) / static_cast<double>(total);
    REQUIRE(total == 51200);
    REQUIRE(rate == Catch::Approx(0.25 * (1.0 - 1.0 / 32.0)).margin(0.01));
}

TEST_CASE("save and load round-trip the dataset bitwise") {
    TempFile tmp("dar_test_dataset_roundtrip.bin");
    const Dataset ds = generate_dataset(small_spec());
    save_dataset(ds, tmp.path);
    const Dataset back = load_dataset(tmp.path);
    REQUIRE(back.height == ds.height);
    REQUIRE(back.width == ds.width);
    REQUIRE(back.vocab_size == ds.vocab_size);
    REQUIRE(back.num_classes == ds.num_classes);
    REQUIRE(back.classes == ds.classes);
    REQUIRE(back.tokens == ds.tokens);
    REQUIRE(dataset_fingerprint(back) == dataset_fingerprint(ds));
}

TEST_CASE("load_dataset rejects damaged files") {
    const Dataset ds = generate_dataset(small_spec());

    SECTION("missing file names the path") {
        const std::string bogus = "/tmp/dar_test_no_such_dataset.bin";
        REQUIRE_THROWS_WITH(load_dataset(bogus), Catch::Matchers::ContainsSubstring(bogus));
    }
    SECTION("bad magic") {
        TempFile tmp("dar_test_dataset_magic.bin");
        save_dataset(ds, tmp.path);
        {
            std::fstream f(tmp.path, std::ios::binary | std::ios::in | std::ios::out);
            f.seekp(0);
            f.put('X');
        }
        REQUIRE_THROWS_WITH(load_dataset(tmp.path), Catch::Matchers::ContainsSubstring("magic"));
    }
    SECTION("flipped payload byte fails the checksum") {
        TempFile tmp("dar_test_dataset_crc.bin");
        save_dataset(ds, tmp.path);
        {
            std::fstream f(tmp.path, std::ios::binary | std::ios::in | std::ios::out);
            f.seekg(25);
            const char orig = static_cast<char>(f.get());
            f.seekp(25);
            f.put(static_cast<char>(orig ^ 0x01));
        }
        REQUIRE_THROWS_WITH(load_dataset(tmp.path), Catch::Matchers::ContainsSubstring("checksum"));
    }
    SECTION("truncated file") {
        TempFile tmp("dar_test_dataset_trunc.bin");
        save_dataset(ds, tmp.path);
        std::filesystem::resize_file(tmp.path, 12);
        REQUIRE_THROWS_WITH(load_dataset(tmp.path), Catch::Matchers::ContainsSubstring("truncated"));
    }
    SECTION("token at or above vocab_size is rejected even with a valid checksum") {
        TempFile tmp("dar_test_dataset_badtok.bin");
        std::string payload = serialize_dataset(ds);
        // First token lives right after the 5 u32 header fields + 1 u16 class.
        const size_t tok_off = 5 * 4 + 2;
        payload[tok_off] = static_cast<char>(ds.vocab_size & 0xFF);          // little-endian low byte
        payload[tok_off + 1] = static_cast<char>((ds.vocab_size >> 8) & 0xFF);
        write_raw_dataset(tmp.path, payload);
        REQUIRE_THROWS_WITH(load_dataset(tmp.path), Catch::Matchers::ContainsSubstring("out of range"));
    }
}

TEST_CASE("split_dataset holds out the last tenth of each class") {
    DatasetSpec spec = small_spec();
    spec.samples_per_class = 25;
    const Dataset ds = generate_dataset(spec);
    const SplitIndices split = split_dataset(ds);

    REQUIRE(split.heldout.size() == static_cast<size_t>(ds.num_classes) * 2);  // 25/10 = 2
    REQUIRE(split.train.size() + split.heldout.size() == static_cast<size_t>(ds.count()));

    std::set<int> heldout(split.heldout.begin(), split.heldout.end());
    for (int k = 0; k < ds.num_classes; ++k) {
        REQUIRE(heldout.count(k * 25 + 23) == 1);
        REQUIRE(heldout.count(k * 25 + 24) == 1);
    }
    std::set<int> train(split.train.begin(), split.train.end());
    REQUIRE(train.size() == split.train.size());
    for (int i : split.heldout) REQUIRE(train.count(i) == 0);

    SECTION("classes with fewer than ten samples keep everything in train") {
        DatasetSpec tiny = small_spec();
        tiny.samples_per_class = 9;
        const SplitIndices s = split_dataset(generate_dataset(tiny));
        REQUIRE(s.heldout.empty());
        REQUIRE(s.train.size() == static_cast<size_t>(tiny.num_classes) * 9);
    }
}

TEST_CASE("DatasetSpec::validate rejects out-of-range fields") {
    REQUIRE_NOTHROW(small_spec().validate());
    auto expect_throw = [](auto mutate) {
        DatasetSpec spec = small_spec();
        mutate(spec);
        REQUIRE_THROWS_AS(spec.validate(), std::invalid_argument);
    };
    expect_throw([](DatasetSpec& s) { s.vocab_size = 1; });
    expect_throw([](DatasetSpec& s) { s.vocab_size = 70000; });
    expect_throw([](DatasetSpec& s) { s.num_classes = 0; });
    expect_throw([](DatasetSpec& s) { s.samples_per_class = 0; });
    expect_throw([](DatasetSpec& s) { s.noise_rate = -0.01; });
    expect_throw([](DatasetSpec& s) { s.noise_rate = 1.0; });
    expect_throw([](DatasetSpec& s) { s.height = 0; });
    expect_throw([](DatasetSpec& s) {
        s.family = PatternFamily::Constant;
        s.num_classes = 20;
        s.vocab_size = 16;
    });
}
