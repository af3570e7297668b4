#include <catch2/catch_amalgamated.hpp>

#include <dar/dar.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
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

const std::vector<std::string> kPresetNames = {"tiny",    "desk",    "desk-small",
                                               "paper-b", "paper-l", "paper-xl"};

}  // namespace

TEST_CASE("every preset validates and survives a serialization round trip") {
    for (const auto& name : kPresetNames) {
        INFO("preset " << name);
        const ConfigBundle b = preset(name);
        REQUIRE_NOTHROW(b.model.validate());
        REQUIRE_NOTHROW(b.train.validate());
        REQUIRE_NOTHROW(b.dataset.validate());
        REQUIRE_NOTHROW(b.sample.validate());

        const Json j = to_json(b);
        ConfigBundle back;  // defaults, fully overwritten since j has every key
        apply_json(j, back);
        REQUIRE(to_json(back) == j);
    }
    REQUIRE_THROWS_AS(preset("nope"), std::invalid_argument);
}

TEST_CASE("published configurations match the recorded hyperparameters") {
    const std::string golden_path = std::string(DAR_GOLDEN_DIR) + "/paper_presets.json";
    std::ifstream is(golden_path);
    REQUIRE(is.good());
    const Json golden = Json::parse(is);
    REQUIRE(golden.size() == 3);

    for (const auto& [name, sections] : golden.items()) {
        INFO("preset " << name);
        const Json actual = to_json(preset(name));
        for (const auto& [section, fields] : sections.items()) {
            for (const auto& [key, want] : fields.items()) {
                INFO(section << "." << key);
                REQUIRE(actual.at(section).contains(key));
                const Json& got = actual.at(section).at(key);
                if (want.is_number_float()) {
                    REQUIRE(got.get<double>() == want.get<double>());
                } else {
                    REQUIRE(got == want);
                }
            }
        }
    }
}

TEST_CASE("unknown keys are rejected with their full path") {
    ConfigBundle b;
    SECTION("top level") {
        const Json j = {{"modle", Json::object()}};
        REQUIRE_THROWS_WITH(apply_json(j, b), Catch::Matchers::ContainsSubstring("config.modle"));
    }
    SECTION("inside a section") {
        const Json j = {{"model", {{"hiden_size", 32}}}};
        REQUIRE_THROWS_WITH(apply_json(j, b), Catch::Matchers::ContainsSubstring("model.hiden_size"));
    }
    SECTION("wrong value type") {
        const Json j = {{"model", {{"layers", "two"}}}};
        REQUIRE_THROWS_WITH(apply_json(j, b), Catch::Matchers::ContainsSubstring("model.layers"));
    }
    SECTION("enum value must be a string") {
        const Json j = {{"model", {{"scan_order", 3}}}};
        REQUIRE_THROWS_WITH(apply_json(j, b), Catch::Matchers::ContainsSubstring("expected a string"));
    }
    SECTION("unknown enum value names the key") {
        const Json j = {{"model", {{"scan_order", "spiral"}}}};
        REQUIRE_THROWS_WITH(apply_json(j, b), Catch::Matchers::ContainsSubstring("model.scan_order"));
    }
    SECTION("non-object section") {
        const Json j = {{"train", 7}};
        REQUIRE_THROWS_AS(apply_json(j, b), std::invalid_argument);
    }
}

TEST_CASE("partial overlays only touch the keys they mention") {
    TempFile tmp("dar_test_config_overlay.json");
    {
        std::ofstream os(tmp.path);
        os << R"({"train": {"steps": 42, "seed": 77}, "model": {"layers": 5}})";
    }
    const ConfigBundle base = preset("desk");
    const ConfigBundle b = load_bundle_file(tmp.path, base);
    REQUIRE(b.train.steps == 42);
    REQUIRE(b.train.seed == 77);
    REQUIRE(b.model.layers == 5);
    // Untouched fields keep their preset values.
    REQUIRE(b.model.hidden_size == base.model.hidden_size);
    REQUIRE(b.train.batch_size == base.train.batch_size);
    REQUIRE(b.dataset.samples_per_class == base.dataset.samples_per_class);
    REQUIRE(b.sample.batch == base.sample.batch);
}

TEST_CASE("load_bundle_file reports missing or malformed files") {
    const std::string bogus = "/tmp/dar_test_no_such_config.json";
    REQUIRE_THROWS_WITH(load_bundle_file(bogus), Catch::Matchers::ContainsSubstring(bogus));

    TempFile tmp("dar_test_config_bad.json");
    {
        std::ofstream os(tmp.path);
        os << "{ not json";
    }
    REQUIRE_THROWS_AS(load_bundle_file(tmp.path), std::invalid_argument);
}

TEST_CASE("config_fingerprint tracks the model section") {
    const ModelConfig a = preset("desk").model;
    ModelConfig b = a;
    REQUIRE(config_fingerprint(a) == config_fingerprint(b));
    b.layers += 1;
    REQUIRE(config_fingerprint(a) != config_fingerprint(b));
    b = a;
    b.rope_mode = RopeMode::TwoD;
    REQUIRE(config_fingerprint(a) != config_fingerprint(b));
    // Train/dataset/sample settings do not affect the model fingerprint.
    REQUIRE(config_fingerprint(preset("desk").model) == config_fingerprint(a));
}

TEST_CASE("ModelConfig::validate enforces shape constraints") {
    auto expect_throw = [](auto mutate) {
        ModelConfig m = preset("desk").model;
        mutate(m);
        REQUIRE_THROWS_AS(m.validate(), std::invalid_argument);
    };
    expect_throw([](ModelConfig& m) { m.layers = 0; });
    expect_throw([](ModelConfig& m) { m.hidden_size = 65; });                     // odd
    expect_throw([](ModelConfig& m) { m.hidden_size = 66; });                     // not divisible by heads
    expect_throw([](ModelConfig& m) { m.hidden_size = 48; m.rope_mode = RopeMode::FourD; });  // head_dim 12 % 8
    expect_throw([](ModelConfig& m) { m.vocab_size = 1; });
    expect_throw([](ModelConfig& m) { m.num_classes = 0; });
    expect_throw([](ModelConfig& m) { m.grid_height = 0; });
    expect_throw([](ModelConfig& m) { m.codebook_dim = 0; });
    expect_throw([](ModelConfig& m) { m.dropout = 1.0; });
    expect_throw([](ModelConfig& m) { m.class_dropout = -0.1; });

    // head_dim 12 is fine for the 2d mode (12 % 4 == 0).
    ModelConfig ok = preset("desk").model;
    ok.hidden_size = 48;
    ok.rope_mode = RopeMode::TwoD;
    REQUIRE_NOTHROW(ok.validate());
    REQUIRE(ok.head_dim() == 12);
    REQUIRE(ok.ffn_hidden() == 168);  // 3.5x hidden
}

TEST_CASE("enum names round-trip") {
    for (AdaLnCondition c : {AdaLnCondition::Class, AdaLnCondition::ClassTimestep,
                             AdaLnCondition::ClassDirection}) {
        REQUIRE(adaln_from_name(adaln_name(c)) == c);
    }
    REQUIRE_THROWS_AS(adaln_from_name("klass"), std::invalid_argument);
    for (PatternFamily f : {PatternFamily::Constant, PatternFamily::Stripes,
                            PatternFamily::Checker, PatternFamily::Gradient}) {
        REQUIRE(family_from_name(family_name(f)) == f);
    }
    REQUIRE_THROWS_AS(family_from_name("plaid"), std::invalid_argument);
}

TEST_CASE("derived model quantities") {
    const ModelConfig m = preset("desk").model;
    REQUIRE(m.head_dim() == 16);
    REQUIRE(m.ffn_hidden() == 224);
    REQUIRE(m.seq_len() == 64);
    REQUIRE(m.null_class() == m.num_classes);
    REQUIRE(m.grid().h == 8);
    REQUIRE(m.grid().w == 8);
}
