#include <catch2/catch_amalgamated.hpp>

#include <dar/dar.hpp>

#include <cmath>
#include <vector>

using namespace dar;

namespace {

struct Assembled {
    ModelConfig cfg;
    Codebook cb;
    ParamStore<double> ps;
    SequenceLayout lay;
    std::shared_ptr<const RotationTable> rot;
};

// Model with live AdaLN projections so the conditioning path is exercised.
Assembled assemble(ModelConfig cfg, uint64_t init_seed = 77) {
    Assembled a;
    a.cfg = cfg;
    a.cb = make_codebook(cfg.vocab_size, cfg.codebook_dim, cfg.codebook_seed);
    a.ps = init_params<double>(cfg, cfg.codebook_embeddings ? &a.cb : nullptr, init_seed);
    Rng rng(init_seed ^ 0xABCD);
    for (int l = 0; l < cfg.layers; ++l) {
        for (const char* sub : {".adaln1", ".adaln2"}) {
            const std::string lp = "layer" + std::to_string(l) + sub;
            for (const char* leaf : {".shift.w", ".scale.w", ".shift.b", ".scale.b"}) {
                for (auto& x : a.ps[lp + leaf].data) x = rng.normal() * 0.02;
            }
        }
    }
    a.lay = build_layout(cfg.grid(), cfg.scan);
    a.rot = layout_rotation(a.lay, cfg.rope_mode, cfg.head_dim());
    return a;
}

// Teacher-forced incremental logits vs. the whole-sequence tape forward.
double max_parity_gap(const Assembled& a, const Batch& batch) {
    Tape<double> tape;
    const ForwardIds<double> ids =
        build_forward(tape, a.cfg, a.ps, a.lay, a.rot, batch, /*train=*/false, nullptr);
    const Tensor<double>& ref = tape.value(ids.logits);

    const Decoder<double> dec(a.cfg, a.ps, a.lay);
    auto st = dec.new_stream(batch.classes[0]);
    double gap = 0.0;
    int prev = -1;
    for (int i = 0; i < a.lay.len(); ++i) {
        const std::vector<double> logits = dec.step(st, prev);
        for (int c = 0; c < ref.cols; ++c) {
            gap = std::max(gap, std::abs(logits[static_cast<size_t>(c)] - ref.at(i, c)));
        }
        prev = batch.tokens[static_cast<size_t>(i)];
    }
    return gap;
}

Batch one_sequence(const Assembled& a, int cls, uint64_t seed) {
    Batch b;
    b.batch = 1;
    b.classes = {cls};
    Rng rng(seed);
    for (int i = 0; i < a.lay.len(); ++i) {
        b.tokens.push_back(static_cast<int>(rng.below(static_cast<uint64_t>(a.cfg.vocab_size))));
    }
    return b;
}

}  // namespace

TEST_CASE("incremental decoding reproduces the full forward logits") {
    SECTION("4d rotation, diagonal scan, codebook embeddings") {
        const Assembled a = assemble(preset("desk-small").model);
        REQUIRE(max_parity_gap(a, one_sequence(a, 3, 11)) <= 1e-12);
    }
    SECTION("2d rotation, raster scan, trainable embedding table") {
        ModelConfig cfg = preset("desk-small").model;
        cfg.rope_mode = RopeMode::TwoD;
        cfg.scan = ScanKind::Raster;
        cfg.codebook_embeddings = false;
        const Assembled a = assemble(cfg);
        REQUIRE(max_parity_gap(a, one_sequence(a, 1, 12)) <= 1e-12);
    }
    SECTION("class+timestep conditioning") {
        ModelConfig cfg = preset("desk-small").model;
        cfg.adaln_condition = AdaLnCondition::ClassTimestep;
        const Assembled a = assemble(cfg);
        REQUIRE(max_parity_gap(a, one_sequence(a, 0, 13)) <= 1e-12);
    }
}

TEST_CASE("decoder streams validate their inputs") {
    const Assembled a = assemble(preset("tiny").model);
    const Decoder<double> dec(a.cfg, a.ps, a.lay);
    REQUIRE_NOTHROW(dec.new_stream(a.cfg.num_classes));  // the null class is legal
    REQUIRE_THROWS_AS(dec.new_stream(a.cfg.num_classes + 1), std::invalid_argument);
    REQUIRE_THROWS_AS(dec.new_stream(-1), std::invalid_argument);

    auto st = dec.new_stream(0);
    (void)dec.step(st, -1);
    REQUIRE_THROWS_AS(dec.step(st, a.cfg.vocab_size), std::invalid_argument);
    for (int i = 1; i < a.lay.len(); ++i) (void)dec.step(st, 0);
    REQUIRE_THROWS_AS(dec.step(st, 0), std::invalid_argument);  // stream exhausted

    const SequenceLayout wrong = build_layout(GridShape{3, 3}, a.cfg.scan);
    REQUIRE_THROWS_AS(Decoder<double>(a.cfg, a.ps, wrong), std::invalid_argument);
}

TEST_CASE("guidance schedule starts near 1 and ends exactly at the scale") {
    const int total = 64;
    for (double s : {1.0, 1.5, 2.0, 4.3, 4.5, 4.7}) {
        for (double alpha : {0.56, 0.78, 0.88, 1.0}) {
            INFO("s " << s << " alpha " << alpha);
            REQUIRE(guidance_at(total - 1, total, s, alpha) == s);  // bitwise
            REQUIRE(guidance_at(0, total, s, alpha) >= 1.0);
            REQUIRE(guidance_at(0, total, s, alpha) <= 1.0 + (s - 1.0) * 0.05);
            for (int t = 1; t < total; ++t) {
                REQUIRE(guidance_at(t, total, s, alpha) >=
                        guidance_at(t - 1, total, s, alpha));
            }
        }
    }
    // Smaller powers push weight earlier in the schedule.
    REQUIRE(guidance_at(16, 64, 4.0, 0.5) > guidance_at(16, 64, 4.0, 1.0));
    REQUIRE_THROWS_AS(guidance_at(-1, 64, 2.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(guidance_at(64, 64, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("cfg_combine interpolates between the two streams") {
    const std::vector<double> cond = {1.0, -2.0, 0.25, 7.5};
    const std::vector<double> uncond = {0.5, 1.0, -0.75, 7.5};
    SECTION("w = 0 returns the unconditional stream bitwise") {
        REQUIRE(cfg_combine(cond, uncond, 0.0) == uncond);
    }
    SECTION("w = 1 returns the conditional stream to rounding") {
        const std::vector<double> g = cfg_combine(cond, uncond, 1.0);
        for (size_t i = 0; i < g.size(); ++i) {
            REQUIRE(g[i] == Catch::Approx(cond[i]).margin(1e-12));
        }
    }
    SECTION("w = 2 extrapolates past the conditional stream") {
        const std::vector<double> g = cfg_combine(cond, uncond, 2.0);
        for (size_t i = 0; i < g.size(); ++i) {
            REQUIRE(g[i] == Catch::Approx(uncond[i] + 2.0 * (cond[i] - uncond[i])).margin(1e-12));
        }
    }
    SECTION("shape mismatch throws") {
        REQUIRE_THROWS_AS(cfg_combine(cond, std::vector<double>{1.0}, 1.0), std::invalid_argument);
    }
}

TEST_CASE("categorical sampling matches the softmax distribution") {
    const std::vector<double> probs = {0.5, 0.3, 0.2};
    std::vector<double> logits;
    for (double p : probs) logits.push_back(std::log(p) + 3.0);  // shared shift is irrelevant
    Rng rng(123);
    const int n = 100000;
    std::vector<int> hits(probs.size());
    for (int i = 0; i < n; ++i) ++hits[static_cast<size_t>(sample_categorical(logits, rng))];
    for (size_t i = 0; i < probs.size(); ++i) {
        const double freq = static_cast<double>(hits[i]) / n;
        const double sigma = std::sqrt(probs[i] * (1.0 - probs[i]) / n);
        INFO("bucket " << i << " freq " << freq);
        REQUIRE(std::abs(freq - probs[i]) < 3.0 * sigma + 1e-4);
    }

    SECTION("an overwhelming logit always wins despite the overflow guard") {
        Rng r2(5);
        const std::vector<double> huge = {0.0, 1000.0, -3.0};
        for (int i = 0; i < 200; ++i) REQUIRE(sample_categorical(huge, r2) == 1);
    }
    SECTION("argmax picks the first of tied maxima") {
        REQUIRE(argmax_index(std::vector<double>{1.0, 3.0, 3.0}) == 1);
        REQUIRE(argmax_index(std::vector<double>{-5.0}) == 0);
    }
}

TEST_CASE("grid sampling is reproducible and respects its knobs") {
    const Assembled a = assemble(preset("desk-small").model);
    const Decoder<double> dec(a.cfg, a.ps, a.lay);
    SamplingConfig scfg = preset("desk-small").sample;
    scfg.class_label = 2;

    SECTION("same seed, same grids; different seed, different grids") {
        Rng r1(42), r2(42), r3(43);
        const TokenGrid g1 = sample_grid(dec, scfg, r1);
        const TokenGrid g2 = sample_grid(dec, scfg, r2);
        const TokenGrid g3 = sample_grid(dec, scfg, r3);
        REQUIRE(g1.tokens == g2.tokens);
        REQUIRE(g1.tokens != g3.tokens);
        REQUIRE(g1.class_label == 2);
        REQUIRE(g1.shape == a.cfg.grid());
        REQUIRE(g1.tokens.size() == static_cast<size_t>(a.cfg.seq_len()));
        for (uint16_t tok : g1.tokens) REQUIRE(tok < a.cfg.vocab_size);
    }
    SECTION("greedy decoding ignores the rng") {
        scfg.greedy = true;
        Rng r1(1), r2(999);
        REQUIRE(sample_grid(dec, scfg, r1).tokens == sample_grid(dec, scfg, r2).tokens);
    }
    SECTION("temperature rescaling cannot change the greedy choice") {
        scfg.greedy = true;
        Rng r1(1), r2(1);
        scfg.temperature = 0.25;
        const TokenGrid cold = sample_grid(dec, scfg, r1);
        scfg.temperature = 4.0;
        const TokenGrid hot = sample_grid(dec, scfg, r2);
        REQUIRE(cold.tokens == hot.tokens);
    }
    SECTION("sampling batches draw distinct grids from one rng") {
        scfg.batch = 3;
        Rng rng(7);
        const std::vector<TokenGrid> grids = sample_batch(dec, scfg, rng);
        REQUIRE(grids.size() == 3);
        REQUIRE(grids[0].tokens != grids[1].tokens);
    }
    SECTION("invalid classes and knobs are rejected") {
        Rng rng(1);
        scfg.class_label = a.cfg.num_classes;  // the null class cannot be sampled directly
        REQUIRE_THROWS_AS(sample_grid(dec, scfg, rng), std::invalid_argument);
        scfg.class_label = 0;
        scfg.temperature = 0.0;
        REQUIRE_THROWS_AS(sample_grid(dec, scfg, rng), std::invalid_argument);
    }
}

TEST_CASE("throughput benchmark reports per-repeat times and a median rate") {
    const Assembled a = assemble(preset("tiny").model);
    const Decoder<double> dec(a.cfg, a.ps, a.lay);
    SamplingConfig scfg = preset("tiny").sample;
    scfg.batch = 2;
    Rng rng(3);
    const BenchReport rep = bench(dec, scfg, 3, rng);
    REQUIRE(rep.repeats == 3);
    REQUIRE(rep.batch == 2);
    REQUIRE(rep.samples_sec.size() == 3);
    for (double t : rep.samples_sec) REQUIRE(t > 0.0);
    REQUIRE(rep.tokens_per_sec > 0.0);
    REQUIRE(rep.images_per_sec == Catch::Approx(rep.tokens_per_sec / a.lay.len()));
    REQUIRE_THROWS_AS(bench(dec, scfg, 0, rng), std::invalid_argument);
}
