#pragma once

// Classifier-free-guidance sampling under the power-cosine weight schedule,
// plus a throughput micro-benchmark.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <vector>

#include "dar/decoder.hpp"

namespace dar {

// w(t) = 1 + (s-1) * (1 - cos(pi * ((t+1)/T)^alpha)) / 2: nearly unguided at
// the first step, exactly s at the last.
inline double guidance_at(int t, int total, double s, double alpha) {
    if (t < 0 || t >= total) throw std::invalid_argument("guidance_at: step out of range");
    const double progress = std::pow(static_cast<double>(t + 1) / total, alpha);
    return 1.0 + (s - 1.0) * (1.0 - std::cos(std::numbers::pi * progress)) / 2.0;
}

template <typename T>
inline std::vector<T> cfg_combine(const std::vector<T>& cond, const std::vector<T>& uncond, double w) {
    if (cond.size() != uncond.size()) throw std::invalid_argument("cfg_combine: shape mismatch");
    if (w == 1.0) return cond;  // unguided: conditional logits pass through unchanged
    std::vector<T> guided(cond.size());
    for (size_t i = 0; i < cond.size(); ++i) {
        guided[i] = uncond[i] + static_cast<T>(w) * (cond[i] - uncond[i]);
    }
    return guided;
}

// Softmax in double, then inverse-CDF draw; the final index guards against
// accumulated rounding.
template <typename T>
inline int sample_categorical(const std::vector<T>& logits, Rng& rng) {
    double mx = -std::numeric_limits<double>::infinity();
    for (T v : logits) mx = std::max(mx, static_cast<double>(v));
    std::vector<double> p(logits.size());
    double denom = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(static_cast<double>(logits[i]) - mx);
        denom += p[i];
    }
    const double u = rng.uniform() * denom;
    double acc = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(p.size()) - 1;
}

template <typename T>
inline int argmax_index(const std::vector<T>& logits) {
    return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

// Generate one grid: two streams (conditional on the class, unconditional on
// the null embedding) share the rotary layout; logits are combined with the
// scheduled guidance weight, divided by temperature, then sampled.
template <typename T>
inline TokenGrid sample_grid(const Decoder<T>& dec, const SamplingConfig& scfg, Rng& rng) {
    scfg.validate();
    const ModelConfig& cfg = dec.config();
    if (scfg.class_label < 0 || scfg.class_label >= cfg.num_classes) {
        throw std::invalid_argument("sample: class label out of range");
    }
    const SequenceLayout& lay = dec.layout();
    const int total = lay.len();
    auto cond_stream = dec.new_stream(scfg.class_label);
    auto uncond_stream = dec.new_stream(cfg.null_class());
    TokenGrid grid;
    grid.shape = lay.shape;
    grid.class_label = scfg.class_label;
    grid.tokens.resize(static_cast<size_t>(total));
    int prev = -1;
    for (int t = 0; t < total; ++t) {
        const std::vector<T> cond = dec.step(cond_stream, prev);
        const std::vector<T> uncond = dec.step(uncond_stream, prev);
        const double w = guidance_at(t, total, scfg.guidance_scale, scfg.scale_power);
        std::vector<T> guided = cfg_combine(cond, uncond, w);
        for (T& v : guided) v = static_cast<T>(v / scfg.temperature);
        const int tok = scfg.greedy ? argmax_index(guided) : sample_categorical(guided, rng);
        const Position2D pos = lay.order[static_cast<size_t>(t)];
        grid.at(pos.x, pos.y) = static_cast<uint16_t>(tok);
        prev = tok;
    }
    return grid;
}

template <typename T>
inline std::vector<TokenGrid> sample_batch(const Decoder<T>& dec, const SamplingConfig& scfg, Rng& rng) {
    std::vector<TokenGrid> grids;
    grids.reserve(static_cast<size_t>(scfg.batch));
    for (int i = 0; i < scfg.batch; ++i) grids.push_back(sample_grid(dec, scfg, rng));
    return grids;
}

struct BenchReport {
    double tokens_per_sec = 0.0;
    double images_per_sec = 0.0;
    int repeats = 0;
    int batch = 0;
    std::vector<double> samples_sec;  // per-repeat wall time
};

// Median wall-clock throughput over `repeats` timed runs of `batch` grids;
// model load/setup is excluded by construction.
template <typename T>
inline BenchReport bench(const Decoder<T>& dec, SamplingConfig scfg, int repeats, Rng& rng) {
    if (repeats < 1) throw std::invalid_argument("bench: repeats must be >= 1");
    BenchReport rep;
    rep.repeats = repeats;
    rep.batch = scfg.batch;
    const int tokens = dec.layout().len() * scfg.batch;
    for (int r = 0; r < repeats; ++r) {
        const auto start = std::chrono::steady_clock::now();
        (void)sample_batch(dec, scfg, rng);
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
        rep.samples_sec.push_back(dt.count());
    }
    std::vector<double> sorted = rep.samples_sec;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    rep.tokens_per_sec = tokens / median;
    rep.images_per_sec = rep.tokens_per_sec / dec.layout().len();
    return rep;
}

}  // namespace dar
