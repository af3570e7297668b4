#pragma once

// Fixed vector-quantization codebook: deterministic generation, nearest-code
// quantization, decoding back to features, PPM rendering, and file IO.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dar/common.hpp"
#include "dar/scan.hpp"
#include "dar/tensor.hpp"

namespace dar {

struct Codebook {
    int k = 0;          // code count
    int d = 0;          // code dimension
    uint64_t seed = 0;  // generation seed
    Tensor<float> codes;  // k x d

    const float* code(int j) const { return codes.row(j); }
};

struct TokenGrid {
    GridShape shape;
    int class_label = 0;
    std::vector<uint16_t> tokens;  // h*w, scan-independent row-major storage

    uint16_t& at(int i, int j) { return tokens[static_cast<size_t>(i) * shape.w + j]; }
    uint16_t at(int i, int j) const { return tokens[static_cast<size_t>(i) * shape.w + j]; }
};

inline Codebook make_codebook(int k, int d, uint64_t seed) {
    if (k < 2) throw std::invalid_argument("codebook: need at least 2 codes");
    if (d < 1) throw std::invalid_argument("codebook: code dimension must be positive");
    Codebook cb;
    cb.k = k;
    cb.d = d;
    cb.seed = seed;
    cb.codes = Tensor<float>(k, d);
    Rng rng(seed);
    for (auto& x : cb.codes.data) x = static_cast<float>(rng.normal());
    // Unit-variance draws collide with vanishing probability; nudge any
    // duplicate row so distinctness holds unconditionally.
    for (int i = 1; i < k; ++i) {
        for (int j = 0; j < i; ++j) {
            if (std::equal(cb.codes.row(i), cb.codes.row(i) + d, cb.codes.row(j))) {
                cb.codes.at(i, 0) = std::nextafter(cb.codes.at(i, 0), std::numeric_limits<float>::max());
                j = -1;  // recheck against all earlier rows
            }
        }
    }
    return cb;
}

// Nearest code by squared Euclidean distance; ties break to the lowest index.
inline int nearest_code(const float* feature, const Codebook& cb) {
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int j = 0; j < cb.k; ++j) {
        const float* c = cb.code(j);
        double dist = 0.0;
        for (int t = 0; t < cb.d; ++t) {
            const double diff = static_cast<double>(feature[t]) - c[t];
            dist += diff * diff;
        }
        if (dist < best_dist) {
            best_dist = dist;
            best = j;
        }
    }
    return best;
}

// features: (h*w) x d, row-major over grid cells.
inline TokenGrid quantize(const Tensor<float>& features, GridShape shape, const Codebook& cb,
                          int class_label = 0) {
    validate(shape);
    if (features.cols != cb.d) throw std::invalid_argument("quantize: feature dimension != code dimension");
    if (features.rows != shape.tokens()) throw std::invalid_argument("quantize: feature rows != grid cells");
    TokenGrid grid;
    grid.shape = shape;
    grid.class_label = class_label;
    grid.tokens.resize(static_cast<size_t>(shape.tokens()));
    for (int n = 0; n < features.rows; ++n) {
        grid.tokens[static_cast<size_t>(n)] = static_cast<uint16_t>(nearest_code(features.row(n), cb));
    }
    return grid;
}

inline Tensor<float> decode(const TokenGrid& grid, const Codebook& cb) {
    Tensor<float> features(grid.shape.tokens(), cb.d);
    for (int n = 0; n < features.rows; ++n) {
        const int tok = grid.tokens[static_cast<size_t>(n)];
        if (tok >= cb.k) throw std::invalid_argument("decode: token index out of range");
        std::copy(cb.code(tok), cb.code(tok) + cb.d, features.row(n));
    }
    return features;
}

// Binary PPM rendering: the first 3 feature channels map affinely from
// [-3, 3] to [0, 255]; each grid cell becomes a render_scale^2 pixel block.
inline void render_ppm(const TokenGrid& grid, const Codebook& cb, int render_scale, std::ostream& os) {
    if (render_scale < 1) throw std::invalid_argument("render_ppm: scale must be positive");
    const Tensor<float> features = decode(grid, cb);
    const int ph = grid.shape.h * render_scale;
    const int pw = grid.shape.w * render_scale;
    os << "P6\n" << pw << " " << ph << "\n255\n";
    auto to_byte = [](float v) {
        const float scaled = (v + 3.0f) / 6.0f * 255.0f;
        return static_cast<unsigned char>(std::clamp(scaled, 0.0f, 255.0f));
    };
    std::vector<unsigned char> row(static_cast<size_t>(pw) * 3);
    for (int py = 0; py < ph; ++py) {
        const int i = py / render_scale;
        for (int px = 0; px < pw; ++px) {
            const int j = px / render_scale;
            const float* f = features.row(i * grid.shape.w + j);
            for (int c = 0; c < 3; ++c) {
                row[static_cast<size_t>(px) * 3 + c] = to_byte(c < cb.d ? f[c] : 0.0f);
            }
        }
        os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
}

inline void render_ppm_file(const TokenGrid& grid, const Codebook& cb, int render_scale,
                            const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    render_ppm(grid, cb, render_scale, os);
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline constexpr char kCodebookMagic[6] = {'D', 'A', 'R', 'C', 'B', '1'};

inline void save_codebook(const Codebook& cb, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os.write(kCodebookMagic, sizeof(kCodebookMagic));
    std::string payload;
    {
        std::ostringstream buf(std::ios::binary);
        write_u32(buf, static_cast<uint32_t>(cb.k));
        write_u32(buf, static_cast<uint32_t>(cb.d));
        write_u64(buf, cb.seed);
        for (float v : cb.codes.data) write_f32(buf, v);
        payload = buf.str();
    }
    os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    write_u32(os, crc32(payload.data(), payload.size()));
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline Codebook load_codebook(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open codebook file: " + path);
    char magic[6];
    read_bytes(is, magic, sizeof(magic), "codebook magic");
    if (!std::equal(magic, magic + 6, kCodebookMagic)) {
        throw std::runtime_error("bad codebook magic in " + path);
    }
    std::string payload(16, '\0');
    read_bytes(is, payload.data(), 16, "codebook header");
    uint32_t k, d;
    uint64_t seed;
    {
        std::istringstream buf(payload, std::ios::binary);
        k = read_u32(buf, "codebook K");
        d = read_u32(buf, "codebook D");
        seed = read_u64(buf, "codebook seed");
    }
    if (k < 2 || d < 1 || k > (1u << 24) || d > (1u << 24)) {
        throw std::runtime_error("implausible codebook dimensions in " + path);
    }
    const size_t body = static_cast<size_t>(k) * d * 4;
    payload.resize(16 + body);
    read_bytes(is, payload.data() + 16, body, "codebook codes");
    const uint32_t stored = read_u32(is, "codebook checksum");
    if (stored != crc32(payload.data(), payload.size())) {
        throw std::runtime_error("codebook checksum mismatch in " + path);
    }
    Codebook cb;
    cb.k = static_cast<int>(k);
    cb.d = static_cast<int>(d);
    cb.seed = seed;
    cb.codes = Tensor<float>(cb.k, cb.d);
    std::istringstream buf(payload.substr(16), std::ios::binary);
    for (auto& v : cb.codes.data) v = read_f32(buf, "codebook code value");
    return cb;
}

}  // namespace dar
