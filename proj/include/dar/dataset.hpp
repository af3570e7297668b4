#pragma once

// Synthetic token-grid dataset: per-class deterministic patterns with
// optional uniform corruption, plus file IO and train/held-out splitting.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dar/common.hpp"
#include "dar/config.hpp"

namespace dar {

struct Dataset {
    int height = 0;
    int width = 0;
    int vocab_size = 0;
    int num_classes = 0;
    std::vector<uint16_t> classes;  // one per sample
    std::vector<uint16_t> tokens;   // count * h * w, row-major grids

    int count() const { return static_cast<int>(classes.size()); }
    GridShape shape() const { return GridShape{height, width}; }
    int cells() const { return height * width; }
    const uint16_t* grid(int i) const { return tokens.data() + static_cast<size_t>(i) * cells(); }
};

// The clean (pre-noise) token for class k at cell (i, j).
inline int pattern_token(PatternFamily family, int k, int i, int j, int h, int w, int vocab) {
    switch (family) {
        case PatternFamily::Constant:
            return k;
        case PatternFamily::Stripes:
            return (k + i) % vocab;
        case PatternFamily::Checker:
            return (i + j) % 2 == 0 ? k : (k + vocab / 2) % vocab;
        case PatternFamily::Gradient: {
            const int span = h + w - 2;
            const int ramp = span > 0 ? (i + j) * (vocab - 1) / span : 0;
            return (k + ramp) % vocab;
        }
    }
    throw std::logic_error("bad pattern family");
}

inline Dataset generate_dataset(const DatasetSpec& spec) {
    spec.validate();
    Dataset ds;
    ds.height = spec.height;
    ds.width = spec.width;
    ds.vocab_size = spec.vocab_size;
    ds.num_classes = spec.num_classes;
    const int cells = spec.height * spec.width;
    ds.classes.reserve(static_cast<size_t>(spec.num_classes) * spec.samples_per_class);
    ds.tokens.reserve(ds.classes.capacity() * static_cast<size_t>(cells));
    Rng rng(spec.seed);
    for (int k = 0; k < spec.num_classes; ++k) {
        for (int s = 0; s < spec.samples_per_class; ++s) {
            ds.classes.push_back(static_cast<uint16_t>(k));
            for (int i = 0; i < spec.height; ++i) {
                for (int j = 0; j < spec.width; ++j) {
                    int tok = pattern_token(spec.family, k, i, j, spec.height, spec.width, spec.vocab_size);
                    if (spec.noise_rate > 0.0 && rng.uniform() < spec.noise_rate) {
                        tok = static_cast<int>(rng.below(static_cast<uint64_t>(spec.vocab_size)));
                    }
                    ds.tokens.push_back(static_cast<uint16_t>(tok));
                }
            }
        }
    }
    return ds;
}

inline constexpr char kDatasetMagic[6] = {'D', 'A', 'R', 'D', 'S', '1'};

inline std::string serialize_dataset(const Dataset& ds) {
    std::ostringstream body(std::ios::binary);
    write_u32(body, static_cast<uint32_t>(ds.height));
    write_u32(body, static_cast<uint32_t>(ds.width));
    write_u32(body, static_cast<uint32_t>(ds.vocab_size));
    write_u32(body, static_cast<uint32_t>(ds.num_classes));
    write_u32(body, static_cast<uint32_t>(ds.count()));
    for (int i = 0; i < ds.count(); ++i) {
        write_u16(body, ds.classes[static_cast<size_t>(i)]);
        const uint16_t* g = ds.grid(i);
        for (int c = 0; c < ds.cells(); ++c) write_u16(body, g[c]);
    }
    return body.str();
}

// CRC of the serialized payload; doubles as the file checksum and the
// fingerprint reports use to prove runs shared a dataset.
inline uint32_t dataset_fingerprint(const Dataset& ds) {
    const std::string payload = serialize_dataset(ds);
    return crc32(payload.data(), payload.size());
}

inline void save_dataset(const Dataset& ds, const std::string& path) {
    const std::string payload = serialize_dataset(ds);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os.write(kDatasetMagic, sizeof(kDatasetMagic));
    os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    write_u32(os, crc32(payload.data(), payload.size()));
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline Dataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open dataset file: " + path);
    char magic[6];
    read_bytes(is, magic, sizeof(magic), "dataset magic");
    if (!std::equal(magic, magic + 6, kDatasetMagic)) {
        throw std::runtime_error("bad dataset magic in " + path);
    }
    std::string rest((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    if (rest.size() < 24) throw std::runtime_error("truncated dataset: " + path);
    const std::string payload = rest.substr(0, rest.size() - 4);
    uint32_t stored;
    {
        std::istringstream tail(rest.substr(rest.size() - 4), std::ios::binary);
        stored = read_u32(tail, "dataset checksum");
    }
    if (stored != crc32(payload.data(), payload.size())) {
        throw std::runtime_error("dataset checksum mismatch in " + path);
    }
    std::istringstream body(payload, std::ios::binary);
    Dataset ds;
    ds.height = static_cast<int>(read_u32(body, "dataset height"));
    ds.width = static_cast<int>(read_u32(body, "dataset width"));
    ds.vocab_size = static_cast<int>(read_u32(body, "dataset vocab"));
    ds.num_classes = static_cast<int>(read_u32(body, "dataset classes"));
    const uint32_t count = read_u32(body, "dataset count");
    validate(GridShape{ds.height, ds.width});
    ds.classes.resize(count);
    ds.tokens.resize(static_cast<size_t>(count) * ds.cells());
    for (uint32_t i = 0; i < count; ++i) {
        ds.classes[i] = read_u16(body, "dataset class label");
        for (int c = 0; c < ds.cells(); ++c) {
            const uint16_t tok = read_u16(body, "dataset token");
            if (tok >= ds.vocab_size) throw std::runtime_error("dataset token out of range in " + path);
            ds.tokens[static_cast<size_t>(i) * ds.cells() + c] = tok;
        }
    }
    return ds;
}

struct SplitIndices {
    std::vector<int> train;
    std::vector<int> heldout;
};

// Held-out split: the last 10% of each class, by sample index.
inline SplitIndices split_dataset(const Dataset& ds) {
    SplitIndices split;
    std::vector<std::vector<int>> by_class(static_cast<size_t>(ds.num_classes));
    for (int i = 0; i < ds.count(); ++i) by_class[ds.classes[static_cast<size_t>(i)]].push_back(i);
    for (auto& members : by_class) {
        const int held = static_cast<int>(members.size()) / 10;
        const int cut = static_cast<int>(members.size()) - held;
        for (int i = 0; i < static_cast<int>(members.size()); ++i) {
            (i < cut ? split.train : split.heldout).push_back(members[static_cast<size_t>(i)]);
        }
    }
    return split;
}

}  // namespace dar
