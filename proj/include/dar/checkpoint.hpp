#pragma once

// Checkpoint container: model config + named tensors in one checksummed file.

#include <fstream>
#include <sstream>
#include <string>

#include "dar/config.hpp"
#include "dar/model.hpp"

namespace dar {

inline constexpr char kCheckpointMagic[6] = {'D', 'A', 'R', 'C', 'K', '1'};

struct Checkpoint {
    ModelConfig config;
    ParamStore<float> params;
};

inline void save_checkpoint(const std::string& path, const ModelConfig& cfg,
                            const ParamStore<float>& params) {
    Json manifest = Json::array();
    int64_t offset = 0;  // float index into the payload
    for (int i = 0; i < params.count(); ++i) {
        const auto& p = params.at(i);
        manifest.push_back(Json{{"name", p.name},
                                {"rows", p.value.rows},
                                {"cols", p.value.cols},
                                {"offset", offset},
                                {"trainable", p.trainable}});
        offset += static_cast<int64_t>(p.value.size());
    }
    const Json header{{"config", to_json(cfg)},
                      {"fingerprint", config_fingerprint(cfg)},
                      {"manifest", manifest}};
    const std::string header_text = header.dump();

    std::ostringstream body(std::ios::binary);
    write_u32(body, static_cast<uint32_t>(header_text.size()));
    body.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    for (int i = 0; i < params.count(); ++i) {
        for (float v : params.at(i).value.data) write_f32(body, v);
    }
    const std::string payload = body.str();

    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    write_u32(os, crc32(payload.data(), payload.size()));
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint file: " + path);
    char magic[6];
    read_bytes(is, magic, sizeof(magic), "checkpoint magic");
    if (!std::equal(magic, magic + 6, kCheckpointMagic)) {
        throw std::runtime_error("bad checkpoint magic in " + path);
    }
    std::string rest((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    if (rest.size() < 8) throw std::runtime_error("truncated checkpoint: " + path);
    const std::string payload = rest.substr(0, rest.size() - 4);
    uint32_t stored;
    {
        std::istringstream tail(rest.substr(rest.size() - 4), std::ios::binary);
        stored = read_u32(tail, "checkpoint checksum");
    }
    if (stored != crc32(payload.data(), payload.size())) {
        throw std::runtime_error("checkpoint checksum mismatch in " + path);
    }
    std::istringstream body(payload, std::ios::binary);
    const uint32_t header_len = read_u32(body, "checkpoint header length");
    if (header_len > payload.size() - 4) throw std::runtime_error("corrupt checkpoint header length in " + path);
    std::string header_text(header_len, '\0');
    read_bytes(body, header_text.data(), header_len, "checkpoint header");
    Json header;
    try {
        header = Json::parse(header_text);
    } catch (const Json::exception& e) {
        throw std::runtime_error("corrupt checkpoint header in " + path + ": " + e.what());
    }

    Checkpoint ck;
    apply_json(header.at("config"), ck.config, "checkpoint.config");
    ck.config.validate();
    if (header.contains("fingerprint") &&
        header.at("fingerprint").get<uint32_t>() != config_fingerprint(ck.config)) {
        throw std::runtime_error("checkpoint fingerprint mismatch in " + path);
    }
    for (const auto& entry : header.at("manifest")) {
        const std::string name = entry.at("name").get<std::string>();
        const int rows = entry.at("rows").get<int>();
        const int cols = entry.at("cols").get<int>();
        const bool trainable = entry.at("trainable").get<bool>();
        Tensor<float> t(rows, cols);
        for (auto& v : t.data) v = read_f32(body, "checkpoint tensor value");
        ck.params.add(name, std::move(t), trainable);
    }
    return ck;
}

}  // namespace dar
