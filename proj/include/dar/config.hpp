#pragma once

// Configuration structs, JSON (de)serialization with unknown-key rejection,
// and the named presets (desk-scale and paper-scale).

#include <cstdint>
#include <fstream>
#include <functional>
#include <set>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "dar/common.hpp"
#include "dar/optim.hpp"
#include "dar/rope.hpp"
#include "dar/scan.hpp"

namespace dar {

using Json = nlohmann::json;

enum class AdaLnCondition : uint8_t { Class, ClassTimestep, ClassDirection };

inline const char* adaln_name(AdaLnCondition c) {
    switch (c) {
        case AdaLnCondition::Class: return "class";
        case AdaLnCondition::ClassTimestep: return "class+timestep";
        case AdaLnCondition::ClassDirection: return "class+direction";
    }
    throw std::logic_error("bad adaln condition");
}

inline AdaLnCondition adaln_from_name(const std::string& s) {
    if (s == "class") return AdaLnCondition::Class;
    if (s == "class+timestep") return AdaLnCondition::ClassTimestep;
    if (s == "class+direction") return AdaLnCondition::ClassDirection;
    throw std::invalid_argument("unknown adaln condition '" + s +
                                "' (expected class|class+timestep|class+direction)");
}

struct ModelConfig {
    int layers = 2;
    int hidden_size = 64;
    int heads = 4;
    int vocab_size = 64;      // codebook size K
    int num_classes = 8;
    int grid_height = 8;
    int grid_width = 8;
    ScanKind scan = ScanKind::Diagonal;
    RopeMode rope_mode = RopeMode::FourD;
    bool codebook_embeddings = true;  // frozen table + alignment MLP vs trainable table
    int codebook_dim = 8;
    uint64_t codebook_seed = 11;
    AdaLnCondition adaln_condition = AdaLnCondition::ClassDirection;
    double dropout = 0.0;
    double attn_dropout = 0.0;
    double class_dropout = 0.1;

    int head_dim() const { return hidden_size / heads; }
    int ffn_hidden() const { return hidden_size * 7 / 2; }
    GridShape grid() const { return GridShape{grid_height, grid_width}; }
    int seq_len() const { return grid_height * grid_width; }  // input slots = targets
    int null_class() const { return num_classes; }

    void validate() const {
        if (layers < 1) throw std::invalid_argument("model.layers must be >= 1");
        if (heads < 1 || hidden_size < 1 || hidden_size % heads != 0) {
            throw std::invalid_argument("model.hidden_size must be a positive multiple of model.heads");
        }
        if (hidden_size % 2 != 0) throw std::invalid_argument("model.hidden_size must be even");
        check_head_dim(head_dim(), rope_mode);
        if (vocab_size < 2) throw std::invalid_argument("model.vocab_size must be >= 2");
        if (num_classes < 1) throw std::invalid_argument("model.num_classes must be >= 1");
        dar::validate(grid());
        if (codebook_embeddings && codebook_dim < 1) {
            throw std::invalid_argument("model.codebook_dim must be >= 1");
        }
        for (double p : {dropout, attn_dropout, class_dropout}) {
            if (p < 0.0 || p >= 1.0) throw std::invalid_argument("model dropout rates must lie in [0, 1)");
        }
    }
};

enum class PatternFamily : uint8_t { Constant, Stripes, Checker, Gradient };

inline const char* family_name(PatternFamily f) {
    switch (f) {
        case PatternFamily::Constant: return "constant";
        case PatternFamily::Stripes: return "stripes";
        case PatternFamily::Checker: return "checker";
        case PatternFamily::Gradient: return "gradient";
    }
    throw std::logic_error("bad pattern family");
}

inline PatternFamily family_from_name(const std::string& s) {
    if (s == "constant") return PatternFamily::Constant;
    if (s == "stripes") return PatternFamily::Stripes;
    if (s == "checker") return PatternFamily::Checker;
    if (s == "gradient") return PatternFamily::Gradient;
    throw std::invalid_argument("unknown pattern family '" + s +
                                "' (expected constant|stripes|checker|gradient)");
}

struct DatasetSpec {
    int height = 8;
    int width = 8;
    int vocab_size = 64;
    int num_classes = 8;
    int samples_per_class = 64;
    double noise_rate = 0.0;
    PatternFamily family = PatternFamily::Constant;
    uint64_t seed = 5;

    void validate() const {
        dar::validate(GridShape{height, width});
        if (vocab_size < 2 || vocab_size > 65535) {
            throw std::invalid_argument("dataset.vocab_size must lie in [2, 65535]");
        }
        if (num_classes < 1) throw std::invalid_argument("dataset.num_classes must be >= 1");
        if (family == PatternFamily::Constant && num_classes > vocab_size) {
            throw std::invalid_argument("dataset.num_classes must not exceed vocab_size for constant family");
        }
        if (samples_per_class < 1) throw std::invalid_argument("dataset.samples_per_class must be >= 1");
        if (noise_rate < 0.0 || noise_rate >= 1.0) {
            throw std::invalid_argument("dataset.noise_rate must lie in [0, 1)");
        }
    }
};

struct SamplingConfig {
    double guidance_scale = 1.0;
    double scale_power = 1.0;
    double temperature = 1.0;
    int class_label = 0;
    uint64_t seed = 9;
    int batch = 4;
    bool greedy = false;

    void validate() const {
        if (guidance_scale < 1.0) throw std::invalid_argument("sample.guidance_scale must be >= 1");
        if (scale_power <= 0.0) throw std::invalid_argument("sample.scale_power must be > 0");
        if (temperature <= 0.0) throw std::invalid_argument("sample.temperature must be > 0");
        if (batch < 1) throw std::invalid_argument("sample.batch must be >= 1");
    }
};

struct TrainSettings {
    LrSchedule schedule;
    AdamWConfig adamw;
    int batch_size = 16;
    int64_t steps = 600;
    uint64_t seed = 1;
    int checkpoint_interval = 0;  // steps between mid-run checkpoints; 0 = final only
    std::string dataset_path;
    std::string checkpoint_path;

    void validate() const {
        schedule.validate();
        if (batch_size < 1) throw std::invalid_argument("train.batch_size must be >= 1");
        if (steps < 1) throw std::invalid_argument("train.steps must be >= 1");
        if (checkpoint_interval < 0) throw std::invalid_argument("train.checkpoint_interval must be >= 0");
    }
};

// Everything a run needs, mirroring the config file's four sections.
struct ConfigBundle {
    ModelConfig model;
    TrainSettings train;
    DatasetSpec dataset;
    SamplingConfig sample;
};

// ---- strict JSON access -------------------------------------------------

// Wraps one JSON object; every successful field read is recorded, and
// finish() rejects leftovers, naming the full key path.
class StrictObject {
public:
    StrictObject(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw std::invalid_argument(path_ + ": expected a JSON object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    template <typename T>
    void get(const std::string& key, T& out) {
        if (!j_.contains(key)) return;
        seen_.insert(key);
        try {
            out = j_.at(key).get<T>();
        } catch (const Json::exception&) {
            throw std::invalid_argument(path_ + "." + key + ": wrong value type");
        }
    }

    void get_enum(const std::string& key, const std::function<void(const std::string&)>& apply) {
        if (!j_.contains(key)) return;
        seen_.insert(key);
        if (!j_.at(key).is_string()) throw std::invalid_argument(path_ + "." + key + ": expected a string");
        try {
            apply(j_.at(key).get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(path_ + "." + key + ": " + e.what());
        }
    }

    Json child(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) {
                throw std::invalid_argument(path_ + "." + it.key() + ": unknown key");
            }
        }
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

// ---- section (de)serialization ------------------------------------------

inline Json to_json(const ModelConfig& m) {
    return Json{{"layers", m.layers},
                {"hidden_size", m.hidden_size},
                {"heads", m.heads},
                {"vocab_size", m.vocab_size},
                {"num_classes", m.num_classes},
                {"grid_height", m.grid_height},
                {"grid_width", m.grid_width},
                {"scan_order", scan_name(m.scan)},
                {"rope_mode", rope_name(m.rope_mode)},
                {"codebook_embeddings", m.codebook_embeddings},
                {"codebook_dim", m.codebook_dim},
                {"codebook_seed", m.codebook_seed},
                {"adaln_condition", adaln_name(m.adaln_condition)},
                {"dropout", m.dropout},
                {"attn_dropout", m.attn_dropout},
                {"class_dropout", m.class_dropout}};
}

inline void apply_json(const Json& j, ModelConfig& m, const std::string& path) {
    StrictObject o(j, path);
    o.get("layers", m.layers);
    o.get("hidden_size", m.hidden_size);
    o.get("heads", m.heads);
    o.get("vocab_size", m.vocab_size);
    o.get("num_classes", m.num_classes);
    o.get("grid_height", m.grid_height);
    o.get("grid_width", m.grid_width);
    o.get_enum("scan_order", [&](const std::string& s) { m.scan = scan_from_name(s); });
    o.get_enum("rope_mode", [&](const std::string& s) { m.rope_mode = rope_from_name(s); });
    o.get("codebook_embeddings", m.codebook_embeddings);
    o.get("codebook_dim", m.codebook_dim);
    o.get("codebook_seed", m.codebook_seed);
    o.get_enum("adaln_condition", [&](const std::string& s) { m.adaln_condition = adaln_from_name(s); });
    o.get("dropout", m.dropout);
    o.get("attn_dropout", m.attn_dropout);
    o.get("class_dropout", m.class_dropout);
    o.finish();
}

inline Json to_json(const TrainSettings& t) {
    return Json{{"base_lr", t.schedule.base_lr},
                {"warmup_epochs", t.schedule.warmup_epochs},
                {"total_epochs", t.schedule.total_epochs},
                {"ending_lr", t.schedule.ending_lr},
                {"steps_per_epoch", t.schedule.steps_per_epoch},
                {"beta1", t.adamw.beta1},
                {"beta2", t.adamw.beta2},
                {"eps", t.adamw.eps},
                {"weight_decay", t.adamw.weight_decay},
                {"grad_clip", t.adamw.clip},
                {"batch_size", t.batch_size},
                {"steps", t.steps},
                {"seed", t.seed},
                {"checkpoint_interval", t.checkpoint_interval},
                {"dataset_path", t.dataset_path},
                {"checkpoint_path", t.checkpoint_path}};
}

inline void apply_json(const Json& j, TrainSettings& t, const std::string& path) {
    StrictObject o(j, path);
    o.get("base_lr", t.schedule.base_lr);
    o.get("warmup_epochs", t.schedule.warmup_epochs);
    o.get("total_epochs", t.schedule.total_epochs);
    o.get("ending_lr", t.schedule.ending_lr);
    o.get("steps_per_epoch", t.schedule.steps_per_epoch);
    o.get("beta1", t.adamw.beta1);
    o.get("beta2", t.adamw.beta2);
    o.get("eps", t.adamw.eps);
    o.get("weight_decay", t.adamw.weight_decay);
    o.get("grad_clip", t.adamw.clip);
    o.get("batch_size", t.batch_size);
    o.get("steps", t.steps);
    o.get("seed", t.seed);
    o.get("checkpoint_interval", t.checkpoint_interval);
    o.get("dataset_path", t.dataset_path);
    o.get("checkpoint_path", t.checkpoint_path);
    o.finish();
}

inline Json to_json(const DatasetSpec& d) {
    return Json{{"height", d.height},
                {"width", d.width},
                {"vocab_size", d.vocab_size},
                {"num_classes", d.num_classes},
                {"samples_per_class", d.samples_per_class},
                {"noise_rate", d.noise_rate},
                {"family", family_name(d.family)},
                {"seed", d.seed}};
}

inline void apply_json(const Json& j, DatasetSpec& d, const std::string& path) {
    StrictObject o(j, path);
    o.get("height", d.height);
    o.get("width", d.width);
    o.get("vocab_size", d.vocab_size);
    o.get("num_classes", d.num_classes);
    o.get("samples_per_class", d.samples_per_class);
    o.get("noise_rate", d.noise_rate);
    o.get_enum("family", [&](const std::string& s) { d.family = family_from_name(s); });
    o.get("seed", d.seed);
    o.finish();
}

inline Json to_json(const SamplingConfig& s) {
    return Json{{"guidance_scale", s.guidance_scale},
                {"scale_power", s.scale_power},
                {"temperature", s.temperature},
                {"class_label", s.class_label},
                {"seed", s.seed},
                {"batch", s.batch},
                {"greedy", s.greedy}};
}

inline void apply_json(const Json& j, SamplingConfig& s, const std::string& path) {
    StrictObject o(j, path);
    o.get("guidance_scale", s.guidance_scale);
    o.get("scale_power", s.scale_power);
    o.get("temperature", s.temperature);
    o.get("class_label", s.class_label);
    o.get("seed", s.seed);
    o.get("batch", s.batch);
    o.get("greedy", s.greedy);
    o.finish();
}

inline Json to_json(const ConfigBundle& b) {
    return Json{{"model", to_json(b.model)},
                {"train", to_json(b.train)},
                {"dataset", to_json(b.dataset)},
                {"sample", to_json(b.sample)}};
}

// Overlay a four-section document onto an existing bundle.
inline void apply_json(const Json& j, ConfigBundle& b) {
    StrictObject o(j, "config");
    if (o.has("model")) apply_json(o.child("model"), b.model, "model");
    if (o.has("train")) apply_json(o.child("train"), b.train, "train");
    if (o.has("dataset")) apply_json(o.child("dataset"), b.dataset, "dataset");
    if (o.has("sample")) apply_json(o.child("sample"), b.sample, "sample");
    o.finish();
}

inline ConfigBundle load_bundle_file(const std::string& path, ConfigBundle base = {}) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open config file: " + path);
    Json j;
    try {
        j = Json::parse(is);
    } catch (const Json::exception& e) {
        throw std::invalid_argument("config file " + path + ": " + e.what());
    }
    apply_json(j, base);
    return base;
}

// CRC of the canonical model-section dump; stamped into checkpoints and
// evaluation reports so artifacts can be matched up.
inline uint32_t config_fingerprint(const ModelConfig& m) {
    const std::string s = to_json(m).dump();
    return crc32(s.data(), s.size());
}

// ---- presets -------------------------------------------------------------

// Smallest end-to-end model: 2d rope only (head_dim 4), used by the
// gradient-check command.
inline ConfigBundle tiny_preset() {
    ConfigBundle b;
    b.model.layers = 2;
    b.model.hidden_size = 16;
    b.model.heads = 4;
    b.model.vocab_size = 16;
    b.model.num_classes = 4;
    b.model.grid_height = 4;
    b.model.grid_width = 4;
    b.model.scan = ScanKind::Diagonal;
    b.model.rope_mode = RopeMode::TwoD;
    b.model.codebook_embeddings = true;
    b.model.codebook_dim = 8;
    b.model.adaln_condition = AdaLnCondition::ClassDirection;
    b.model.dropout = 0.0;
    b.model.attn_dropout = 0.0;
    b.model.class_dropout = 0.1;
    b.train.schedule = LrSchedule{2e-3, 1, 10, 1e-5, 20};
    b.train.batch_size = 8;
    b.train.steps = 200;
    b.dataset = DatasetSpec{4, 4, 16, 4, 64, 0.0, PatternFamily::Stripes, 5};
    b.sample = SamplingConfig{1.5, 1.0, 1.0, 0, 9, 4, false};
    return b;
}

// Desk-scale trainable model; memorizes the constant-pattern dataset.
inline ConfigBundle desk_preset() {
    ConfigBundle b;
    b.model.layers = 2;
    b.model.hidden_size = 64;
    b.model.heads = 4;
    b.model.vocab_size = 64;
    b.model.num_classes = 8;
    b.model.grid_height = 8;
    b.model.grid_width = 8;
    b.model.scan = ScanKind::Diagonal;
    b.model.rope_mode = RopeMode::FourD;
    b.model.codebook_embeddings = true;
    b.model.codebook_dim = 8;
    b.model.adaln_condition = AdaLnCondition::ClassDirection;
    b.model.dropout = 0.0;
    b.model.attn_dropout = 0.0;
    b.model.class_dropout = 0.1;
    b.train.schedule = LrSchedule{2e-3, 1, 20, 1e-5, 30};
    b.train.batch_size = 16;
    b.train.steps = 600;
    b.dataset = DatasetSpec{8, 8, 64, 8, 64, 0.0, PatternFamily::Constant, 5};
    b.sample = SamplingConfig{1.0, 1.0, 1.0, 0, 9, 8, false};
    return b;
}

// Reduced desk model used for the ablation matrix (head_dim 8 keeps 4d rope
// available).
inline ConfigBundle desk_small_preset() {
    ConfigBundle b;
    b.model.layers = 2;
    b.model.hidden_size = 32;
    b.model.heads = 4;
    b.model.vocab_size = 32;
    b.model.num_classes = 6;
    b.model.grid_height = 6;
    b.model.grid_width = 6;
    b.model.scan = ScanKind::Diagonal;
    b.model.rope_mode = RopeMode::FourD;
    b.model.codebook_embeddings = true;
    b.model.codebook_dim = 8;
    b.model.adaln_condition = AdaLnCondition::ClassDirection;
    b.model.dropout = 0.0;
    b.model.attn_dropout = 0.0;
    b.model.class_dropout = 0.1;
    b.train.schedule = LrSchedule{2e-3, 1, 10, 1e-5, 20};
    b.train.batch_size = 8;
    b.train.steps = 200;
    b.dataset = DatasetSpec{6, 6, 32, 6, 48, 0.02, PatternFamily::Stripes, 5};
    b.sample = SamplingConfig{2.0, 1.0, 1.0, 0, 9, 2, false};
    return b;
}

// Published configurations. Never trained here; kept for config parity and
// serialization tests.
inline ConfigBundle paper_preset(char size) {
    ConfigBundle b;
    b.model.vocab_size = 16384;
    b.model.num_classes = 1000;
    b.model.grid_height = 16;
    b.model.grid_width = 16;
    b.model.scan = ScanKind::Diagonal;
    b.model.rope_mode = RopeMode::FourD;
    b.model.codebook_embeddings = true;
    b.model.codebook_dim = 256;
    b.model.adaln_condition = AdaLnCondition::ClassDirection;
    b.model.dropout = 0.1;
    b.model.attn_dropout = 0.1;
    b.model.class_dropout = 0.1;
    b.train.adamw = AdamWConfig{0.9, 0.96, 1e-8, 0.05, 1.0};
    b.train.schedule.warmup_epochs = 100;
    b.train.schedule.total_epochs = 400;
    b.train.schedule.ending_lr = 1e-5;
    b.train.schedule.steps_per_epoch = 625;
    b.train.batch_size = 2048;
    b.train.steps = b.train.schedule.total_steps();
    b.train.seed = 0;
    switch (size) {
        case 'b':
            b.model.layers = 24;
            b.model.hidden_size = 1024;
            b.model.heads = 16;
            b.train.schedule.base_lr = 1e-3;
            b.sample.temperature = 1.02;
            b.sample.scale_power = 0.88;
            b.sample.guidance_scale = 4.7;
            break;
        case 'l':
            b.model.layers = 36;
            b.model.hidden_size = 1280;
            b.model.heads = 20;
            b.train.schedule.base_lr = 4e-4;
            b.sample.temperature = 1.04;
            b.sample.scale_power = 0.78;
            b.sample.guidance_scale = 4.5;
            break;
        case 'x':
            b.model.layers = 48;
            b.model.hidden_size = 1536;
            b.model.heads = 24;
            b.train.schedule.base_lr = 4e-4;
            b.sample.temperature = 1.02;
            b.sample.scale_power = 0.56;
            b.sample.guidance_scale = 4.3;
            break;
        default:
            throw std::invalid_argument("paper preset size must be b, l, or x");
    }
    b.sample.class_label = 0;
    b.sample.seed = 9;
    b.sample.batch = 8;
    b.sample.greedy = false;
    b.dataset = DatasetSpec{16, 16, 16384, 1000, 64, 0.0, PatternFamily::Gradient, 5};
    return b;
}

inline ConfigBundle preset(const std::string& name) {
    if (name == "tiny") return tiny_preset();
    if (name == "desk") return desk_preset();
    if (name == "desk-small") return desk_small_preset();
    if (name == "paper-b") return paper_preset('b');
    if (name == "paper-l") return paper_preset('l');
    if (name == "paper-xl") return paper_preset('x');
    throw std::invalid_argument("unknown preset '" + name +
                                "' (expected tiny|desk|desk-small|paper-b|paper-l|paper-xl)");
}

}  // namespace dar
