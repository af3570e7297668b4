#pragma once

// The autoregressive grid transformer: sequence layout over a scan order,
// parameter initialization (frozen codebook embeddings + alignment MLP),
// and the tape-building forward pass with AdaLN conditioning.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dar/codebook.hpp"
#include "dar/config.hpp"
#include "dar/tape.hpp"

namespace dar {

// Per-slot geometry of one sequence. Slot 0 carries the class token with an
// off-grid current position; slot i >= 1 carries image token i-1, whose
// "next" is the position about to be generated.
struct SequenceLayout {
    GridShape shape;
    ScanKind scan = ScanKind::Diagonal;
    std::vector<Position2D> order;      // generation positions, length T
    std::vector<Position4D> slots;      // input slots, length T
    std::vector<DirectionLabel> dirs;   // per-slot generation direction

    int len() const { return static_cast<int>(slots.size()); }
};

inline SequenceLayout build_layout(GridShape shape, ScanKind kind) {
    const ScanOrder so = make_order(shape, kind);
    SequenceLayout lay;
    lay.shape = shape;
    lay.scan = kind;
    lay.order = so.positions;
    const int t = shape.tokens();
    lay.slots.resize(static_cast<size_t>(t));
    lay.dirs.resize(static_cast<size_t>(t));
    lay.slots[0] = Position4D{Position2D{-1, -1}, so.positions[0]};
    lay.dirs[0] = DirectionLabel::Start;
    for (int i = 1; i < t; ++i) {
        lay.slots[static_cast<size_t>(i)] = Position4D{so.positions[static_cast<size_t>(i - 1)],
                                                       so.positions[static_cast<size_t>(i)]};
        lay.dirs[static_cast<size_t>(i)] = so.directions[static_cast<size_t>(i - 1)];
    }
    return lay;
}

inline std::shared_ptr<const RotationTable> layout_rotation(const SequenceLayout& lay, RopeMode mode,
                                                            int head_dim) {
    if (mode == RopeMode::TwoD) {
        std::vector<Position2D> cur(lay.slots.size());
        for (size_t i = 0; i < lay.slots.size(); ++i) cur[i] = lay.slots[i].cur;
        return std::make_shared<RotationTable>(rotation_table_2d(cur, head_dim));
    }
    return std::make_shared<RotationTable>(rotation_table_4d(lay.slots, head_dim));
}

// ---- parameters -----------------------------------------------------------

namespace detail {

template <typename T>
inline Tensor<T> random_init(Rng& rng, int rows, int cols, double std_dev) {
    Tensor<T> t(rows, cols);
    for (auto& x : t.data) x = static_cast<T>(rng.normal() * std_dev);
    return t;
}

template <typename T>
inline Tensor<T> filled(int rows, int cols, T v) {
    Tensor<T> t(rows, cols);
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
}

}  // namespace detail

// Variance-scaled trunk weights (1/sqrt(fan_in)), small embeddings and output
// head (0.02), unit gains, zero AdaLN projections and biases. Deterministic
// in the seed. The codebook table is copied in frozen when enabled.
template <typename T>
inline ParamStore<T> init_params(const ModelConfig& cfg, const Codebook* cb, uint64_t seed) {
    cfg.validate();
    const int h = cfg.hidden_size;
    const int f = cfg.ffn_hidden();
    ParamStore<T> ps;
    Rng rng(seed);
    const double emb_std = 0.02;
    if (cfg.codebook_embeddings) {
        if (cb == nullptr) throw std::invalid_argument("init_params: codebook required");
        if (cb->k != cfg.vocab_size || cb->d != cfg.codebook_dim) {
            throw std::invalid_argument("init_params: codebook dims do not match config");
        }
        Tensor<T> table(cb->k, cb->d);
        for (size_t i = 0; i < table.data.size(); ++i) table.data[i] = static_cast<T>(cb->codes.data[i]);
        ps.add("tok.codebook", std::move(table), /*trainable=*/false);
        ps.add("tok.mlp.w1", detail::random_init<T>(rng, cfg.codebook_dim, h, 1.0 / std::sqrt(cfg.codebook_dim)));
        ps.add("tok.mlp.b1", Tensor<T>(1, h));
        ps.add("tok.mlp.w2", detail::random_init<T>(rng, h, h, 1.0 / std::sqrt(h)));
        ps.add("tok.mlp.b2", Tensor<T>(1, h));
    } else {
        ps.add("tok.table", detail::random_init<T>(rng, cfg.vocab_size, h, emb_std));
    }
    ps.add("cls.table", detail::random_init<T>(rng, cfg.num_classes + 1, h, emb_std));
    if (cfg.adaln_condition == AdaLnCondition::ClassDirection) {
        ps.add("dir.table", detail::random_init<T>(rng, kNumDirections, h, emb_std));
    } else if (cfg.adaln_condition == AdaLnCondition::ClassTimestep) {
        ps.add("time.table", detail::random_init<T>(rng, cfg.seq_len(), h, emb_std));
    }
    const double trunk = 1.0 / std::sqrt(h);
    for (int l = 0; l < cfg.layers; ++l) {
        const std::string lp = "layer" + std::to_string(l);
        ps.add(lp + ".attn.wq", detail::random_init<T>(rng, h, h, trunk));
        ps.add(lp + ".attn.wk", detail::random_init<T>(rng, h, h, trunk));
        ps.add(lp + ".attn.wv", detail::random_init<T>(rng, h, h, trunk));
        ps.add(lp + ".attn.wo", detail::random_init<T>(rng, h, h, trunk));
        for (const char* sub : {".adaln1", ".adaln2"}) {
            ps.add(lp + sub + ".shift.w", Tensor<T>(h, h));
            ps.add(lp + sub + ".shift.b", Tensor<T>(1, h));
            ps.add(lp + sub + ".scale.w", Tensor<T>(h, h));
            ps.add(lp + sub + ".scale.b", Tensor<T>(1, h));
        }
        ps.add(lp + ".ffn.win", detail::random_init<T>(rng, h, 2 * f, trunk));
        ps.add(lp + ".ffn.wdown", detail::random_init<T>(rng, f, h, 1.0 / std::sqrt(f)));
    }
    ps.add("final.gain", detail::filled<T>(1, h, T{1}));
    ps.add("head.w", detail::random_init<T>(rng, h, cfg.vocab_size, emb_std));
    ps.add("head.b", Tensor<T>(1, cfg.vocab_size));
    return ps;
}

// Trainable-scalar count, computed arithmetically so paper-scale presets can
// be sized without materializing their weights.
inline int64_t param_count(const ModelConfig& cfg) {
    const int64_t h = cfg.hidden_size;
    const int64_t f = cfg.ffn_hidden();
    const int64_t k = cfg.vocab_size;
    int64_t n = 0;
    if (cfg.codebook_embeddings) {
        n += cfg.codebook_dim * h + h + h * h + h;  // alignment MLP (frozen table excluded)
    } else {
        n += k * h;
    }
    n += (cfg.num_classes + 1) * h;
    if (cfg.adaln_condition == AdaLnCondition::ClassDirection) n += kNumDirections * h;
    if (cfg.adaln_condition == AdaLnCondition::ClassTimestep) n += static_cast<int64_t>(cfg.seq_len()) * h;
    int64_t per_layer = 4 * h * h;                 // attention
    per_layer += 2 * (2 * h * h + 2 * h);          // two AdaLN sub-blocks
    per_layer += h * 2 * f + f * h;                // swiglu in + down
    n += cfg.layers * per_layer;
    n += h;          // final gain
    n += h * k + k;  // head
    return n;
}

// ---- forward --------------------------------------------------------------

// One training/eval batch: per-sequence class labels (already subjected to
// any classifier-free-guidance dropout) and tokens in scan order.
struct Batch {
    int batch = 0;
    std::vector<int> classes;  // batch entries; num_classes acts as the null label
    std::vector<int> tokens;   // batch * T entries, scan order
};

template <typename T>
struct ForwardIds {
    int logits = -1;
    int loss = -1;
    std::vector<int> leaf;  // parameter index -> tape leaf id
};

template <typename T>
using NormProbe = std::function<void(const std::string& site, const Tensor<T>& normed)>;

// Builds the whole forward graph on the tape and returns the node ids needed
// by the training loop. Pre-norm blocks: x + Attn(AdaLN(RMSNorm(x))) then
// x + FFN(AdaLN(RMSNorm(x))); AdaLN computes (1 + scale) * normed + shift
// from a per-slot condition shared across layers.
template <typename T>
inline ForwardIds<T> build_forward(Tape<T>& tape, const ModelConfig& cfg, const ParamStore<T>& params,
                                   const SequenceLayout& lay, std::shared_ptr<const RotationTable> rot,
                                   const Batch& batch, bool train, Rng* drop_rng,
                                   const NormProbe<T>* probe = nullptr) {
    const int b = batch.batch;
    const int t = lay.len();
    if (t != cfg.seq_len()) throw std::invalid_argument("forward: layout length != config grid size");
    if (static_cast<int>(batch.classes.size()) != b ||
        static_cast<int>(batch.tokens.size()) != b * t) {
        throw std::invalid_argument("forward: batch arrays do not match batch*seq_len");
    }
    for (int c : batch.classes) {
        if (c < 0 || c > cfg.num_classes) throw std::invalid_argument("forward: class label out of range");
    }
    for (int tok : batch.tokens) {
        if (tok < 0 || tok >= cfg.vocab_size) throw std::invalid_argument("forward: token out of range");
    }
    if (train && (cfg.dropout > 0 || cfg.attn_dropout > 0) && drop_rng == nullptr) {
        throw std::invalid_argument("forward: dropout requires an rng in train mode");
    }

    ForwardIds<T> ids;
    ids.leaf.resize(static_cast<size_t>(params.count()));
    for (int i = 0; i < params.count(); ++i) {
        const auto& p = params.at(i);
        ids.leaf[static_cast<size_t>(i)] = tape.leaf(p.value, p.trainable);
    }
    auto pid = [&](const std::string& name) {
        const int i = params.find(name);
        if (i < 0) throw std::invalid_argument("forward: missing parameter " + name);
        return ids.leaf[static_cast<size_t>(i)];
    };

    // Inputs: slot 0 is the class token, slot i >= 1 is token i-1.
    std::vector<int> tok_in;
    tok_in.reserve(static_cast<size_t>(b) * (t - 1));
    std::vector<int> targets(static_cast<size_t>(b) * t);
    for (int s = 0; s < b; ++s) {
        for (int i = 0; i < t; ++i) targets[static_cast<size_t>(s) * t + i] = batch.tokens[static_cast<size_t>(s) * t + i];
        for (int i = 0; i + 1 < t; ++i) tok_in.push_back(batch.tokens[static_cast<size_t>(s) * t + i]);
    }
    int tok_emb;
    if (cfg.codebook_embeddings) {
        const int raw = tape.gather_rows(pid("tok.codebook"), tok_in);
        int a = tape.add_rowvec(tape.matmul(raw, pid("tok.mlp.w1")), pid("tok.mlp.b1"));
        a = tape.silu(a);
        tok_emb = tape.add_rowvec(tape.matmul(a, pid("tok.mlp.w2")), pid("tok.mlp.b2"));
    } else {
        tok_emb = tape.gather_rows(pid("tok.table"), tok_in);
    }
    const int cls_emb = tape.gather_rows(pid("cls.table"), batch.classes);
    const int catted = tape.concat_rows(cls_emb, tok_emb);
    std::vector<int> weave(static_cast<size_t>(b) * t);
    for (int s = 0; s < b; ++s) {
        weave[static_cast<size_t>(s) * t] = s;
        for (int i = 1; i < t; ++i) weave[static_cast<size_t>(s) * t + i] = b + s * (t - 1) + (i - 1);
    }
    int x = tape.gather_rows(catted, weave);
    if (train && cfg.dropout > 0) x = tape.dropout(x, cfg.dropout, *drop_rng);

    // Per-slot AdaLN condition, shared by every layer.
    std::vector<int> cls_rows(static_cast<size_t>(b) * t);
    for (int s = 0; s < b; ++s) {
        for (int i = 0; i < t; ++i) cls_rows[static_cast<size_t>(s) * t + i] = batch.classes[static_cast<size_t>(s)];
    }
    int cond = tape.gather_rows(pid("cls.table"), cls_rows);
    if (cfg.adaln_condition == AdaLnCondition::ClassDirection) {
        std::vector<int> dir_rows(static_cast<size_t>(b) * t);
        for (int s = 0; s < b; ++s) {
            for (int i = 0; i < t; ++i) {
                dir_rows[static_cast<size_t>(s) * t + i] = static_cast<int>(lay.dirs[static_cast<size_t>(i)]);
            }
        }
        cond = tape.add(cond, tape.gather_rows(pid("dir.table"), dir_rows));
    } else if (cfg.adaln_condition == AdaLnCondition::ClassTimestep) {
        std::vector<int> time_rows(static_cast<size_t>(b) * t);
        for (int s = 0; s < b; ++s) {
            for (int i = 0; i < t; ++i) time_rows[static_cast<size_t>(s) * t + i] = i;
        }
        cond = tape.add(cond, tape.gather_rows(pid("time.table"), time_rows));
    }

    auto adaln = [&](int normed, const std::string& prefix) {
        const int shift = tape.add_rowvec(tape.matmul(cond, pid(prefix + ".shift.w")), pid(prefix + ".shift.b"));
        const int scale = tape.add_rowvec(tape.matmul(cond, pid(prefix + ".scale.w")), pid(prefix + ".scale.b"));
        return tape.add(tape.add(normed, tape.mul(normed, scale)), shift);
    };
    auto probe_at = [&](const std::string& site, int id) {
        if (probe && *probe) (*probe)(site, tape.value(id));
    };

    for (int l = 0; l < cfg.layers; ++l) {
        const std::string lp = "layer" + std::to_string(l);
        const int n1 = tape.rmsnorm(x);
        probe_at(lp + ".norm1", n1);
        const int m1 = adaln(n1, lp + ".adaln1");
        const int q = tape.rope(tape.matmul(m1, pid(lp + ".attn.wq")), rot);
        const int k = tape.rope(tape.matmul(m1, pid(lp + ".attn.wk")), rot);
        const int v = tape.matmul(m1, pid(lp + ".attn.wv"));
        int a = tape.causal_attention(q, k, v, b, t, cfg.heads);
        if (train && cfg.attn_dropout > 0) a = tape.dropout(a, cfg.attn_dropout, *drop_rng);
        int o = tape.matmul(a, pid(lp + ".attn.wo"));
        if (train && cfg.dropout > 0) o = tape.dropout(o, cfg.dropout, *drop_rng);
        x = tape.add(x, o);

        const int n2 = tape.rmsnorm(x);
        probe_at(lp + ".norm2", n2);
        const int m2 = adaln(n2, lp + ".adaln2");
        int d = tape.matmul(tape.swiglu(tape.matmul(m2, pid(lp + ".ffn.win"))), pid(lp + ".ffn.wdown"));
        if (train && cfg.dropout > 0) d = tape.dropout(d, cfg.dropout, *drop_rng);
        x = tape.add(x, d);
    }
    int nf = tape.rmsnorm(x);
    probe_at("final.norm", nf);
    nf = tape.mul_rowvec(nf, pid("final.gain"));
    ids.logits = tape.add_rowvec(tape.matmul(nf, pid("head.w")), pid("head.b"));
    ids.loss = tape.cross_entropy_mean(ids.logits, targets);
    return ids;
}

// Reorder a row-major grid into scan order.
inline void grid_to_sequence(const uint16_t* grid, const SequenceLayout& lay, int* out) {
    for (int i = 0; i < lay.len(); ++i) {
        const Position2D p = lay.order[static_cast<size_t>(i)];
        out[i] = grid[p.x * lay.shape.w + p.y];
    }
}

}  // namespace dar
