#pragma once

// Training loop (shuffled mini-batches, AdamW, per-step schedule, CSV loss
// log, checkpoints) and the evaluation report (val loss/accuracy, per-class
// token-histogram TV, proxy Frechet score).

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "dar/checkpoint.hpp"
#include "dar/dataset.hpp"
#include "dar/frechet.hpp"
#include "dar/sampler.hpp"

namespace dar {

struct TrainResult {
    double first_loss = 0.0;
    double final_loss = 0.0;
    int64_t steps = 0;
    std::string checkpoint_path;
    std::string loss_log_path;
    uint32_t dataset_fingerprint = 0;
    uint32_t config_fingerprint = 0;
};

inline void check_dataset_compat(const ModelConfig& cfg, const Dataset& ds) {
    if (ds.vocab_size != cfg.vocab_size) {
        throw std::invalid_argument("dataset vocab_size does not match model vocab_size");
    }
    if (ds.num_classes != cfg.num_classes) {
        throw std::invalid_argument("dataset num_classes does not match model num_classes");
    }
    if (ds.height != cfg.grid_height || ds.width != cfg.grid_width) {
        throw std::invalid_argument("dataset grid shape does not match model grid shape");
    }
}

// Assemble a batch from dataset rows: tokens reordered into scan order and
// class labels subjected to classifier-free-guidance dropout.
inline Batch make_batch(const Dataset& ds, const SequenceLayout& lay, const std::vector<int>& rows,
                        double class_dropout, int null_class, Rng* cls_rng) {
    Batch batch;
    batch.batch = static_cast<int>(rows.size());
    batch.classes.resize(rows.size());
    batch.tokens.resize(rows.size() * static_cast<size_t>(lay.len()));
    for (size_t s = 0; s < rows.size(); ++s) {
        int cls = ds.classes[static_cast<size_t>(rows[s])];
        if (cls_rng != nullptr && class_dropout > 0.0 && cls_rng->uniform() < class_dropout) {
            cls = null_class;
        }
        batch.classes[s] = cls;
        grid_to_sequence(ds.grid(rows[s]), lay, batch.tokens.data() + s * static_cast<size_t>(lay.len()));
    }
    return batch;
}

inline TrainResult train(const ConfigBundle& bundle, const Dataset& ds, const std::string& out_dir) {
    const ModelConfig& cfg = bundle.model;
    const TrainSettings& ts = bundle.train;
    cfg.validate();
    ts.validate();
    check_dataset_compat(cfg, ds);
    std::filesystem::create_directories(out_dir);

    const SequenceLayout lay = build_layout(cfg.grid(), cfg.scan);
    const auto rot = layout_rotation(lay, cfg.rope_mode, cfg.head_dim());
    Codebook cb;
    if (cfg.codebook_embeddings) cb = make_codebook(cfg.vocab_size, cfg.codebook_dim, cfg.codebook_seed);
    ParamStore<float> params = init_params<float>(cfg, cfg.codebook_embeddings ? &cb : nullptr, ts.seed);

    AdamW<float> opt(params, ts.adamw);
    GradBuffers grads = make_grad_buffers(params);
    Rng shuffle_rng(ts.seed ^ 0x9E3779B97F4A7C15ull);
    Rng drop_rng(ts.seed ^ 0xD1B54A32D192ED03ull);
    Rng cls_rng(ts.seed ^ 0x94D049BB133111EBull);

    const SplitIndices split = split_dataset(ds);
    if (split.train.empty()) throw std::invalid_argument("training split is empty");
    std::vector<int> perm = split.train;
    size_t cursor = perm.size();  // forces an initial shuffle

    TrainResult res;
    res.steps = ts.steps;
    res.dataset_fingerprint = dataset_fingerprint(ds);
    res.config_fingerprint = config_fingerprint(cfg);
    res.loss_log_path = (std::filesystem::path(out_dir) / "loss.csv").string();
    res.checkpoint_path = (std::filesystem::path(out_dir) / "model.ckpt").string();

    std::ofstream log(res.loss_log_path);
    if (!log) throw std::runtime_error("cannot open for writing: " + res.loss_log_path);
    log << "step,lr,loss\n";

    std::vector<int> rows(static_cast<size_t>(ts.batch_size));
    for (int64_t step = 0; step < ts.steps; ++step) {
        for (auto& r : rows) {
            if (cursor >= perm.size()) {
                shuffle_rng.shuffle(perm.begin(), perm.end());
                cursor = 0;
            }
            r = perm[cursor++];
        }
        const Batch batch =
            make_batch(ds, lay, rows, cfg.class_dropout, cfg.null_class(), &cls_rng);
        Tape<float> tape;
        const ForwardIds<float> ids =
            build_forward(tape, cfg, params, lay, rot, batch, /*train=*/true, &drop_rng);
        const double loss = static_cast<double>(tape.value(ids.loss).data[0]);
        if (!std::isfinite(loss)) {
            throw std::runtime_error("non-finite loss at step " + std::to_string(step));
        }
        if (step == 0) res.first_loss = loss;
        res.final_loss = loss;
        tape.backward(ids.loss);
        zero_grads(grads);
        for (int i = 0; i < params.count(); ++i) {
            if (!params.at(i).trainable) continue;
            const auto& g = tape.grad(ids.leaf[static_cast<size_t>(i)]);
            auto& acc = grads[static_cast<size_t>(i)];
            for (size_t j = 0; j < g.data.size(); ++j) acc.data[j] += static_cast<double>(g.data[j]);
        }
        const double lr = lr_at(step, ts.schedule);
        opt.step(params, grads, lr);

        std::ostringstream line;
        line << step << ',' << std::setprecision(17) << lr << ',' << std::setprecision(9) << loss;
        log << line.str() << '\n';

        if (ts.checkpoint_interval > 0 && (step + 1) % ts.checkpoint_interval == 0 &&
            step + 1 < ts.steps) {
            const std::string p =
                (std::filesystem::path(out_dir) / ("model_step" + std::to_string(step + 1) + ".ckpt")).string();
            save_checkpoint(p, cfg, params);
        }
    }
    log.flush();
    if (!log) throw std::runtime_error("write failed: " + res.loss_log_path);
    save_checkpoint(res.checkpoint_path, cfg, params);
    return res;
}

inline Json to_json(const TrainResult& r) {
    return Json{{"first_loss", r.first_loss},
                {"final_loss", r.final_loss},
                {"steps", r.steps},
                {"checkpoint", r.checkpoint_path},
                {"loss_log", r.loss_log_path},
                {"dataset_fingerprint", r.dataset_fingerprint},
                {"config_fingerprint", r.config_fingerprint}};
}

// ---- evaluation ------------------------------------------------------------

struct EvalReport {
    double val_loss = 0.0;
    double accuracy = 0.0;
    std::vector<double> per_class_tv;
    double mean_tv = 0.0;
    double frechet = 0.0;
    int samples_per_class = 0;
    uint32_t config_fingerprint = 0;
    uint32_t dataset_fingerprint = 0;
};

// Total-variation distance between token histograms (each normalized).
inline double token_histogram_tv(const std::vector<int64_t>& a, const std::vector<int64_t>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("token_histogram_tv: size mismatch");
    int64_t na = 0, nb = 0;
    for (int64_t v : a) na += v;
    for (int64_t v : b) nb += v;
    if (na == 0 || nb == 0) throw std::invalid_argument("token_histogram_tv: empty histogram");
    double tv = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        tv += std::abs(static_cast<double>(a[i]) / na - static_cast<double>(b[i]) / nb);
    }
    return 0.5 * tv;
}

// Per-sample proxy feature: the mean decoded code vector over the grid.
inline void mean_feature(const uint16_t* grid, int cells, const Codebook& cb, double* out) {
    std::fill(out, out + cb.d, 0.0);
    for (int c = 0; c < cells; ++c) {
        const float* code = cb.code(grid[c]);
        for (int j = 0; j < cb.d; ++j) out[j] += static_cast<double>(code[j]);
    }
    for (int j = 0; j < cb.d; ++j) out[j] /= cells;
}

inline EvalReport evaluate(const ModelConfig& cfg, const ParamStore<float>& params, const Codebook& cb,
                           const Dataset& ds, int samples_per_class, SamplingConfig scfg,
                           uint64_t seed) {
    cfg.validate();
    check_dataset_compat(cfg, ds);
    if (samples_per_class < 1) throw std::invalid_argument("evaluate: samples_per_class must be >= 1");
    const SequenceLayout lay = build_layout(cfg.grid(), cfg.scan);
    const auto rot = layout_rotation(lay, cfg.rope_mode, cfg.head_dim());
    const SplitIndices split = split_dataset(ds);
    const std::vector<int>& eval_rows = split.heldout.empty() ? split.train : split.heldout;

    EvalReport rep;
    rep.samples_per_class = samples_per_class;
    rep.config_fingerprint = config_fingerprint(cfg);
    rep.dataset_fingerprint = dataset_fingerprint(ds);

    // Validation loss/accuracy under teacher forcing, in eval mode.
    const int t = lay.len();
    int64_t correct = 0, total_slots = 0;
    double loss_sum = 0.0;
    const int chunk = 16;
    for (size_t off = 0; off < eval_rows.size(); off += chunk) {
        const size_t end = std::min(eval_rows.size(), off + chunk);
        std::vector<int> rows(eval_rows.begin() + static_cast<long>(off),
                              eval_rows.begin() + static_cast<long>(end));
        const Batch batch = make_batch(ds, lay, rows, 0.0, cfg.null_class(), nullptr);
        Tape<float> tape;
        const ForwardIds<float> ids =
            build_forward(tape, cfg, params, lay, rot, batch, /*train=*/false, nullptr);
        loss_sum += static_cast<double>(tape.value(ids.loss).data[0]) * static_cast<double>(rows.size());
        const Tensor<float>& logits = tape.value(ids.logits);
        for (int r = 0; r < logits.rows; ++r) {
            const float* row = logits.row(r);
            int best = 0;
            for (int j = 1; j < logits.cols; ++j) {
                if (row[j] > row[best]) best = j;
            }
            if (best == batch.tokens[static_cast<size_t>(r)]) ++correct;
            ++total_slots;
        }
    }
    rep.val_loss = loss_sum / static_cast<double>(eval_rows.size());
    rep.accuracy = static_cast<double>(correct) / static_cast<double>(total_slots);

    // Draw grids per class and compare token statistics against the training
    // split.
    Decoder<float> dec(cfg, params, lay);
    Rng sample_rng(seed ^ 0xA0761D6478BD642Full);
    std::vector<std::vector<int64_t>> train_hist(static_cast<size_t>(cfg.num_classes),
                                                 std::vector<int64_t>(static_cast<size_t>(cfg.vocab_size), 0));
    std::vector<std::vector<int64_t>> gen_hist = train_hist;
    for (int idx : split.train) {
        auto& h = train_hist[ds.classes[static_cast<size_t>(idx)]];
        const uint16_t* g = ds.grid(idx);
        for (int c = 0; c < ds.cells(); ++c) ++h[g[c]];
    }
    Tensor<double> train_feats(static_cast<int>(split.train.size()), cb.d);
    for (size_t i = 0; i < split.train.size(); ++i) {
        mean_feature(ds.grid(split.train[i]), ds.cells(), cb, train_feats.row(static_cast<int>(i)));
    }
    Tensor<double> gen_feats(cfg.num_classes * samples_per_class, cb.d);
    int gen_row = 0;
    for (int c = 0; c < cfg.num_classes; ++c) {
        scfg.class_label = c;
        scfg.batch = samples_per_class;
        const std::vector<TokenGrid> grids = sample_batch(dec, scfg, sample_rng);
        for (const TokenGrid& g : grids) {
            for (uint16_t tok : g.tokens) ++gen_hist[static_cast<size_t>(c)][tok];
            mean_feature(g.tokens.data(), ds.cells(), cb, gen_feats.row(gen_row++));
        }
    }
    rep.per_class_tv.resize(static_cast<size_t>(cfg.num_classes));
    double tv_sum = 0.0;
    for (int c = 0; c < cfg.num_classes; ++c) {
        rep.per_class_tv[static_cast<size_t>(c)] =
            token_histogram_tv(train_hist[static_cast<size_t>(c)], gen_hist[static_cast<size_t>(c)]);
        tv_sum += rep.per_class_tv[static_cast<size_t>(c)];
    }
    rep.mean_tv = tv_sum / cfg.num_classes;
    rep.frechet = frechet_gaussian(fit_gaussian(train_feats), fit_gaussian(gen_feats));
    return rep;
}

inline Json to_json(const EvalReport& r) {
    return Json{{"val_loss", r.val_loss},
                {"accuracy", r.accuracy},
                {"per_class_tv", r.per_class_tv},
                {"mean_tv", r.mean_tv},
                {"frechet", r.frechet},
                {"samples_per_class", r.samples_per_class},
                {"config_fingerprint", r.config_fingerprint},
                {"dataset_fingerprint", r.dataset_fingerprint}};
}

}  // namespace dar
