#pragma once

// Incremental (KV-cached) inference that mirrors the tape forward exactly:
// identical kernels and accumulation order, so cached logits match the full
// forward bit for bit, well inside the 1e-5 contract.

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "dar/checkpoint.hpp"
#include "dar/model.hpp"

namespace dar {

namespace detail {

// Row-vector times matrix with the same k-outer accumulation as mm_nn_acc.
template <typename T>
inline void row_matvec(const T* a, const Tensor<T>& w, T* out) {
    std::fill(out, out + w.cols, T{});
    for (int p = 0; p < w.rows; ++p) {
        const T s = a[p];
        if (s == T{}) continue;
        const T* wrow = w.row(p);
        for (int j = 0; j < w.cols; ++j) out[j] += s * wrow[j];
    }
}

template <typename T>
inline void rmsnorm_row(const T* x, int n, T* y, T eps = static_cast<T>(1e-6)) {
    T ms{};
    for (int j = 0; j < n; ++j) ms += x[j] * x[j];
    ms /= static_cast<T>(n);
    const T r = std::sqrt(ms <= eps * eps ? eps * eps : ms);
    for (int j = 0; j < n; ++j) y[j] = x[j] / r;
}

}  // namespace detail

template <typename T>
class Decoder {
public:
    Decoder(const ModelConfig& cfg, const ParamStore<T>& params, const SequenceLayout& lay)
        : cfg_(cfg), params_(params), lay_(lay) {
        cfg_.validate();
        if (lay.len() != cfg.seq_len()) throw std::invalid_argument("decoder: layout length mismatch");
        rot_ = layout_rotation(lay, cfg.rope_mode, cfg.head_dim());
    }

    // One autoregressive stream; key/value caches grow slot by slot.
    struct Stream {
        int class_label = 0;
        int len = 0;
        std::vector<Tensor<T>> kcache, vcache;  // per layer, seq_len x hidden
    };

    Stream new_stream(int class_label) const {
        if (class_label < 0 || class_label > cfg_.num_classes) {
            throw std::invalid_argument("decoder: class label out of range");
        }
        Stream st;
        st.class_label = class_label;
        st.kcache.assign(static_cast<size_t>(cfg_.layers), Tensor<T>(lay_.len(), cfg_.hidden_size));
        st.vcache.assign(static_cast<size_t>(cfg_.layers), Tensor<T>(lay_.len(), cfg_.hidden_size));
        return st;
    }

    const SequenceLayout& layout() const { return lay_; }
    const ModelConfig& config() const { return cfg_; }

    // Feed the stream's next input slot (the class token for slot 0, else
    // `token` = the previously generated token) and return the K logits that
    // predict the token for the slot just consumed.
    std::vector<T> step(Stream& st, int token) const {
        const int i = st.len;
        if (i >= lay_.len()) throw std::invalid_argument("decoder: stream already complete");
        const int h = cfg_.hidden_size;
        std::vector<T> x(static_cast<size_t>(h));
        if (i == 0) {
            const auto& cls = params_["cls.table"];
            std::copy(cls.row(st.class_label), cls.row(st.class_label) + h, x.data());
        } else {
            if (token < 0 || token >= cfg_.vocab_size) {
                throw std::invalid_argument("decoder: token out of range");
            }
            embed_token(token, x.data());
        }

        std::vector<T> cond(static_cast<size_t>(h));
        {
            const auto& cls = params_["cls.table"];
            std::copy(cls.row(st.class_label), cls.row(st.class_label) + h, cond.data());
            if (cfg_.adaln_condition == AdaLnCondition::ClassDirection) {
                const auto& dir = params_["dir.table"];
                const int d = static_cast<int>(lay_.dirs[static_cast<size_t>(i)]);
                for (int j = 0; j < h; ++j) cond[static_cast<size_t>(j)] += dir.at(d, j);
            } else if (cfg_.adaln_condition == AdaLnCondition::ClassTimestep) {
                const auto& tim = params_["time.table"];
                for (int j = 0; j < h; ++j) cond[static_cast<size_t>(j)] += tim.at(i, j);
            }
        }

        const int heads = cfg_.heads;
        const int hd = cfg_.head_dim();
        const T inv_sqrt = static_cast<T>(1.0 / std::sqrt(static_cast<double>(hd)));
        std::vector<T> n(static_cast<size_t>(h)), m(static_cast<size_t>(h)), q(static_cast<size_t>(h));
        std::vector<T> attn_out(static_cast<size_t>(h)), tmp(static_cast<size_t>(h));
        std::vector<T> ffn_mid(static_cast<size_t>(2 * cfg_.ffn_hidden()));
        std::vector<T> ffn_act(static_cast<size_t>(cfg_.ffn_hidden()));
        for (int l = 0; l < cfg_.layers; ++l) {
            const std::string lp = "layer" + std::to_string(l);
            detail::rmsnorm_row(x.data(), h, n.data());
            adaln_row(n.data(), cond.data(), lp + ".adaln1", m.data());
            detail::row_matvec(m.data(), params_[lp + ".attn.wq"], q.data());
            Tensor<T>& kc = st.kcache[static_cast<size_t>(l)];
            Tensor<T>& vc = st.vcache[static_cast<size_t>(l)];
            detail::row_matvec(m.data(), params_[lp + ".attn.wk"], kc.row(i));
            detail::row_matvec(m.data(), params_[lp + ".attn.wv"], vc.row(i));
            for (int hh = 0; hh < heads; ++hh) {
                rotate_row(q.data() + hh * hd, *rot_, i);
                rotate_row(kc.row(i) + hh * hd, *rot_, i);
            }
            // Causal attention for the new row only, over the cache.
            std::vector<double> scores(static_cast<size_t>(i) + 1);
            for (int hh = 0; hh < heads; ++hh) {
                const T* qi = q.data() + hh * hd;
                double mx = -std::numeric_limits<double>::infinity();
                for (int j = 0; j <= i; ++j) {
                    const T* kj = kc.row(j) + hh * hd;
                    T dot{};
                    for (int d = 0; d < hd; ++d) dot += qi[d] * kj[d];
                    const double s = static_cast<double>(dot * inv_sqrt);
                    scores[static_cast<size_t>(j)] = s;
                    if (s > mx) mx = s;
                }
                double denom = 0.0;
                for (int j = 0; j <= i; ++j) denom += std::exp(scores[static_cast<size_t>(j)] - mx);
                T* orow = attn_out.data() + hh * hd;
                std::fill(orow, orow + hd, T{});
                for (int j = 0; j <= i; ++j) {
                    const T pij = static_cast<T>(std::exp(scores[static_cast<size_t>(j)] - mx) / denom);
                    const T* vj = vc.row(j) + hh * hd;
                    for (int d = 0; d < hd; ++d) orow[d] += pij * vj[d];
                }
            }
            detail::row_matvec(attn_out.data(), params_[lp + ".attn.wo"], tmp.data());
            for (int j = 0; j < h; ++j) x[static_cast<size_t>(j)] += tmp[static_cast<size_t>(j)];

            detail::rmsnorm_row(x.data(), h, n.data());
            adaln_row(n.data(), cond.data(), lp + ".adaln2", m.data());
            detail::row_matvec(m.data(), params_[lp + ".ffn.win"], ffn_mid.data());
            const int f = cfg_.ffn_hidden();
            for (int j = 0; j < f; ++j) {
                const T g = ffn_mid[static_cast<size_t>(j)];
                ffn_act[static_cast<size_t>(j)] = g * Tape<T>::sigmoid(g) * ffn_mid[static_cast<size_t>(f + j)];
            }
            detail::row_matvec(ffn_act.data(), params_[lp + ".ffn.wdown"], tmp.data());
            for (int j = 0; j < h; ++j) x[static_cast<size_t>(j)] += tmp[static_cast<size_t>(j)];
        }
        detail::rmsnorm_row(x.data(), h, n.data());
        {
            const auto& gain = params_["final.gain"];
            for (int j = 0; j < h; ++j) n[static_cast<size_t>(j)] *= gain.at(0, j);
        }
        std::vector<T> logits(static_cast<size_t>(cfg_.vocab_size));
        detail::row_matvec(n.data(), params_["head.w"], logits.data());
        const auto& hb = params_["head.b"];
        for (int j = 0; j < cfg_.vocab_size; ++j) logits[static_cast<size_t>(j)] += hb.at(0, j);
        ++st.len;
        return logits;
    }

private:
    void embed_token(int token, T* out) const {
        const int h = cfg_.hidden_size;
        if (cfg_.codebook_embeddings) {
            const auto& table = params_["tok.codebook"];
            const auto& w1 = params_["tok.mlp.w1"];
            const auto& b1 = params_["tok.mlp.b1"];
            const auto& w2 = params_["tok.mlp.w2"];
            const auto& b2 = params_["tok.mlp.b2"];
            std::vector<T> mid(static_cast<size_t>(h));
            detail::row_matvec(table.row(token), w1, mid.data());
            for (int j = 0; j < h; ++j) {
                mid[static_cast<size_t>(j)] += b1.at(0, j);
                mid[static_cast<size_t>(j)] = mid[static_cast<size_t>(j)] * Tape<T>::sigmoid(mid[static_cast<size_t>(j)]);
            }
            detail::row_matvec(mid.data(), w2, out);
            for (int j = 0; j < h; ++j) out[j] += b2.at(0, j);
        } else {
            const auto& table = params_["tok.table"];
            std::copy(table.row(token), table.row(token) + h, out);
        }
    }

    void adaln_row(const T* normed, const T* cond, const std::string& prefix, T* out) const {
        const int h = cfg_.hidden_size;
        std::vector<T> shift(static_cast<size_t>(h)), scale(static_cast<size_t>(h));
        detail::row_matvec(cond, params_[prefix + ".shift.w"], shift.data());
        detail::row_matvec(cond, params_[prefix + ".scale.w"], scale.data());
        const auto& sb = params_[prefix + ".shift.b"];
        const auto& cb = params_[prefix + ".scale.b"];
        for (int j = 0; j < h; ++j) {
            shift[static_cast<size_t>(j)] += sb.at(0, j);
            scale[static_cast<size_t>(j)] += cb.at(0, j);
            out[j] = normed[j] + normed[j] * scale[static_cast<size_t>(j)] + shift[static_cast<size_t>(j)];
        }
    }

    ModelConfig cfg_;
    const ParamStore<T>& params_;
    SequenceLayout lay_;
    std::shared_ptr<const RotationTable> rot_;
};

}  // namespace dar
