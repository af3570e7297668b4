#pragma once

// Reverse-mode autodiff over row-major matrices. Nodes live on a tape in
// creation order; backward() replays the tape in reverse. Saved activations
// sit inside the backward closures, so a tape is built per step and discarded.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

#include "dar/common.hpp"
#include "dar/rope.hpp"
#include "dar/tensor.hpp"

namespace dar {

template <typename T>
class Tape {
public:
    struct Node {
        Tensor<T> value;
        Tensor<T> grad;
        bool needs_grad = false;
        std::function<void(Tape&)> pull;  // accumulates into parent grads
    };

    int leaf(Tensor<T> v, bool needs_grad) {
        Node n;
        n.value = std::move(v);
        n.grad = Tensor<T>(n.value.rows, n.value.cols);
        n.needs_grad = needs_grad;
        nodes_.push_back(std::move(n));
        return static_cast<int>(nodes_.size()) - 1;
    }

    int constant(Tensor<T> v) { return leaf(std::move(v), false); }

    const Tensor<T>& value(int id) const { return nodes_[static_cast<size_t>(id)].value; }
    const Tensor<T>& grad(int id) const { return nodes_[static_cast<size_t>(id)].grad; }
    bool needs_grad(int id) const { return nodes_[static_cast<size_t>(id)].needs_grad; }
    int size() const { return static_cast<int>(nodes_.size()); }

    // ---- elementwise and broadcast arithmetic ----

    int add(int a, int b) {
        check_same_shape(a, b, "add");
        Tensor<T> out = value(a);
        const auto& vb = value(b).data;
        for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += vb[i];
        return emit(std::move(out), {a, b}, [a, b](Tape& t) {
            const auto& g = t.node(t.cursor_).grad.data;
            if (t.needs_grad(a)) {
                auto& ga = t.node(a).grad.data;
                for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
            }
            if (t.needs_grad(b)) {
                auto& gb = t.node(b).grad.data;
                for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
            }
        });
    }

    int mul(int a, int b) {
        check_same_shape(a, b, "mul");
        Tensor<T> out = value(a);
        const auto& vb = value(b).data;
        for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= vb[i];
        return emit(std::move(out), {a, b}, [a, b](Tape& t) {
            const auto& g = t.node(t.cursor_).grad.data;
            if (t.needs_grad(a)) {
                auto& ga = t.node(a).grad.data;
                const auto& vb = t.value(b).data;
                for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * vb[i];
            }
            if (t.needs_grad(b)) {
                auto& gb = t.node(b).grad.data;
                const auto& va = t.value(a).data;
                for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * va[i];
            }
        });
    }

    int scale(int a, T s) {
        Tensor<T> out = value(a);
        for (auto& x : out.data) x *= s;
        return emit(std::move(out), {a}, [a, s](Tape& t) {
            if (!t.needs_grad(a)) return;
            const auto& g = t.node(t.cursor_).grad.data;
            auto& ga = t.node(a).grad.data;
            for (size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
        });
    }

    // A [m,n] plus a broadcast bias row [1,n].
    int add_rowvec(int a, int b) {
        check_rowvec(a, b, "add_rowvec");
        Tensor<T> out = value(a);
        const T* row = value(b).data.data();
        for (int i = 0; i < out.rows; ++i) {
            T* r = out.row(i);
            for (int j = 0; j < out.cols; ++j) r[j] += row[j];
        }
        return emit(std::move(out), {a, b}, [a, b](Tape& t) {
            const auto& go = t.node(t.cursor_).grad;
            if (t.needs_grad(a)) {
                auto& ga = t.node(a).grad.data;
                for (size_t i = 0; i < ga.size(); ++i) ga[i] += go.data[i];
            }
            if (t.needs_grad(b)) {
                T* gb = t.node(b).grad.data.data();
                for (int i = 0; i < go.rows; ++i) {
                    const T* r = go.row(i);
                    for (int j = 0; j < go.cols; ++j) gb[j] += r[j];
                }
            }
        });
    }

    // A [m,n] times a broadcast gain row [1,n].
    int mul_rowvec(int a, int b) {
        check_rowvec(a, b, "mul_rowvec");
        Tensor<T> out = value(a);
        const T* row = value(b).data.data();
        for (int i = 0; i < out.rows; ++i) {
            T* r = out.row(i);
            for (int j = 0; j < out.cols; ++j) r[j] *= row[j];
        }
        return emit(std::move(out), {a, b}, [a, b](Tape& t) {
            const auto& go = t.node(t.cursor_).grad;
            const auto& va = t.value(a);
            const T* gain = t.value(b).data.data();
            if (t.needs_grad(a)) {
                auto& ga = t.node(a).grad;
                for (int i = 0; i < go.rows; ++i) {
                    const T* r = go.row(i);
                    T* gr = ga.row(i);
                    for (int j = 0; j < go.cols; ++j) gr[j] += r[j] * gain[j];
                }
            }
            if (t.needs_grad(b)) {
                T* gb = t.node(b).grad.data.data();
                for (int i = 0; i < go.rows; ++i) {
                    const T* r = go.row(i);
                    const T* ar = va.row(i);
                    for (int j = 0; j < go.cols; ++j) gb[j] += r[j] * ar[j];
                }
            }
        });
    }

    // ---- linear algebra ----

    int matmul(int a, int b) {
        const auto& va = value(a);
        const auto& vb = value(b);
        if (va.cols != vb.rows) throw std::invalid_argument("matmul: inner dims mismatch");
        Tensor<T> out(va.rows, vb.cols);
        mm_nn_acc(va.data.data(), vb.data.data(), out.data.data(), va.rows, va.cols, vb.cols);
        return emit(std::move(out), {a, b}, [a, b](Tape& t) {
            const auto& go = t.node(t.cursor_).grad;
            const auto& va = t.value(a);
            const auto& vb = t.value(b);
            if (t.needs_grad(a)) {
                // dA += dC * B^T
                mm_nt_acc(go.data.data(), vb.data.data(), t.node(a).grad.data.data(), go.rows, go.cols, vb.rows);
            }
            if (t.needs_grad(b)) {
                // dB += A^T * dC
                mm_tn_acc(va.data.data(), go.data.data(), t.node(b).grad.data.data(), va.cols, va.rows, go.cols);
            }
        });
    }

    // ---- activations ----

    int silu(int a) {
        Tensor<T> out = value(a);
        for (auto& x : out.data) x = x * sigmoid(x);
        return emit(std::move(out), {a}, [a](Tape& t) {
            if (!t.needs_grad(a)) return;
            const auto& g = t.node(t.cursor_).grad.data;
            const auto& va = t.value(a).data;
            auto& ga = t.node(a).grad.data;
            for (size_t i = 0; i < g.size(); ++i) {
                const T s = sigmoid(va[i]);
                ga[i] += g[i] * s * (T{1} + va[i] * (T{1} - s));
            }
        });
    }

    // x [m, 2F]: gate in the first F columns, linear branch in the last F.
    int swiglu(int a) {
        const auto& va = value(a);
        if (va.cols % 2 != 0) throw std::invalid_argument("swiglu: columns must be even");
        const int f = va.cols / 2;
        Tensor<T> out(va.rows, f);
        for (int i = 0; i < va.rows; ++i) {
            const T* r = va.row(i);
            T* o = out.row(i);
            for (int j = 0; j < f; ++j) o[j] = r[j] * sigmoid(r[j]) * r[f + j];
        }
        return emit(std::move(out), {a}, [a, f](Tape& t) {
            if (!t.needs_grad(a)) return;
            const auto& go = t.node(t.cursor_).grad;
            const auto& va = t.value(a);
            auto& ga = t.node(a).grad;
            for (int i = 0; i < va.rows; ++i) {
                const T* r = va.row(i);
                const T* g = go.row(i);
                T* gr = ga.row(i);
                for (int j = 0; j < f; ++j) {
                    const T s = sigmoid(r[j]);
                    const T act = r[j] * s;
                    gr[j] += g[j] * r[f + j] * s * (T{1} + r[j] * (T{1} - s));
                    gr[f + j] += g[j] * act;
                }
            }
        });
    }

    // Row-wise RMS normalization without gain: y = x / r where
    // r = sqrt(max(mean(x^2), eps^2)). The floor only guards near-zero rows,
    // so ordinary rows come out with exactly unit root-mean-square.
    int rmsnorm(int a, T eps = static_cast<T>(1e-6)) {
        const auto& va = value(a);
        Tensor<T> out(va.rows, va.cols);
        auto rvals = std::make_shared<std::vector<T>>(static_cast<size_t>(va.rows));
        auto floored = std::make_shared<std::vector<uint8_t>>(static_cast<size_t>(va.rows));
        for (int i = 0; i < va.rows; ++i) {
            const T* x = va.row(i);
            T ms{};
            for (int j = 0; j < va.cols; ++j) ms += x[j] * x[j];
            ms /= static_cast<T>(va.cols);
            const bool at_floor = ms <= eps * eps;
            const T r = std::sqrt(at_floor ? eps * eps : ms);
            (*rvals)[static_cast<size_t>(i)] = r;
            (*floored)[static_cast<size_t>(i)] = at_floor ? 1 : 0;
            T* y = out.row(i);
            for (int j = 0; j < va.cols; ++j) y[j] = x[j] / r;
        }
        return emit(std::move(out), {a}, [a, rvals, floored](Tape& t) {
            if (!t.needs_grad(a)) return;
            const auto& go = t.node(t.cursor_).grad;
            const auto& vo = t.node(t.cursor_).value;
            auto& ga = t.node(a).grad;
            const int n = go.cols;
            for (int i = 0; i < go.rows; ++i) {
                const T* g = go.row(i);
                const T* y = vo.row(i);
                T* gr = ga.row(i);
                const T r = (*rvals)[static_cast<size_t>(i)];
                if ((*floored)[static_cast<size_t>(i)]) {
                    for (int j = 0; j < n; ++j) gr[j] += g[j] / r;
                } else {
                    T dot{};
                    for (int j = 0; j < n; ++j) dot += g[j] * y[j];
                    dot /= static_cast<T>(n);
                    for (int j = 0; j < n; ++j) gr[j] += (g[j] - y[j] * dot) / r;
                }
            }
        });
    }

    // ---- gather / concat ----

    // Copy the listed rows of a source matrix. Doubles as embedding lookup;
    // the backward pass is a scatter-add, skipped when the table is frozen.
    int gather_rows(int src, std::vector<int> idx) {
        const auto& vs = value(src);
        for (int r : idx) {
            if (r < 0 || r >= vs.rows) throw std::invalid_argument("gather_rows: index out of range");
        }
        Tensor<T> out(static_cast<int>(idx.size()), vs.cols);
        for (size_t i = 0; i < idx.size(); ++i) {
            const T* s = vs.row(idx[i]);
            std::copy(s, s + vs.cols, out.row(static_cast<int>(i)));
        }
        auto rows = std::make_shared<std::vector<int>>(std::move(idx));
        return emit(std::move(out), {src}, [src, rows](Tape& t) {
            if (!t.needs_grad(src)) return;
            const auto& go = t.node(t.cursor_).grad;
            auto& gs = t.node(src).grad;
            for (size_t i = 0; i < rows->size(); ++i) {
                const T* g = go.row(static_cast<int>(i));
                T* d = gs.row((*rows)[i]);
                for (int j = 0; j < go.cols; ++j) d[j] += g[j];
            }
        });
    }

    int concat_rows(int a, int b) {
        const auto& va = value(a);
        const auto& vb = value(b);
        if (va.cols != vb.cols) throw std::invalid_argument("concat_rows: column mismatch");
        Tensor<T> out(va.rows + vb.rows, va.cols);
        std::copy(va.data.begin(), va.data.end(), out.data.begin());
        std::copy(vb.data.begin(), vb.data.end(), out.data.begin() + static_cast<long>(va.data.size()));
        const int split = va.rows;
        return emit(std::move(out), {a, b}, [a, b, split](Tape& t) {
            const auto& go = t.node(t.cursor_).grad;
            if (t.needs_grad(a)) {
                auto& ga = t.node(a).grad.data;
                for (size_t i = 0; i < ga.size(); ++i) ga[i] += go.data[i];
            }
            if (t.needs_grad(b)) {
                auto& gb = t.node(b).grad.data;
                const size_t off = static_cast<size_t>(split) * go.cols;
                for (size_t i = 0; i < gb.size(); ++i) gb[i] += go.data[off + i];
            }
        });
    }

    // ---- regularization ----

    // Inverted dropout: kept entries are scaled by 1/(1-p) so the expected
    // activation is unchanged. p == 0 is an exact no-op (same node returned).
    int dropout(int a, double p, Rng& rng) {
        if (p <= 0.0) return a;
        if (p >= 1.0) throw std::invalid_argument("dropout: p must be below 1");
        const auto& va = value(a);
        auto mask = std::make_shared<std::vector<T>>(va.data.size());
        const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
        Tensor<T> out = va;
        for (size_t i = 0; i < out.data.size(); ++i) {
            const T m = rng.uniform() < p ? T{} : keep_scale;
            (*mask)[i] = m;
            out.data[i] *= m;
        }
        return emit(std::move(out), {a}, [a, mask](Tape& t) {
            if (!t.needs_grad(a)) return;
            const auto& g = t.node(t.cursor_).grad.data;
            auto& ga = t.node(a).grad.data;
            for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (*mask)[i];
        });
    }

    // ---- position rotation ----

    // Rotate each row's per-head slices by the table row for its sequence
    // slot (row index modulo table rows). Orthogonal map, so the backward
    // pass is the conjugate rotation of the incoming gradient.
    int rope(int a, std::shared_ptr<const RotationTable> tab) {
        const auto& va = value(a);
        if (tab->head_dim <= 0 || va.cols % tab->head_dim != 0) {
            throw std::invalid_argument("rope: columns must be a multiple of head_dim");
        }
        if (tab->rows <= 0 || va.rows % tab->rows != 0) {
            throw std::invalid_argument("rope: rows must be a multiple of the table length");
        }
        const int heads = va.cols / tab->head_dim;
        Tensor<T> out = va;
        for (int r = 0; r < out.rows; ++r) {
            const int n = r % tab->rows;
            for (int h = 0; h < heads; ++h) rotate_row(out.row(r) + h * tab->head_dim, *tab, n);
        }
        return emit(std::move(out), {a}, [a, tab, heads](Tape& t) {
            if (!t.needs_grad(a)) return;
            const auto& go = t.node(t.cursor_).grad;
            auto& ga = t.node(a).grad;
            std::vector<T> tmp(static_cast<size_t>(tab->head_dim));
            for (int r = 0; r < go.rows; ++r) {
                const int n = r % tab->rows;
                for (int h = 0; h < heads; ++h) {
                    const T* g = go.row(r) + h * tab->head_dim;
                    std::copy(g, g + tab->head_dim, tmp.data());
                    rotate_row_conj(tmp.data(), *tab, n);
                    T* d = ga.row(r) + h * tab->head_dim;
                    for (int j = 0; j < tab->head_dim; ++j) d[j] += tmp[static_cast<size_t>(j)];
                }
            }
        });
    }

    // ---- attention ----

    // Multi-head causal self-attention over a batch of equal-length
    // sequences packed as [batch*len, heads*head_dim]. Row i attends to rows
    // j <= i of the same sequence. Attention probabilities are saved for the
    // backward pass; softmax accumulates in double.
    int causal_attention(int q, int k, int v, int batch, int len, int heads) {
        check_same_shape(q, k, "causal_attention(q,k)");
        check_same_shape(q, v, "causal_attention(q,v)");
        const auto& vq = value(q);
        if (batch <= 0 || len <= 0 || heads <= 0) throw std::invalid_argument("causal_attention: bad dims");
        if (vq.rows != batch * len) throw std::invalid_argument("causal_attention: rows != batch*len");
        if (vq.cols % heads != 0) throw std::invalid_argument("causal_attention: cols must divide by heads");
        const int hd = vq.cols / heads;
        const T inv_sqrt = static_cast<T>(1.0 / std::sqrt(static_cast<double>(hd)));

        const auto& vk = value(k);
        const auto& vv = value(v);
        auto probs = std::make_shared<std::vector<T>>(static_cast<size_t>(batch) * heads * len * len, T{});
        Tensor<T> out(vq.rows, vq.cols);
        std::vector<double> scores(static_cast<size_t>(len));
        for (int b = 0; b < batch; ++b) {
            for (int h = 0; h < heads; ++h) {
                T* p_bh = probs->data() + (static_cast<size_t>(b) * heads + h) * len * len;
                for (int i = 0; i < len; ++i) {
                    const T* qi = vq.row(b * len + i) + h * hd;
                    double mx = -std::numeric_limits<double>::infinity();
                    for (int j = 0; j <= i; ++j) {
                        const T* kj = vk.row(b * len + j) + h * hd;
                        T dot{};
                        for (int d = 0; d < hd; ++d) dot += qi[d] * kj[d];
                        const double s = static_cast<double>(dot * inv_sqrt);
                        scores[static_cast<size_t>(j)] = s;
                        if (s > mx) mx = s;
                    }
                    double denom = 0.0;
                    for (int j = 0; j <= i; ++j) denom += std::exp(scores[static_cast<size_t>(j)] - mx);
                    T* prow = p_bh + static_cast<size_t>(i) * len;
                    T* orow = out.row(b * len + i) + h * hd;
                    for (int j = 0; j <= i; ++j) {
                        const T pij = static_cast<T>(std::exp(scores[static_cast<size_t>(j)] - mx) / denom);
                        prow[j] = pij;
                        const T* vj = vv.row(b * len + j) + h * hd;
                        for (int d = 0; d < hd; ++d) orow[d] += pij * vj[d];
                    }
                }
            }
        }
        return emit(std::move(out), {q, k, v},
                    [q, k, v, batch, len, heads, hd, inv_sqrt, probs](Tape& t) {
            const auto& go = t.node(t.cursor_).grad;
            const auto& vq = t.value(q);
            const auto& vk = t.value(k);
            const auto& vv = t.value(v);
            const bool nq = t.needs_grad(q), nk = t.needs_grad(k), nv = t.needs_grad(v);
            std::vector<T> dp(static_cast<size_t>(len));
            for (int b = 0; b < batch; ++b) {
                for (int h = 0; h < heads; ++h) {
                    const T* p_bh = probs->data() + (static_cast<size_t>(b) * heads + h) * len * len;
                    for (int i = 0; i < len; ++i) {
                        const T* g = go.row(b * len + i) + h * hd;
                        const T* prow = p_bh + static_cast<size_t>(i) * len;
                        // dP[i,j] = dOut[i] . V[j]; dV[j] += P[i,j] dOut[i]
                        for (int j = 0; j <= i; ++j) {
                            const T* vj = vv.row(b * len + j) + h * hd;
                            T dot{};
                            for (int d = 0; d < hd; ++d) dot += g[d] * vj[d];
                            dp[static_cast<size_t>(j)] = dot;
                            if (nv) {
                                T* dv = t.node(v).grad.row(b * len + j) + h * hd;
                                for (int d = 0; d < hd; ++d) dv[d] += prow[j] * g[d];
                            }
                        }
                        if (!nq && !nk) continue;
                        // softmax jacobian: dS = P o (dP - sum(P o dP))
                        T row_dot{};
                        for (int j = 0; j <= i; ++j) row_dot += prow[j] * dp[static_cast<size_t>(j)];
                        const T* qi = vq.row(b * len + i) + h * hd;
                        for (int j = 0; j <= i; ++j) {
                            const T ds = prow[j] * (dp[static_cast<size_t>(j)] - row_dot) * inv_sqrt;
                            if (ds == T{}) continue;
                            const T* kj = vk.row(b * len + j) + h * hd;
                            if (nq) {
                                T* dq = t.node(q).grad.row(b * len + i) + h * hd;
                                for (int d = 0; d < hd; ++d) dq[d] += ds * kj[d];
                            }
                            if (nk) {
                                T* dk = t.node(k).grad.row(b * len + j) + h * hd;
                                for (int d = 0; d < hd; ++d) dk[d] += ds * qi[d];
                            }
                        }
                    }
                }
            }
        });
    }

    // ---- loss ----

    // Mean token cross-entropy: mean_i (logsumexp(row_i) - row_i[target_i]).
    // Produces a 1x1 node. Log-sum-exp runs in double; the row softmax is
    // saved for the backward pass.
    int cross_entropy_mean(int logits, std::vector<int> targets) {
        const auto& vl = value(logits);
        if (static_cast<int>(targets.size()) != vl.rows) {
            throw std::invalid_argument("cross_entropy_mean: one target per row required");
        }
        for (int c : targets) {
            if (c < 0 || c >= vl.cols) throw std::invalid_argument("cross_entropy_mean: target out of range");
        }
        auto probs = std::make_shared<Tensor<T>>(vl.rows, vl.cols);
        double total = 0.0;
        for (int i = 0; i < vl.rows; ++i) {
            const T* x = vl.row(i);
            double mx = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < vl.cols; ++j) mx = std::max(mx, static_cast<double>(x[j]));
            double denom = 0.0;
            for (int j = 0; j < vl.cols; ++j) denom += std::exp(static_cast<double>(x[j]) - mx);
            const double lse = mx + std::log(denom);
            total += lse - static_cast<double>(x[targets[static_cast<size_t>(i)]]);
            T* p = probs->row(i);
            for (int j = 0; j < vl.cols; ++j) p[j] = static_cast<T>(std::exp(static_cast<double>(x[j]) - lse));
        }
        Tensor<T> out(1, 1);
        out.data[0] = static_cast<T>(total / vl.rows);
        auto tgt = std::make_shared<std::vector<int>>(std::move(targets));
        return emit(std::move(out), {logits}, [logits, probs, tgt](Tape& t) {
            if (!t.needs_grad(logits)) return;
            const T g = t.node(t.cursor_).grad.data[0];
            auto& gl = t.node(logits).grad;
            const T inv_n = static_cast<T>(1.0 / gl.rows);
            for (int i = 0; i < gl.rows; ++i) {
                const T* p = probs->row(i);
                T* d = gl.row(i);
                for (int j = 0; j < gl.cols; ++j) d[j] += g * inv_n * p[j];
                d[(*tgt)[static_cast<size_t>(i)]] -= g * inv_n;
            }
        });
    }

    // ---- driver ----

    // Seed d(loss)/d(loss) = 1 and replay the tape backwards. Grads of all
    // nodes are zeroed first, so a tape supports one backward per build.
    void backward(int loss_id) {
        auto& loss = nodes_[static_cast<size_t>(loss_id)];
        if (loss.value.rows != 1 || loss.value.cols != 1) {
            throw std::invalid_argument("backward: loss node must be 1x1");
        }
        for (auto& n : nodes_) n.grad.zero();
        loss.grad.data[0] = T{1};
        for (int id = loss_id; id >= 0; --id) {
            auto& n = nodes_[static_cast<size_t>(id)];
            if (n.needs_grad && n.pull) {
                cursor_ = id;
                n.pull(*this);
            }
        }
    }

    static T sigmoid(T x) {
        return x >= T{} ? T{1} / (T{1} + std::exp(-x)) : std::exp(x) / (T{1} + std::exp(x));
    }

private:
    Node& node(int id) { return nodes_[static_cast<size_t>(id)]; }

    int emit(Tensor<T> out, std::initializer_list<int> parents, std::function<void(Tape&)> pull) {
        bool needs = false;
        for (int p : parents) needs = needs || nodes_[static_cast<size_t>(p)].needs_grad;
        Node n;
        n.value = std::move(out);
        n.grad = Tensor<T>(n.value.rows, n.value.cols);
        n.needs_grad = needs;
        if (needs) n.pull = std::move(pull);
        nodes_.push_back(std::move(n));
        return static_cast<int>(nodes_.size()) - 1;
    }

    void check_same_shape(int a, int b, const char* what) const {
        const auto& va = value(a);
        const auto& vb = value(b);
        if (va.rows != vb.rows || va.cols != vb.cols) {
            throw std::invalid_argument(std::string(what) + ": shape mismatch");
        }
    }

    void check_rowvec(int a, int b, const char* what) const {
        const auto& va = value(a);
        const auto& vb = value(b);
        if (vb.rows != 1 || vb.cols != va.cols) {
            throw std::invalid_argument(std::string(what) + ": second operand must be [1, cols]");
        }
    }

    std::vector<Node> nodes_;
    int cursor_ = -1;  // node whose pull is currently running
};

}  // namespace dar
