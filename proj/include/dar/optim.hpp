#pragma once

// Named parameter storage, AdamW with decoupled weight decay and global-norm
// gradient clipping, and the warmup + cosine learning-rate schedule.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "dar/tensor.hpp"

namespace dar {

template <typename T>
struct Param {
    std::string name;
    Tensor<T> value;
    bool trainable = true;
};

template <typename T>
class ParamStore {
public:
    int add(std::string name, Tensor<T> value, bool trainable = true) {
        for (const auto& p : params_) {
            if (p.name == name) throw std::invalid_argument("duplicate parameter name: " + name);
        }
        params_.push_back(Param<T>{std::move(name), std::move(value), trainable});
        return static_cast<int>(params_.size()) - 1;
    }

    int count() const { return static_cast<int>(params_.size()); }
    Param<T>& at(int i) { return params_[static_cast<size_t>(i)]; }
    const Param<T>& at(int i) const { return params_[static_cast<size_t>(i)]; }

    int find(const std::string& name) const {
        for (size_t i = 0; i < params_.size(); ++i) {
            if (params_[i].name == name) return static_cast<int>(i);
        }
        return -1;
    }

    Tensor<T>& operator[](const std::string& name) {
        const int i = find(name);
        if (i < 0) throw std::invalid_argument("unknown parameter: " + name);
        return params_[static_cast<size_t>(i)].value;
    }

    const Tensor<T>& operator[](const std::string& name) const {
        const int i = find(name);
        if (i < 0) throw std::invalid_argument("unknown parameter: " + name);
        return params_[static_cast<size_t>(i)].value;
    }

    size_t scalar_count(bool trainable_only = false) const {
        size_t n = 0;
        for (const auto& p : params_) {
            if (!trainable_only || p.trainable) n += p.value.size();
        }
        return n;
    }

private:
    std::vector<Param<T>> params_;
};

struct AdamWConfig {
    double beta1 = 0.9;
    double beta2 = 0.96;
    double eps = 1e-8;
    double weight_decay = 0.05;
    double clip = 1.0;  // <= 0 disables clipping
};

// Gradients are kept in doubles (one tensor per parameter; empty for frozen
// parameters) so the global-norm clip is exactly idempotent: after scaling by
// clip/norm with a one-ulp-scale undershoot, the recomputed norm can no
// longer exceed the threshold, so a second clip is a bitwise no-op.
using GradBuffers = std::vector<Tensor<double>>;

template <typename T>
inline GradBuffers make_grad_buffers(const ParamStore<T>& params) {
    GradBuffers g;
    g.reserve(static_cast<size_t>(params.count()));
    for (int i = 0; i < params.count(); ++i) {
        const auto& p = params.at(i);
        g.push_back(p.trainable ? Tensor<double>(p.value.rows, p.value.cols) : Tensor<double>());
    }
    return g;
}

inline void zero_grads(GradBuffers& grads) {
    for (auto& g : grads) g.zero();
}

inline double grad_global_norm(const GradBuffers& grads) {
    double sq = 0.0;
    for (const auto& g : grads) {
        for (double x : g.data) sq += x * x;
    }
    return std::sqrt(sq);
}

// Returns the pre-clip norm. Scaling uses a (1 - 1e-13) margin so that the
// clipped set's norm lands strictly below the threshold; clipping it again
// leaves every value bitwise unchanged.
inline double clip_global_norm(GradBuffers& grads, double clip) {
    const double norm = grad_global_norm(grads);
    if (clip > 0.0 && norm > clip) {
        const double s = clip / norm * (1.0 - 1e-13);
        for (auto& g : grads) {
            for (double& x : g.data) x *= s;
        }
    }
    return norm;
}

template <typename T>
class AdamW {
public:
    AdamW(const ParamStore<T>& params, AdamWConfig cfg) : cfg_(cfg) {
        m_.reserve(static_cast<size_t>(params.count()));
        v_.reserve(static_cast<size_t>(params.count()));
        for (int i = 0; i < params.count(); ++i) {
            const auto& p = params.at(i);
            m_.push_back(p.trainable ? Tensor<double>(p.value.rows, p.value.cols) : Tensor<double>());
            v_.push_back(p.trainable ? Tensor<double>(p.value.rows, p.value.cols) : Tensor<double>());
        }
    }

    // Clips in place, then applies bias-corrected moment updates and the
    // decoupled decay p <- p - lr*wd*p. Frozen parameters are untouched.
    void step(ParamStore<T>& params, GradBuffers& grads, double lr) {
        if (grads.size() != m_.size() || static_cast<size_t>(params.count()) != m_.size()) {
            throw std::invalid_argument("adamw: parameter/gradient count mismatch");
        }
        clip_global_norm(grads, cfg_.clip);
        ++step_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
        for (int i = 0; i < params.count(); ++i) {
            auto& p = params.at(i);
            if (!p.trainable) continue;
            auto& g = grads[static_cast<size_t>(i)];
            if (g.rows != p.value.rows || g.cols != p.value.cols) {
                throw std::invalid_argument("adamw: gradient shape mismatch for " + p.name);
            }
            auto& m = m_[static_cast<size_t>(i)];
            auto& v = v_[static_cast<size_t>(i)];
            for (size_t j = 0; j < g.data.size(); ++j) {
                const double gj = g.data[j];
                m.data[j] = cfg_.beta1 * m.data[j] + (1.0 - cfg_.beta1) * gj;
                v.data[j] = cfg_.beta2 * v.data[j] + (1.0 - cfg_.beta2) * gj * gj;
                const double mhat = m.data[j] / bc1;
                const double vhat = v.data[j] / bc2;
                const double pj = static_cast<double>(p.value.data[j]);
                p.value.data[j] = static_cast<T>(pj - lr * cfg_.weight_decay * pj -
                                                 lr * mhat / (std::sqrt(vhat) + cfg_.eps));
            }
        }
    }

    int64_t step_count() const { return step_; }
    const AdamWConfig& config() const { return cfg_; }

private:
    AdamWConfig cfg_;
    int64_t step_ = 0;
    std::vector<Tensor<double>> m_, v_;
};

struct LrSchedule {
    double base_lr = 1e-3;
    int warmup_epochs = 0;
    int total_epochs = 1;
    double ending_lr = 0.0;
    int steps_per_epoch = 1;

    void validate() const {
        if (warmup_epochs < 0 || warmup_epochs > total_epochs) {
            throw std::invalid_argument("lr schedule: need 0 <= warmup_epochs <= total_epochs");
        }
        if (ending_lr > base_lr) throw std::invalid_argument("lr schedule: ending_lr must not exceed base_lr");
        if (steps_per_epoch < 1 || total_epochs < 1) {
            throw std::invalid_argument("lr schedule: epochs and steps_per_epoch must be positive");
        }
    }

    int64_t warmup_steps() const { return static_cast<int64_t>(warmup_epochs) * steps_per_epoch; }
    int64_t total_steps() const { return static_cast<int64_t>(total_epochs) * steps_per_epoch; }
};

// Linear warmup from 0 to base_lr over the warmup span, then cosine decay to
// ending_lr, reaching it exactly at the last executed step (index total-1).
// Both branches give base_lr at the boundary.
inline double lr_at(int64_t step, const LrSchedule& sched) {
    if (step < 0) throw std::invalid_argument("lr_at: step must be >= 0");
    const int64_t warm = sched.warmup_steps();
    const int64_t total = sched.total_steps();
    if (step < warm) {
        return sched.base_lr * static_cast<double>(step) / static_cast<double>(warm);
    }
    const int64_t span = total - 1 - warm;
    double u = span > 0 ? static_cast<double>(step - warm) / static_cast<double>(span) : 0.0;
    u = std::min(std::max(u, 0.0), 1.0);
    return sched.ending_lr + (sched.base_lr - sched.ending_lr) * 0.5 * (1.0 + std::cos(std::numbers::pi * u));
}

}  // namespace dar
