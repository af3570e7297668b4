#pragma once

// Central-finite-difference verification of reverse-mode gradients, run in
// 64-bit arithmetic.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dar/optim.hpp"

namespace dar {

struct GradCheckReport {
    double max_rel_err = 0.0;
    double max_abs_err = 0.0;
    std::string worst_param;
    size_t checked = 0;
};

inline double relative_error(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    return std::abs(analytic - numeric) / denom;
}

// Compare an analytic gradient of f at x against (f(x+eps)-f(x-eps))/(2 eps).
inline GradCheckReport grad_check_fn(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, const std::vector<double>& analytic,
                                     double eps = 1e-5) {
    if (x.size() != analytic.size()) throw std::invalid_argument("grad_check_fn: size mismatch");
    GradCheckReport rep;
    for (size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + eps;
        const double up = f(x);
        x[i] = keep - eps;
        const double dn = f(x);
        x[i] = keep;
        if (!std::isfinite(up) || !std::isfinite(dn)) {
            throw std::runtime_error("grad_check_fn: non-finite probe value");
        }
        const double fd = (up - dn) / (2.0 * eps);
        rep.max_abs_err = std::max(rep.max_abs_err, std::abs(fd - analytic[i]));
        rep.max_rel_err = std::max(rep.max_rel_err, relative_error(analytic[i], fd));
        ++rep.checked;
    }
    return rep;
}

// Compare analytic gradients for every trainable element of a parameter
// store. `loss` must be a pure function of the store. `analytic` holds one
// gradient tensor per parameter (empty for frozen entries). `stride`
// subsamples elements deterministically (1 = every element).
inline GradCheckReport grad_check_params(ParamStore<double>& params,
                                         const std::function<double(const ParamStore<double>&)>& loss,
                                         const GradBuffers& analytic, double eps = 1e-5, int stride = 1) {
    if (static_cast<size_t>(params.count()) != analytic.size()) {
        throw std::invalid_argument("grad_check_params: gradient buffer count mismatch");
    }
    if (stride < 1) throw std::invalid_argument("grad_check_params: stride must be >= 1");
    GradCheckReport rep;
    for (int i = 0; i < params.count(); ++i) {
        auto& p = params.at(i);
        if (!p.trainable) continue;
        const auto& g = analytic[static_cast<size_t>(i)];
        for (size_t j = 0; j < p.value.data.size(); j += static_cast<size_t>(stride)) {
            const double keep = p.value.data[j];
            p.value.data[j] = keep + eps;
            const double up = loss(params);
            p.value.data[j] = keep - eps;
            const double dn = loss(params);
            p.value.data[j] = keep;
            if (!std::isfinite(up) || !std::isfinite(dn)) {
                throw std::runtime_error("grad_check_params: non-finite loss at " + p.name);
            }
            const double fd = (up - dn) / (2.0 * eps);
            const double rel = relative_error(g.data[j], fd);
            if (rel > rep.max_rel_err) {
                rep.max_rel_err = rel;
                rep.worst_param = p.name + "[" + std::to_string(j) + "]";
            }
            rep.max_abs_err = std::max(rep.max_abs_err, std::abs(fd - g.data[j]));
            ++rep.checked;
        }
    }
    return rep;
}

}  // namespace dar
