#pragma once

// Fréchet distance between Gaussian statistics (the FID formula), with the
// matrix square root taken by symmetric eigendecomposition.

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "dar/tensor.hpp"

namespace dar {

struct GaussStats {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

// Gaussian fit over rows (unbiased covariance; zero when fewer than 2 rows).
inline GaussStats fit_gaussian(const Tensor<double>& rows) {
    if (rows.rows < 1) throw std::invalid_argument("fit_gaussian: need at least one row");
    GaussStats st;
    st.mean = Eigen::VectorXd::Zero(rows.cols);
    for (int i = 0; i < rows.rows; ++i) {
        for (int j = 0; j < rows.cols; ++j) st.mean[j] += rows.at(i, j);
    }
    st.mean /= rows.rows;
    st.cov = Eigen::MatrixXd::Zero(rows.cols, rows.cols);
    if (rows.rows > 1) {
        for (int i = 0; i < rows.rows; ++i) {
            Eigen::VectorXd d(rows.cols);
            for (int j = 0; j < rows.cols; ++j) d[j] = rows.at(i, j) - st.mean[j];
            st.cov += d * d.transpose();
        }
        st.cov /= rows.rows - 1;
    }
    return st;
}

namespace detail {

inline void check_symmetric(const Eigen::MatrixXd& m, const char* what) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
        throw std::invalid_argument(std::string(what) + ": covariance is not symmetric");
    }
}

// PSD square root; negative eigenvalues from numerical noise clamp to zero.
inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) throw std::runtime_error("psd_sqrt: eigendecomposition failed");
    Eigen::VectorXd ev = es.eigenvalues();
    for (int i = 0; i < ev.size(); ++i) ev[i] = ev[i] > 0.0 ? std::sqrt(ev[i]) : 0.0;
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

// ||muA - muB||^2 + Tr(SigmaA + SigmaB - 2 (SigmaA SigmaB)^{1/2}), computed
// through the symmetric product sqrt(A) B sqrt(A) so the inner square root
// stays an eigendecomposition of a symmetric matrix.
inline double frechet_gaussian(const GaussStats& a, const GaussStats& b) {
    if (a.mean.size() != b.mean.size() || a.cov.rows() != b.cov.rows()) {
        throw std::invalid_argument("frechet_gaussian: dimension mismatch");
    }
    detail::check_symmetric(a.cov, "frechet_gaussian(a)");
    detail::check_symmetric(b.cov, "frechet_gaussian(b)");
    const Eigen::MatrixXd sa = detail::psd_sqrt(0.5 * (a.cov + a.cov.transpose()));
    const Eigen::MatrixXd inner = sa * (0.5 * (b.cov + b.cov.transpose())) * sa;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (inner + inner.transpose()));
    if (es.info() != Eigen::Success) throw std::runtime_error("frechet_gaussian: eigendecomposition failed");
    double cross = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const double ev = es.eigenvalues()[i];
        cross += ev > 0.0 ? std::sqrt(ev) : 0.0;
    }
    const double score = (a.mean - b.mean).squaredNorm() + a.cov.trace() + b.cov.trace() - 2.0 * cross;
    return std::max(score, 0.0);
}

}  // namespace dar
