/*
 * Copyright 2026 The dgpsel Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

// Reference implementations used by the tests. Nothing here calls into the
// library's numerics: kernels are evaluated with scalar loops, systems are
// solved with full-pivot LU, and random draws use an eigen square root.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline double se(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b, double sf2, const VectorXd& ell) {
    double r2 = 0.0;
    for (Eigen::Index j = 0; j < a.size(); ++j) {
        const double t = (a(j) - b(j)) / ell(j);
        r2 += t * t;
    }
    return sf2 * std::exp(-0.5 * r2);
}

inline MatrixXd se_gram(const MatrixXd& a, const MatrixXd& b, double sf2, const VectorXd& ell) {
    MatrixXd k(a.rows(), b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.rows(); ++j) k(i, j) = se(a.row(i), b.row(j), sf2, ell);
    }
    return k;
}

struct Posterior {
    VectorXd mean;
    VectorXd variance;  // includes sn2
};

/// Exact GP posterior through an explicit LU inverse of K + sn2 I.
inline Posterior dense_gp(const MatrixXd& x, const VectorXd& y, double sf2, const VectorXd& ell, double sn2,
                          const MatrixXd& xs) {
    MatrixXd c = se_gram(x, x, sf2, ell);
    c.diagonal().array() += sn2;
    const MatrixXd c_inv = c.fullPivLu().inverse();
    const MatrixXd ks = se_gram(x, xs, sf2, ell);
    Posterior p;
    p.mean = ks.transpose() * (c_inv * y);
    p.variance.resize(xs.rows());
    for (Eigen::Index t = 0; t < xs.rows(); ++t) {
        p.variance(t) = sf2 + sn2 - ks.col(t).dot(c_inv * ks.col(t));
    }
    return p;
}

/// Standard GP negative log marginal likelihood via LU determinant.
inline double dense_nlml(const MatrixXd& x, const VectorXd& y, double sf2, const VectorXd& ell, double sn2) {
    MatrixXd c = se_gram(x, x, sf2, ell);
    c.diagonal().array() += sn2;
    const auto lu = c.fullPivLu();
    double logdet = 0.0;
    const MatrixXd u = lu.matrixLU().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < u.rows(); ++i) logdet += std::log(std::abs(u(i, i)));
    return 0.5 * y.dot(lu.solve(y)) + 0.5 * logdet + 0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
}

/// Central differences of a scalar function.
inline VectorXd central_diff(const std::function<double(const VectorXd&)>& f, const VectorXd& x, double h = 1e-5) {
    VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        VectorXd xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        g(i) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

/// |a - b| <= tol * max(|a|, |b|, floor)
inline bool rel_close(double a, double b, double tol, double floor = 1e-8) {
    return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), floor});
}

inline double max_rel_err(const VectorXd& a, const VectorXd& b, double floor = 1e-8) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double s = std::max({std::abs(a(i)), std::abs(b(i)), floor});
        worst = std::max(worst, std::abs(a(i) - b(i)) / s);
    }
    return worst;
}

inline MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
    }
    return m;
}

inline MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
    }
    return m;
}

/// Symmetric square root through the eigendecomposition (negative
/// eigenvalues from round-off are clipped).
inline MatrixXd sqrt_psd(const MatrixXd& cov) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov);
    const VectorXd s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().transpose();
}

/// Columns are independent draws from N(0, cov).
inline MatrixXd sample_mvn(const MatrixXd& cov, Eigen::Index draws, std::mt19937_64& rng) {
    return sqrt_psd(cov) * gaussian_matrix(cov.rows(), draws, rng);
}

/// Noisy targets drawn from the GP prior at x.
inline VectorXd gp_sample(const MatrixXd& x, double sf2, const VectorXd& ell, double sn2, std::mt19937_64& rng) {
    MatrixXd c = se_gram(x, x, sf2, ell);
    c.diagonal().array() += sn2;
    return sample_mvn(c, 1, rng).col(0);
}

/// Empirical covariance of two samples and the standard error of that
/// estimate (spread of the centered products over sqrt(n)).
struct CovEstimate {
    double cov = 0.0;
    double std_error = 0.0;
};

inline CovEstimate empirical_cov(const VectorXd& a, const VectorXd& b) {
    const double n = static_cast<double>(a.size());
    const VectorXd p = (a.array() - a.mean()) * (b.array() - b.mean());
    const double m = p.mean();
    const double var = (p.array() - m).square().sum() / (n - 1.0);
    return {p.sum() / (n - 1.0), std::sqrt(var / n)};
}

/// Monte-Carlo estimate of Cov(mu_i, y*) and Cov(mu_i, mu_j), where mu_i is
/// expert i's posterior mean at xs computed from its own noisy targets.
/// Draws (y_train, y*) jointly from the prior.
struct NpaeMonteCarlo {
    VectorXd k_a, k_a_se;
    MatrixXd cov, cov_se;
};

inline NpaeMonteCarlo npae_monte_carlo(const MatrixXd& x, const std::vector<std::vector<std::size_t>>& groups,
                                       const MatrixXd& xs, double sf2, const VectorXd& ell, double sn2,
                                       Eigen::Index draws, std::uint64_t seed) {
    const Eigen::Index n = x.rows();
    MatrixXd all(n + 1, x.cols());
    all << x, xs.row(0);
    MatrixXd joint = se_gram(all, all, sf2, ell);
    joint.diagonal().array() += sn2;
    std::mt19937_64 rng(seed);
    const MatrixXd z = sample_mvn(joint, draws, rng);  // (n + 1) x draws

    const auto m = static_cast<Eigen::Index>(groups.size());
    MatrixXd mu(m, draws);
    for (Eigen::Index e = 0; e < m; ++e) {
        const auto& g = groups[static_cast<std::size_t>(e)];
        MatrixXd xi(static_cast<Eigen::Index>(g.size()), x.cols());
        MatrixXd yi(static_cast<Eigen::Index>(g.size()), draws);
        for (std::size_t a = 0; a < g.size(); ++a) {
            xi.row(static_cast<Eigen::Index>(a)) = x.row(static_cast<Eigen::Index>(g[a]));
            yi.row(static_cast<Eigen::Index>(a)) = z.row(static_cast<Eigen::Index>(g[a]));
        }
        MatrixXd c = se_gram(xi, xi, sf2, ell);
        c.diagonal().array() += sn2;
        const VectorXd w = c.fullPivLu().inverse() * se_gram(xi, xs.topRows(1), sf2, ell).col(0);
        mu.row(e) = w.transpose() * yi;
    }
    const VectorXd ystar = z.row(n).transpose();
    NpaeMonteCarlo out;
    out.k_a.resize(m);
    out.k_a_se.resize(m);
    out.cov.resize(m, m);
    out.cov_se.resize(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto ka = empirical_cov(mu.row(i).transpose(), ystar);
        out.k_a(i) = ka.cov;
        out.k_a_se(i) = ka.std_error;
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto c = empirical_cov(mu.row(i).transpose(), mu.row(j).transpose());
            out.cov(i, j) = c.cov;
            out.cov_se(i, j) = c.std_error;
        }
    }
    return out;
}

/// Gaussian blobs: `per_blob` points around every row of `centers`.
/// Returns the points and the zero-based blob of each row.
struct Blobs {
    MatrixXd points;
    std::vector<std::size_t> labels;
};

inline Blobs blobs(const MatrixXd& centers, std::size_t per_blob, double spread, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, spread);
    Blobs b;
    b.points.resize(centers.rows() * static_cast<Eigen::Index>(per_blob), centers.cols());
    Eigen::Index r = 0;
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
        for (std::size_t i = 0; i < per_blob; ++i, ++r) {
            for (Eigen::Index j = 0; j < centers.cols(); ++j) b.points(r, j) = centers(c, j) + n(rng);
            b.labels.push_back(static_cast<std::size_t>(c));
        }
    }
    return b;
}

}  // namespace oracle
