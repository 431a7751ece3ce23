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

#include "dgpsel/kernel.hpp"

#include <cmath>
#include <string>

namespace dgpsel {

double KernelParams::signal_variance() const { return std::exp(log_signal_variance); }

VectorXd KernelParams::lengthscales() const { return log_lengthscales.array().exp(); }

void KernelParams::validate() const {
    if (log_lengthscales.size() < 1) {
        throw std::invalid_argument("kernel needs at least one lengthscale");
    }
    if (!std::isfinite(log_signal_variance) || !log_lengthscales.allFinite()) {
        throw std::invalid_argument("kernel parameters must be finite");
    }
    if (!(signal_variance() > 0.0) || !(lengthscales().array() > 0.0).all() ||
        !lengthscales().allFinite() || !std::isfinite(signal_variance())) {
        throw std::invalid_argument("kernel parameters out of representable range");
    }
}

SquaredExponentialArd::SquaredExponentialArd(KernelParams params) : params_(std::move(params)) {
    params_.validate();
    signal_variance_ = params_.signal_variance();
    inv_lengthscales_ = (-params_.log_lengthscales.array()).exp().transpose();
}

namespace {

void check_dim(std::size_t expected, Eigen::Index got, const char* what) {
    if (static_cast<std::size_t>(got) != expected) {
        throw std::invalid_argument(std::string("kernel: ") + what + " has dimension " +
                                    std::to_string(got) + ", expected " +
                                    std::to_string(expected));
    }
}

}  // namespace

double SquaredExponentialArd::eval(PointRef x, PointRef y) const {
    check_dim(dim(), x.size(), "x");
    check_dim(dim(), y.size(), "x'");
    const double r2 = ((x - y).array() * inv_lengthscales_.array()).square().sum();
    return signal_variance_ * std::exp(-0.5 * r2);
}

MatrixXd SquaredExponentialArd::eval_matrix(const MatrixXd& a, const MatrixXd& b) const {
    check_dim(dim(), a.cols(), "first point set");
    check_dim(dim(), b.cols(), "second point set");
    const MatrixXd sa = a.array().rowwise() * inv_lengthscales_.array();
    const MatrixXd sb = b.array().rowwise() * inv_lengthscales_.array();
    MatrixXd k(a.rows(), b.rows());
    // Explicit differences keep the diagonal of K(a, a) exact.
    for (Eigen::Index j = 0; j < sb.rows(); ++j) {
        const auto bj = sb.row(j);
        for (Eigen::Index i = 0; i < sa.rows(); ++i) {
            const double r2 = (sa.row(i) - bj).squaredNorm();
            k(i, j) = signal_variance_ * std::exp(-0.5 * r2);
        }
    }
    return k;
}

VectorXd SquaredExponentialArd::eval_vector(const MatrixXd& a, PointRef x) const {
    check_dim(dim(), a.cols(), "point set");
    check_dim(dim(), x.size(), "x");
    const Eigen::RowVectorXd sx = x.array() * inv_lengthscales_.array();
    VectorXd k(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double r2 = (a.row(i).array() * inv_lengthscales_.array() - sx.array()).square().sum();
        k(i) = signal_variance_ * std::exp(-0.5 * r2);
    }
    return k;
}

std::vector<MatrixXd> SquaredExponentialArd::grad_params(const MatrixXd& a) const {
    check_dim(dim(), a.cols(), "point set");
    if (a.rows() == 0) {
        throw std::invalid_argument("grad_params needs at least one point");
    }
    const MatrixXd k = eval_matrix(a, a);
    std::vector<MatrixXd> grads;
    grads.reserve(num_params());
    grads.push_back(k);
    const auto n = a.rows();
    for (Eigen::Index d = 0; d < a.cols(); ++d) {
        const double inv_l2 = inv_lengthscales_(d) * inv_lengthscales_(d);
        MatrixXd g(n, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index i = 0; i < n; ++i) {
                const double diff = a(i, d) - a(j, d);
                g(i, j) = k(i, j) * diff * diff * inv_l2;
            }
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

}  // namespace dgpsel
