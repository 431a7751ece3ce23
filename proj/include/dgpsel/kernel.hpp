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

#pragma once

#include <vector>

#include "dgpsel/common.hpp"

namespace dgpsel {

/// Log-parameterized squared-exponential ARD hyperparameters.
struct KernelParams {
    double log_signal_variance = 0.0;
    VectorXd log_lengthscales;

    static KernelParams unit(std::size_t dim) {
        return {0.0, VectorXd::Zero(static_cast<Eigen::Index>(dim))};
    }

    std::size_t dim() const { return static_cast<std::size_t>(log_lengthscales.size()); }
    double signal_variance() const;
    VectorXd lengthscales() const;

    /// Throws std::invalid_argument unless every entry is finite and the
    /// exponentiated values are strictly positive.
    void validate() const;
};

/// Covariance function interface used by the experts. The parameter order
/// of grad_params() is implementation-defined and matches packed().
class Kernel {
public:
    virtual ~Kernel() = default;

    virtual std::size_t dim() const = 0;
    virtual std::size_t num_params() const = 0;

    virtual double eval(PointRef x, PointRef y) const = 0;

    /// Entry (i, j) is eval(a.row(i), b.row(j)).
    virtual MatrixXd eval_matrix(const MatrixXd& a, const MatrixXd& b) const = 0;

    /// Column vector k(a_i, x).
    virtual VectorXd eval_vector(const MatrixXd& a, PointRef x) const = 0;

    /// d K(a, a) / d p for every log-parameter p.
    virtual std::vector<MatrixXd> grad_params(const MatrixXd& a) const = 0;
};

/// k(x, x') = sf2 * exp(-1/2 sum_j (x_j - x'_j)^2 / l_j^2).
/// Gradients are with respect to (log sf2, log l_1, ..., log l_d).
class SquaredExponentialArd final : public Kernel {
public:
    explicit SquaredExponentialArd(KernelParams params);

    const KernelParams& params() const { return params_; }

    std::size_t dim() const override { return params_.dim(); }
    std::size_t num_params() const override { return params_.dim() + 1; }

    double eval(PointRef x, PointRef y) const override;
    MatrixXd eval_matrix(const MatrixXd& a, const MatrixXd& b) const override;
    VectorXd eval_vector(const MatrixXd& a, PointRef x) const override;
    std::vector<MatrixXd> grad_params(const MatrixXd& a) const override;

private:
    KernelParams params_;
    double signal_variance_;
    Eigen::RowVectorXd inv_lengthscales_;
};

}  // namespace dgpsel
