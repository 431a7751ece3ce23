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

#include <cstdint>
#include <vector>

#include "dgpsel/common.hpp"
#include "dgpsel/dataset.hpp"
#include "dgpsel/kernel.hpp"
#include "dgpsel/partitioner.hpp"

namespace dgpsel {

/// Kernel parameters plus Gaussian noise variance, shared by every expert.
struct SharedHyperparams {
    KernelParams kernel;
    double log_noise_variance = 0.0;

    /// Unit lengthscales and signal variance, noise variance 0.1.
    static SharedHyperparams initial(std::size_t dim);

    std::size_t dim() const { return kernel.dim(); }
    std::size_t num_params() const { return kernel.dim() + 2; }
    double noise_variance() const;
    SquaredExponentialArd make_kernel() const { return SquaredExponentialArd(kernel); }

    /// (log sf2, log l_1..l_d, log sn2)
    VectorXd pack() const;
    static SharedHyperparams unpack(const VectorXd& packed);
    void validate() const;
};

/// Lower Cholesky factor of a symmetric matrix plus the diagonal jitter
/// that was needed to obtain it.
struct CholeskyFactor {
    MatrixXd lower;
    double jitter = 0.0;
};

/// Tries the plain factorization first, then adds 1e-10 * trace / n to the
/// diagonal, growing tenfold up to 1e-4 * trace / n. Throws NumericalError
/// when every attempt fails.
CholeskyFactor cholesky_with_jitter(const MatrixXd& a);

/// A standard GP on one partition, cached at fixed hyperparameters.
struct ExpertModel {
    ExpertId expert_id = 0;
    std::vector<std::size_t> point_indices;  // rows of the training set
    MatrixXd inputs;
    VectorXd targets;
    MatrixXd gram_cholesky;  // L with L L^T = K(X_i, X_i) + sn2 I (+ jitter)
    VectorXd alpha;          // (K + sn2 I)^{-1} y_i
    double jitter = 0.0;

    std::size_t size() const { return point_indices.size(); }

    /// (K + sn2 I)^{-1} b through the cached factor.
    VectorXd solve(const VectorXd& b) const;
};

ExpertModel build_expert(const SharedHyperparams& theta, const Dataset& train, ExpertId id,
                         std::vector<std::size_t> indices);

std::vector<ExpertModel> build_experts(const SharedHyperparams& theta, const Dataset& train,
                                       const std::vector<std::vector<std::size_t>>& groups);

/// Pointwise predictive distribution; variance includes the noise term.
struct LocalPrediction {
    VectorXd mean;
    VectorXd variance;
};

LocalPrediction predict_local(const ExpertModel& expert, const SharedHyperparams& theta,
                              const MatrixXd& test_points);

struct NlmlResult {
    double value = 0.0;
    VectorXd gradient;  // same order as SharedHyperparams::pack()
};

/// Negative log marginal likelihood of one GP and its gradient. A failed
/// factorization yields value = +inf.
NlmlResult expert_nlml(const SharedHyperparams& theta, const MatrixXd& inputs, const VectorXd& targets);

/// Sum of per-expert NLMLs over the given row groups.
NlmlResult joint_nlml(const SharedHyperparams& theta, const Dataset& train,
                      const std::vector<std::vector<std::size_t>>& groups);

NlmlResult joint_nlml(const SharedHyperparams& theta, const PartitionModel& parts, const Dataset& train);

struct OptimizerConfig {
    std::size_t iterations = 500;
    std::size_t restarts = 2;     // restart 0 starts at init, later ones at perturbed inits
    double step = 0.05;           // on log-parameters
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double restart_spread = 0.5;  // std of the log-space perturbation
    std::uint64_t seed = 0;
};

struct FitResult {
    SharedHyperparams theta;
    std::vector<ExpertModel> experts;
    double initial_nlml = 0.0;
    double final_nlml = 0.0;
    std::size_t restarts_failed = 0;
};

/// Adam descent on the joint NLML; returns the best iterate over all
/// restarts with every expert factorized at it.
FitResult fit(const Dataset& train, const std::vector<std::vector<std::size_t>>& groups,
              const SharedHyperparams& init, const OptimizerConfig& config = {});

FitResult fit(const Dataset& train, const PartitionModel& parts, const SharedHyperparams& init,
              const OptimizerConfig& config = {});

/// A single GP on all training rows through the distributed code path.
FitResult fit_full_gp(const Dataset& train, const SharedHyperparams& init, const OptimizerConfig& config = {});

/// Fitted distributed GP. Immutable; caches Cov(y_i, y_j) for every ordered
/// pair of experts, which includes sn2 on rows the two experts share.
class ExpertEnsemble {
public:
    ExpertEnsemble(SharedHyperparams theta, std::vector<ExpertModel> experts);

    const SharedHyperparams& hyperparams() const { return theta_; }
    const std::vector<ExpertModel>& experts() const { return experts_; }
    const ExpertModel& expert(ExpertId i) const { return experts_.at(i); }
    const Kernel& kernel() const { return kernel_; }
    std::size_t size() const { return experts_.size(); }
    std::size_t dim() const { return theta_.dim(); }

    /// k(x, x) + sn2
    double prior_variance(PointRef x) const;

    /// Cov(y_i, y_j) as an n_i x n_j block.
    const MatrixXd& observation_covariance(ExpertId i, ExpertId j) const;

    /// Local predictions of every expert at the given points.
    std::vector<LocalPrediction> predict_all(const MatrixXd& test_points) const;

private:
    SharedHyperparams theta_;
    std::vector<ExpertModel> experts_;
    SquaredExponentialArd kernel_;
    std::vector<MatrixXd> blocks_;
};

}  // namespace dgpsel
