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

#include "dgpsel/expert.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

namespace dgpsel {

SharedHyperparams SharedHyperparams::initial(std::size_t dim) {
    return {KernelParams::unit(dim), std::log(0.1)};
}

double SharedHyperparams::noise_variance() const { return std::exp(log_noise_variance); }

VectorXd SharedHyperparams::pack() const {
    VectorXd v(static_cast<Eigen::Index>(num_params()));
    v(0) = kernel.log_signal_variance;
    v.segment(1, kernel.log_lengthscales.size()) = kernel.log_lengthscales;
    v(v.size() - 1) = log_noise_variance;
    return v;
}

SharedHyperparams SharedHyperparams::unpack(const VectorXd& packed) {
    if (packed.size() < 3) {
        throw std::invalid_argument("packed hyperparameters need at least 3 entries");
    }
    SharedHyperparams t;
    t.kernel.log_signal_variance = packed(0);
    t.kernel.log_lengthscales = packed.segment(1, packed.size() - 2);
    t.log_noise_variance = packed(packed.size() - 1);
    return t;
}

void SharedHyperparams::validate() const {
    kernel.validate();
    if (!std::isfinite(log_noise_variance) || !(noise_variance() > 0.0) ||
        !std::isfinite(noise_variance())) {
        throw std::invalid_argument("noise variance must be finite and positive");
    }
}

CholeskyFactor cholesky_with_jitter(const MatrixXd& a) {
    const auto n = a.rows();
    Eigen::LLT<MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
        return {llt.matrixL(), 0.0};
    }
    const double scale = a.trace() / static_cast<double>(std::max<Eigen::Index>(n, 1));
    for (double rel = 1e-10; rel <= 1e-4 * (1 + 1e-9); rel *= 10.0) {
        const double jitter = rel * scale;
        MatrixXd b = a;
        b.diagonal().array() += jitter;
        llt.compute(b);
        if (llt.info() == Eigen::Success) {
            return {llt.matrixL(), jitter};
        }
    }
    throw NumericalError("Cholesky factorization failed after maximum jitter");
}

VectorXd ExpertModel::solve(const VectorXd& b) const {
    const auto l = gram_cholesky.triangularView<Eigen::Lower>();
    return l.transpose().solve(l.solve(b));
}

namespace {

MatrixXd gather_rows(const MatrixXd& x, const std::vector<std::size_t>& idx) {
    MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(idx[r]));
    }
    return out;
}

VectorXd gather(const VectorXd& y, const std::vector<std::size_t>& idx) {
    VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
        out(static_cast<Eigen::Index>(r)) = y(static_cast<Eigen::Index>(idx[r]));
    }
    return out;
}

}  // namespace

ExpertModel build_expert(const SharedHyperparams& theta, const Dataset& train, ExpertId id,
                         std::vector<std::size_t> indices) {
    if (indices.empty()) {
        throw std::invalid_argument("expert " + std::to_string(id) + " has no points");
    }
    for (auto i : indices) {
        if (i >= train.size()) {
            throw std::invalid_argument("expert index out of range");
        }
    }
    const auto kernel = theta.make_kernel();
    ExpertModel e;
    e.expert_id = id;
    e.inputs = gather_rows(train.features, indices);
    e.targets = gather(train.targets, indices);
    e.point_indices = std::move(indices);
    MatrixXd c = kernel.eval_matrix(e.inputs, e.inputs);
    c.diagonal().array() += theta.noise_variance();
    auto factor = cholesky_with_jitter(c);
    e.gram_cholesky = std::move(factor.lower);
    e.jitter = factor.jitter;
    e.alpha = e.solve(e.targets);
    return e;
}

std::vector<ExpertModel> build_experts(const SharedHyperparams& theta, const Dataset& train,
                                       const std::vector<std::vector<std::size_t>>& groups) {
    std::vector<ExpertModel> out;
    out.reserve(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        out.push_back(build_expert(theta, train, g, groups[g]));
    }
    return out;
}

LocalPrediction predict_local(const ExpertModel& expert, const SharedHyperparams& theta,
                              const MatrixXd& test_points) {
    if (static_cast<std::size_t>(test_points.cols()) != theta.dim()) {
        throw std::invalid_argument("test points have " + std::to_string(test_points.cols()) +
                                    " columns, expected " + std::to_string(theta.dim()));
    }
    const auto kernel = theta.make_kernel();
    const double noise = theta.noise_variance();
    const MatrixXd cross = kernel.eval_matrix(expert.inputs, test_points);  // n_i x n_t
    LocalPrediction p;
    p.mean = cross.transpose() * expert.alpha;
    const MatrixXd v = expert.gram_cholesky.triangularView<Eigen::Lower>().solve(cross);
    p.variance.resize(test_points.rows());
    for (Eigen::Index t = 0; t < test_points.rows(); ++t) {
        const double prior = kernel.eval(test_points.row(t), test_points.row(t)) + noise;
        p.variance(t) = std::max(prior - v.col(t).squaredNorm(), noise);
    }
    return p;
}

NlmlResult expert_nlml(const SharedHyperparams& theta, const MatrixXd& inputs, const VectorXd& targets) {
    const auto kernel = theta.make_kernel();
    const double noise = theta.noise_variance();
    const auto n = inputs.rows();
    NlmlResult r;
    r.gradient = VectorXd::Zero(static_cast<Eigen::Index>(theta.num_params()));

    MatrixXd c = kernel.eval_matrix(inputs, inputs);
    c.diagonal().array() += noise;
    CholeskyFactor f;
    try {
        f = cholesky_with_jitter(c);
    } catch (const NumericalError&) {
        r.value = std::numeric_limits<double>::infinity();
        return r;
    }
    const MatrixXd& lower = f.lower;
    const auto l = lower.triangularView<Eigen::Lower>();
    const VectorXd alpha = l.transpose().solve(l.solve(targets));
    r.value = 0.5 * targets.dot(alpha) + f.lower.diagonal().array().log().sum() +
              0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

    // dNLML/dp = 1/2 tr((C^-1 - alpha alpha^T) dC/dp)
    MatrixXd w = l.transpose().solve(l.solve(MatrixXd::Identity(n, n)));
    w.noalias() -= alpha * alpha.transpose();
    const auto grads = kernel.grad_params(inputs);
    for (std::size_t p = 0; p < grads.size(); ++p) {
        r.gradient(static_cast<Eigen::Index>(p)) = 0.5 * w.cwiseProduct(grads[p]).sum();
    }
    r.gradient(r.gradient.size() - 1) = 0.5 * noise * w.trace();
    return r;
}

NlmlResult joint_nlml(const SharedHyperparams& theta, const Dataset& train,
                      const std::vector<std::vector<std::size_t>>& groups) {
    if (groups.empty()) {
        throw std::invalid_argument("joint NLML needs at least one expert");
    }
    NlmlResult total;
    total.gradient = VectorXd::Zero(static_cast<Eigen::Index>(theta.num_params()));
    for (const auto& g : groups) {
        const auto part = expert_nlml(theta, gather_rows(train.features, g), gather(train.targets, g));
        total.value += part.value;
        total.gradient += part.gradient;
    }
    return total;
}

NlmlResult joint_nlml(const SharedHyperparams& theta, const PartitionModel& parts, const Dataset& train) {
    parts.validate(train.size());
    return joint_nlml(theta, train, parts.members());
}

namespace {

struct Block {
    MatrixXd inputs;
    VectorXd targets;
};

NlmlResult blocks_nlml(const SharedHyperparams& theta, const std::vector<Block>& blocks) {
    NlmlResult total;
    total.gradient = VectorXd::Zero(static_cast<Eigen::Index>(theta.num_params()));
    for (const auto& b : blocks) {
        const auto part = expert_nlml(theta, b.inputs, b.targets);
        total.value += part.value;
        total.gradient += part.gradient;
    }
    return total;
}

bool usable(const VectorXd& packed) {
    // exp() of these stays comfortably inside double range.
    return packed.allFinite() && (packed.array().abs() < 300.0).all();
}

struct RestartOutcome {
    VectorXd best;
    double best_value = std::numeric_limits<double>::infinity();
};

RestartOutcome adam_descent(const std::vector<Block>& blocks, VectorXd x, const OptimizerConfig& cfg) {
    RestartOutcome out;
    auto objective = [&](const VectorXd& p) {
        if (!usable(p)) {
            return NlmlResult{std::numeric_limits<double>::infinity(), VectorXd::Zero(p.size())};
        }
        return blocks_nlml(SharedHyperparams::unpack(p), blocks);
    };
    NlmlResult cur = objective(x);
    if (!std::isfinite(cur.value) || !cur.gradient.allFinite()) {
        return out;
    }
    out.best = x;
    out.best_value = cur.value;

    VectorXd m = VectorXd::Zero(x.size());
    VectorXd v = VectorXd::Zero(x.size());
    double step = cfg.step;
    std::size_t t = 0;
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        ++t;
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * cur.gradient;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * cur.gradient.cwiseAbs2();
        const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
        const VectorXd trial =
            x - step * ((m / c1).array() / ((v / c2).array().sqrt() + cfg.epsilon)).matrix();
        NlmlResult next = objective(trial);
        if (!std::isfinite(next.value) || !next.gradient.allFinite()) {
            // Stay at the last finite point and shorten the step.
            step *= 0.5;
            m.setZero();
            v.setZero();
            t = 0;
            if (step < 1e-8) {
                break;
            }
            continue;
        }
        x = trial;
        cur = std::move(next);
        if (cur.value < out.best_value) {
            out.best_value = cur.value;
            out.best = x;
        }
    }
    return out;
}

}  // namespace

FitResult fit(const Dataset& train, const std::vector<std::vector<std::size_t>>& groups,
              const SharedHyperparams& init, const OptimizerConfig& config) {
    init.validate();
    if (init.dim() != train.dim()) {
        throw std::invalid_argument("initial hyperparameters have the wrong dimension");
    }
    if (groups.empty()) {
        throw std::invalid_argument("fit needs at least one expert");
    }
    std::vector<Block> blocks;
    blocks.reserve(groups.size());
    for (const auto& g : groups) {
        if (g.empty()) {
            throw std::invalid_argument("empty expert group");
        }
        blocks.push_back({gather_rows(train.features, g), gather(train.targets, g)});
    }

    FitResult result;
    const VectorXd x0 = init.pack();
    result.initial_nlml = blocks_nlml(init, blocks).value;

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> jitter(0.0, config.restart_spread);
    RestartOutcome best;
    const std::size_t restarts = std::max<std::size_t>(config.restarts, 1);
    for (std::size_t r = 0; r < restarts; ++r) {
        VectorXd start = x0;
        if (r > 0) {
            for (Eigen::Index i = 0; i < start.size(); ++i) {
                start(i) += jitter(rng);
            }
        }
        auto outcome = adam_descent(blocks, start, config);
        if (!std::isfinite(outcome.best_value)) {
            ++result.restarts_failed;
            continue;
        }
        if (outcome.best_value < best.best_value) {
            best = std::move(outcome);
        }
    }
    if (!std::isfinite(best.best_value)) {
        throw NumericalError("hyperparameter training failed: every restart diverged");
    }
    result.theta = SharedHyperparams::unpack(best.best);
    result.final_nlml = best.best_value;
    result.experts = build_experts(result.theta, train, groups);
    return result;
}

FitResult fit(const Dataset& train, const PartitionModel& parts, const SharedHyperparams& init,
              const OptimizerConfig& config) {
    parts.validate(train.size());
    return fit(train, parts.members(), init, config);
}

FitResult fit_full_gp(const Dataset& train, const SharedHyperparams& init, const OptimizerConfig& config) {
    std::vector<std::size_t> all(train.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return fit(train, std::vector<std::vector<std::size_t>>{all}, init, config);
}

}  // namespace dgpsel

namespace dgpsel {

ExpertEnsemble::ExpertEnsemble(SharedHyperparams theta, std::vector<ExpertModel> experts)
    : theta_(std::move(theta)), experts_(std::move(experts)), kernel_(theta_.kernel) {
    theta_.validate();
    if (experts_.empty()) {
        throw std::invalid_argument("ensemble needs at least one expert");
    }
    const std::size_t m = experts_.size();
    const double noise = theta_.noise_variance();
    blocks_.resize(m * m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
            const auto& a = experts_[i];
            const auto& b = experts_[j];
            MatrixXd blk = kernel_.eval_matrix(a.inputs, b.inputs);
            for (std::size_t r = 0; r < a.point_indices.size(); ++r) {
                for (std::size_t c = 0; c < b.point_indices.size(); ++c) {
                    if (a.point_indices[r] == b.point_indices[c]) {
                        blk(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) += noise;
                    }
                }
            }
            if (i != j) {
                blocks_[j * m + i] = blk.transpose();
            }
            blocks_[i * m + j] = std::move(blk);
        }
    }
}

double ExpertEnsemble::prior_variance(PointRef x) const {
    return kernel_.eval(x, x) + theta_.noise_variance();
}

const MatrixXd& ExpertEnsemble::observation_covariance(ExpertId i, ExpertId j) const {
    if (i >= size() || j >= size()) {
        throw std::out_of_range("expert id out of range");
    }
    return blocks_[i * size() + j];
}

std::vector<LocalPrediction> ExpertEnsemble::predict_all(const MatrixXd& test_points) const {
    std::vector<LocalPrediction> out;
    out.reserve(experts_.size());
    for (const auto& e : experts_) {
        out.push_back(predict_local(e, theta_, test_points));
    }
    return out;
}

}  // namespace dgpsel
