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

#include "dgpsel/aggregation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace dgpsel {

std::string to_string(AggregationMethod m) {
    switch (m) {
        case AggregationMethod::poe: return "poe";
        case AggregationMethod::gpoe: return "gpoe";
        case AggregationMethod::bcm: return "bcm";
        case AggregationMethod::npae: return "npae";
    }
    return "?";
}

AggregationMethod aggregation_method_from_string(const std::string& s) {
    if (s == "poe") return AggregationMethod::poe;
    if (s == "gpoe") return AggregationMethod::gpoe;
    if (s == "bcm") return AggregationMethod::bcm;
    if (s == "npae") return AggregationMethod::npae;
    throw std::invalid_argument("unknown aggregation method '" + s + "'");
}

std::string to_string(BetaRule r) { return r == BetaRule::uniform ? "uniform" : "diff_entropy"; }

BetaRule beta_rule_from_string(const std::string& s) {
    if (s == "uniform") return BetaRule::uniform;
    if (s == "diff_entropy") return BetaRule::diff_entropy;
    throw std::invalid_argument("unknown beta rule '" + s + "'");
}

NpaeJoint build_npae_joint(const ExpertEnsemble& ensemble, std::span<const ExpertId> ids, PointRef x,
                           VectorXd* local_means) {
    if (ids.empty()) {
        throw std::invalid_argument("NPAE needs at least one expert");
    }
    if (static_cast<std::size_t>(x.size()) != ensemble.dim()) {
        throw std::invalid_argument("test point has dimension " + std::to_string(x.size()) +
                                    ", expected " + std::to_string(ensemble.dim()));
    }
    const auto m = static_cast<Eigen::Index>(ids.size());
    NpaeJoint j;
    j.expert_ids.assign(ids.begin(), ids.end());
    j.k_a.resize(m);
    j.cov.resize(m, m);
    if (local_means) {
        local_means->resize(m);
    }
    std::vector<VectorXd> v(ids.size());
    for (Eigen::Index a = 0; a < m; ++a) {
        const auto& e = ensemble.expert(ids[static_cast<std::size_t>(a)]);
        const VectorXd k = ensemble.kernel().eval_vector(e.inputs, x);
        v[static_cast<std::size_t>(a)] = e.solve(k);
        j.k_a(a) = k.dot(v[static_cast<std::size_t>(a)]);
        j.cov(a, a) = j.k_a(a);
        if (local_means) {
            (*local_means)(a) = k.dot(e.alpha);
        }
    }
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = a + 1; b < m; ++b) {
            const auto& blk = ensemble.observation_covariance(ids[static_cast<std::size_t>(a)],
                                                              ids[static_cast<std::size_t>(b)]);
            const double c = v[static_cast<std::size_t>(a)].dot(blk * v[static_cast<std::size_t>(b)]);
            j.cov(a, b) = c;
            j.cov(b, a) = c;
        }
    }
    return j;
}

namespace {

constexpr double kRankTolerance = 1e-10;

/// Returns true and leaves the factor in `llt` if every squared pivot
/// exceeds `floor`.
bool factor_accepted(Eigen::LLT<MatrixXd>& llt, const MatrixXd& a, double floor) {
    llt.compute(a);
    if (llt.info() != Eigen::Success) {
        return false;
    }
    return llt.matrixLLT().diagonal().array().square().minCoeff() > floor;
}

}  // namespace

BlupWeights solve_blup(const MatrixXd& cov, const VectorXd& k_a) {
    const auto m = cov.rows();
    if (m < 1 || cov.cols() != m || k_a.size() != m) {
        throw std::invalid_argument("NPAE system has inconsistent dimensions");
    }
    VectorXd scale(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double d = cov(i, i);
        scale(i) = d > 0.0 ? 1.0 / std::sqrt(d) : 1.0;
    }
    const MatrixXd a = scale.asDiagonal() * cov * scale.asDiagonal();
    const VectorXd rhs = scale.cwiseProduct(k_a);
    const double max_diag = a.diagonal().maxCoeff();
    const double mean_diag = a.diagonal().mean();

    BlupWeights out;
    Eigen::LLT<MatrixXd> llt(m);
    if (max_diag > 0.0) {
        if (factor_accepted(llt, a, kRankTolerance * max_diag)) {
            out.weights = scale.cwiseProduct(llt.solve(rhs));
            return out;
        }
        for (double rel = 1e-10; rel <= 1e-6 * (1 + 1e-9); rel *= 10.0) {
            const double jitter = rel * mean_diag;
            MatrixXd b = a;
            b.diagonal().array() += jitter;
            if (factor_accepted(llt, b, std::max(kRankTolerance * max_diag, 10.0 * jitter))) {
                out.weights = scale.cwiseProduct(llt.solve(rhs));
                out.jitter = jitter;
                return out;
            }
        }
    }
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(a);
    if (eig.info() != Eigen::Success) {
        throw NumericalError("NPAE covariance eigen-decomposition failed");
    }
    const VectorXd& lambda = eig.eigenvalues();
    const double cutoff = kRankTolerance * std::max(lambda.cwiseAbs().maxCoeff(), 0.0);
    VectorXd inv = VectorXd::Zero(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (lambda(i) > cutoff) {
            inv(i) = 1.0 / lambda(i);
        }
    }
    const MatrixXd& q = eig.eigenvectors();
    out.weights = scale.cwiseProduct(q * inv.asDiagonal() * (q.transpose() * rhs));
    out.pseudo_inverse = true;
    return out;
}

PointEstimate npae_predict(const NpaeJoint& joint, const VectorXd& local_means, double prior_variance) {
    if (local_means.size() != joint.k_a.size()) {
        throw std::invalid_argument("local means are not aligned with the NPAE system");
    }
    const auto w = solve_blup(joint.cov, joint.k_a);
    PointEstimate p;
    p.mean = w.weights.dot(local_means);
    p.variance = std::max(prior_variance - w.weights.dot(joint.k_a), 1e-12);
    p.fallback = w.pseudo_inverse;
    return p;
}

PointEstimate fuse_ci(const AggregationConfig& config, std::span<const double> means,
                      std::span<const double> variances, double prior_variance) {
    const std::size_t m = means.size();
    if (m == 0 || variances.size() != m) {
        throw std::invalid_argument("CI aggregation needs aligned, non-empty expert predictions");
    }
    if (config.method == AggregationMethod::npae) {
        throw std::invalid_argument("fuse_ci does not handle npae");
    }
    std::vector<double> beta(m, 1.0);
    if (config.method == AggregationMethod::gpoe) {
        if (config.beta_rule == BetaRule::diff_entropy) {
            double total = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                beta[i] = std::max(0.5 * (std::log(prior_variance) - std::log(variances[i])), 0.0);
                total += beta[i];
            }
            if (total > 1e-300 && std::isfinite(total)) {
                for (auto& b : beta) b /= total;
            } else {
                std::fill(beta.begin(), beta.end(), 1.0 / static_cast<double>(m));
            }
        } else {
            std::fill(beta.begin(), beta.end(), 1.0 / static_cast<double>(m));
        }
    }
    auto fuse = [&](bool prior_correction) {
        double precision = 0.0;
        double weighted = 0.0;
        double beta_sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            precision += beta[i] / variances[i];
            weighted += beta[i] * means[i] / variances[i];
            beta_sum += beta[i];
        }
        if (prior_correction) {
            precision += (1.0 - beta_sum) / prior_variance;
        }
        return std::pair{precision, weighted};
    };
    PointEstimate p;
    auto [precision, weighted] = fuse(config.method == AggregationMethod::bcm);
    if (!(precision > 0.0) || !std::isfinite(precision)) {
        std::tie(precision, weighted) = fuse(false);
        p.fallback = true;
    }
    p.mean = weighted / precision;
    p.variance = 1.0 / precision;
    return p;
}

AggregatedPrediction ci_aggregate(const AggregationConfig& config, const std::vector<LocalPrediction>& locals,
                                  double prior_variance) {
    if (locals.empty()) {
        throw std::invalid_argument("CI aggregation needs at least one expert");
    }
    const auto n = locals.front().mean.size();
    for (const auto& l : locals) {
        if (l.mean.size() != n || l.variance.size() != n) {
            throw std::invalid_argument("local predictions have different lengths");
        }
    }
    const auto t0 = std::chrono::steady_clock::now();
    AggregatedPrediction out;
    out.method = config.method;
    out.mean.resize(n);
    out.variance.resize(n);
    out.experts_used.assign(static_cast<std::size_t>(n), locals.size());
    out.fallback.assign(static_cast<std::size_t>(n), false);
    std::vector<double> mu(locals.size()), var(locals.size());
    for (Eigen::Index t = 0; t < n; ++t) {
        for (std::size_t i = 0; i < locals.size(); ++i) {
            mu[i] = locals[i].mean(t);
            var[i] = locals[i].variance(t);
        }
        const auto p = fuse_ci(config, mu, var, prior_variance);
        out.mean(t) = p.mean;
        out.variance(t) = p.variance;
        out.fallback[static_cast<std::size_t>(t)] = p.fallback;
        out.fallback_count += p.fallback ? 1 : 0;
    }
    out.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

AggregatedPrediction aggregate_batch(const ExpertEnsemble& ensemble, const AggregationConfig& config,
                                     const MatrixXd& test_points, const SelectorModel* selector) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    if (test_points.rows() > 0 && static_cast<std::size_t>(test_points.cols()) != ensemble.dim()) {
        throw std::invalid_argument("test points have " + std::to_string(test_points.cols()) +
                                    " columns, expected " + std::to_string(ensemble.dim()));
    }
    if (selector && selector->num_experts() != ensemble.size()) {
        throw std::invalid_argument("selector was built for a different number of experts");
    }
    const auto n = test_points.rows();
    AggregatedPrediction out;
    out.method = config.method;
    out.mean.resize(n);
    out.variance.resize(n);
    out.experts_used.assign(static_cast<std::size_t>(n), 0);
    out.fallback.assign(static_cast<std::size_t>(n), false);
    if (n == 0) {
        return out;
    }

    std::vector<ExpertId> all(ensemble.size());
    std::iota(all.begin(), all.end(), ExpertId{0});
    auto ids_at = [&](Eigen::Index t) {
        if (!selector) {
            return all;
        }
        auto ids = select(*selector, test_points.row(t)).expert_ids;
        std::sort(ids.begin(), ids.end());
        return ids;
    };

    if (config.method == AggregationMethod::npae) {
        std::vector<NpaeJoint> joints;
        std::vector<VectorXd> means(static_cast<std::size_t>(n));
        std::vector<double> priors(static_cast<std::size_t>(n));
        joints.reserve(static_cast<std::size_t>(n));
        for (Eigen::Index t = 0; t < n; ++t) {
            const auto ids = ids_at(t);
            joints.push_back(build_npae_joint(ensemble, ids, test_points.row(t), &means[static_cast<std::size_t>(t)]));
            priors[static_cast<std::size_t>(t)] = ensemble.prior_variance(test_points.row(t));
            out.experts_used[static_cast<std::size_t>(t)] = ids.size();
        }
        const auto s0 = clock::now();
        for (Eigen::Index t = 0; t < n; ++t) {
            const auto i = static_cast<std::size_t>(t);
            const auto p = npae_predict(joints[i], means[i], priors[i]);
            out.mean(t) = p.mean;
            out.variance(t) = p.variance;
            out.fallback[i] = p.fallback;
        }
        out.solve_time_seconds = std::chrono::duration<double>(clock::now() - s0).count();
    } else {
        const auto locals = ensemble.predict_all(test_points);
        std::vector<double> mu, var;
        for (Eigen::Index t = 0; t < n; ++t) {
            const auto ids = ids_at(t);
            mu.clear();
            var.clear();
            for (auto id : ids) {
                mu.push_back(locals[id].mean(t));
                var.push_back(locals[id].variance(t));
            }
            const auto p = fuse_ci(config, mu, var, ensemble.prior_variance(test_points.row(t)));
            out.mean(t) = p.mean;
            out.variance(t) = p.variance;
            out.fallback[static_cast<std::size_t>(t)] = p.fallback;
            out.experts_used[static_cast<std::size_t>(t)] = ids.size();
        }
    }
    out.fallback_count = static_cast<std::size_t>(std::count(out.fallback.begin(), out.fallback.end(), true));
    out.wall_time_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    return out;
}

}  // namespace dgpsel
