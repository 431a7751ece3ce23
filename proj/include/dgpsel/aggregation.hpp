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

#include <span>
#include <string>
#include <vector>

#include "dgpsel/common.hpp"
#include "dgpsel/expert.hpp"
#include "dgpsel/selection.hpp"

namespace dgpsel {

enum class AggregationMethod { poe, gpoe, bcm, npae };
enum class BetaRule { uniform, diff_entropy };

std::string to_string(AggregationMethod m);
AggregationMethod aggregation_method_from_string(const std::string& s);
std::string to_string(BetaRule r);
BetaRule beta_rule_from_string(const std::string& s);

struct AggregationConfig {
    AggregationMethod method = AggregationMethod::npae;
    BetaRule beta_rule = BetaRule::diff_entropy;  // gpoe only
};

/// Covariances of the participating experts' predictions at one test point:
/// k_a[i] = Cov(mu_i, y*), cov(i, j) = Cov(mu_i, mu_j).
struct NpaeJoint {
    VectorXd k_a;
    MatrixXd cov;
    std::vector<ExpertId> expert_ids;
};

/// Builds the joint system at x for the given experts. With
/// v_i = C_i^{-1} k(X_i, x):
///   k_a[i]    = k(X_i, x)^T v_i
///   cov(i, j) = v_i^T Cov(y_i, y_j) v_j
/// Cov(y_i, y_i) = C_i, so cov(i, i) = k_a[i]. If `local_means` is given
/// it receives mu_i = k(X_i, x)^T alpha_i in the same order.
NpaeJoint build_npae_joint(const ExpertEnsemble& ensemble, std::span<const ExpertId> ids, PointRef x,
                           VectorXd* local_means = nullptr);

struct PointEstimate {
    double mean = 0.0;
    double variance = 0.0;
    bool fallback = false;  // pseudo-inverse solve (npae) or PoE fallback (bcm)
};

/// Weights w = cov^{-1} k_a of the best linear unbiased combination.
struct BlupWeights {
    VectorXd weights;
    bool pseudo_inverse = false;
    double jitter = 0.0;
};

/// Solves on the unit-diagonal rescaling of cov. Accepts a Cholesky factor
/// whose smallest squared pivot exceeds 1e-10 (and 10x any added jitter);
/// jitter escalates 1e-10 .. 1e-6 of the mean diagonal; otherwise falls back
/// to an eigen pseudo-inverse with relative rank tolerance 1e-10.
BlupWeights solve_blup(const MatrixXd& cov, const VectorXd& k_a);

/// mean = k_a^T cov^{-1} mu, variance = prior_variance - k_a^T cov^{-1} k_a
/// clamped below at 1e-12. `local_means` must follow joint.expert_ids.
PointEstimate npae_predict(const NpaeJoint& joint, const VectorXd& local_means, double prior_variance);

/// Precision-weighted fusion of one point's local predictions.
PointEstimate fuse_ci(const AggregationConfig& config, std::span<const double> means,
                      std::span<const double> variances, double prior_variance);

struct AggregatedPrediction {
    VectorXd mean;
    VectorXd variance;
    AggregationMethod method = AggregationMethod::npae;
    double wall_time_seconds = 0.0;
    double solve_time_seconds = 0.0;  // npae: time spent in the per-point K x K solves
    std::vector<std::size_t> experts_used;
    std::vector<bool> fallback;
    std::size_t fallback_count = 0;

    std::size_t size() const { return static_cast<std::size_t>(mean.size()); }
};

/// CI aggregation (poe, gpoe, bcm) over all given experts at every point.
AggregatedPrediction ci_aggregate(const AggregationConfig& config, const std::vector<LocalPrediction>& locals,
                                  double prior_variance);

/// Aggregates at every row of test_points, over all experts or over the
/// selector's choice per point. Selected ids are processed in ascending
/// order, so selecting every expert reproduces the unselected result.
AggregatedPrediction aggregate_batch(const ExpertEnsemble& ensemble, const AggregationConfig& config,
                                     const MatrixXd& test_points, const SelectorModel* selector = nullptr);

}  // namespace dgpsel
