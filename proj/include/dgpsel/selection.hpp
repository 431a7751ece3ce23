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

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dgpsel/classifier.hpp"
#include "dgpsel/common.hpp"
#include "dgpsel/expert.hpp"

namespace dgpsel {

enum class SelectorKind { knn, dnn, static_graph };

std::string to_string(SelectorKind k);
SelectorKind selector_kind_from_string(const std::string& s);

/// K expert ids ordered by the selector's score: ascending centroid
/// distance (knn), descending probability (dnn) or descending graph
/// importance (static_graph). Ties go to the lower id.
struct SelectionResult {
    std::vector<ExpertId> expert_ids;
    std::vector<double> scores;
};

/// A trained selector mapping a test point to K of the M experts.
class SelectorModel {
public:
    static SelectorModel knn(MatrixXd centroids, std::size_t k);
    static SelectorModel dnn(std::shared_ptr<const ClassifierModel> classifier, std::size_t k);
    /// `importance` holds one score per expert; the static set is its top k.
    static SelectorModel static_graph(VectorXd importance, std::size_t k);

    SelectorKind kind() const { return kind_; }
    std::size_t k() const { return k_; }
    std::size_t num_experts() const { return num_experts_; }
    const MatrixXd& centroids() const { return centroids_; }
    const std::shared_ptr<const ClassifierModel>& classifier() const { return classifier_; }
    const VectorXd& importance() const { return importance_; }
    const std::vector<ExpertId>& static_set() const { return static_set_; }

    /// Same trained state, different K.
    SelectorModel with_k(std::size_t k) const;

private:
    SelectorModel() = default;
    void set_k(std::size_t k);

    SelectorKind kind_ = SelectorKind::knn;
    std::size_t k_ = 0;
    std::size_t num_experts_ = 0;
    MatrixXd centroids_;
    std::shared_ptr<const ClassifierModel> classifier_;
    VectorXd importance_;
    std::vector<ExpertId> static_set_;
    std::vector<double> static_scores_;

    friend SelectionResult select_static(const SelectorModel&);
};

/// Euclidean distance to each centroid; the K closest.
SelectionResult select_knn(const SelectorModel& model, PointRef x);

/// Classifier probabilities; the K most probable.
SelectionResult select_dnn(const SelectorModel& model, PointRef x);

SelectionResult select_static(const SelectorModel& model);

/// Dispatches on kind; the static selector ignores x.
SelectionResult select(const SelectorModel& model, PointRef x);

/// Node importance sum_{j != i} |Omega_ij| with Omega = (S + ridge I)^{-1}.
/// Without a ridge, 1e-3 * trace(S) / M is used.
VectorXd precision_degree(const MatrixXd& covariance, std::optional<double> ridge = std::nullopt);

/// M x M covariance of the experts' centered prediction vectors.
MatrixXd prediction_covariance(const ExpertEnsemble& ensemble, const MatrixXd& calibration_points);

/// Static selector from the experts' predictions at the calibration points.
SelectorModel fit_static_graph(const ExpertEnsemble& ensemble, const MatrixXd& calibration_points,
                               std::size_t k, std::optional<double> ridge = std::nullopt);

/// Indices of the k largest scores; ties (at 12 significant digits relative
/// to the largest magnitude) go to the lower index.
std::vector<ExpertId> top_k_descending(const VectorXd& scores, std::size_t k);

}  // namespace dgpsel
