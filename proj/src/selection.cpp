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

#include "dgpsel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dgpsel {

std::string to_string(SelectorKind k) {
    switch (k) {
        case SelectorKind::knn: return "knn";
        case SelectorKind::dnn: return "dnn";
        case SelectorKind::static_graph: return "static";
    }
    return "?";
}

SelectorKind selector_kind_from_string(const std::string& s) {
    if (s == "knn") return SelectorKind::knn;
    if (s == "dnn") return SelectorKind::dnn;
    if (s == "static" || s == "static_graph") return SelectorKind::static_graph;
    throw std::invalid_argument("unknown selector '" + s + "'");
}

void SelectorModel::set_k(std::size_t k) {
    if (k < 1 || k > num_experts_) {
        throw std::invalid_argument("selector K must lie in [1, " + std::to_string(num_experts_) +
                                    "], got " + std::to_string(k));
    }
    k_ = k;
    if (kind_ == SelectorKind::static_graph) {
        static_set_ = top_k_descending(importance_, k);
        static_scores_.clear();
        for (auto id : static_set_) {
            static_scores_.push_back(importance_(static_cast<Eigen::Index>(id)));
        }
    }
}

SelectorModel SelectorModel::knn(MatrixXd centroids, std::size_t k) {
    SelectorModel m;
    m.kind_ = SelectorKind::knn;
    m.num_experts_ = static_cast<std::size_t>(centroids.rows());
    m.centroids_ = std::move(centroids);
    m.set_k(k);
    return m;
}

SelectorModel SelectorModel::dnn(std::shared_ptr<const ClassifierModel> classifier, std::size_t k) {
    if (!classifier || classifier->empty()) {
        throw std::invalid_argument("dnn selector needs a trained classifier");
    }
    SelectorModel m;
    m.kind_ = SelectorKind::dnn;
    m.num_experts_ = classifier->num_classes();
    m.classifier_ = std::move(classifier);
    m.set_k(k);
    return m;
}

SelectorModel SelectorModel::static_graph(VectorXd importance, std::size_t k) {
    SelectorModel m;
    m.kind_ = SelectorKind::static_graph;
    m.num_experts_ = static_cast<std::size_t>(importance.size());
    m.importance_ = std::move(importance);
    m.set_k(k);
    return m;
}

SelectorModel SelectorModel::with_k(std::size_t k) const {
    SelectorModel m = *this;
    m.set_k(k);
    return m;
}

namespace {

/// Ascending by score, then by id.
SelectionResult smallest_k(const std::vector<double>& scores, std::size_t k) {
    std::vector<ExpertId> ids(scores.size());
    std::iota(ids.begin(), ids.end(), ExpertId{0});
    std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k), ids.end(),
                      [&](ExpertId a, ExpertId b) {
                          return scores[a] < scores[b] || (scores[a] == scores[b] && a < b);
                      });
    ids.resize(k);
    SelectionResult r;
    r.expert_ids = ids;
    for (auto id : ids) r.scores.push_back(scores[id]);
    return r;
}

}  // namespace

SelectionResult select_knn(const SelectorModel& model, PointRef x) {
    if (model.kind() != SelectorKind::knn) {
        throw std::logic_error("select_knn called on a " + to_string(model.kind()) + " selector");
    }
    const auto& c = model.centroids();
    if (x.size() != c.cols()) {
        throw std::invalid_argument("test point has dimension " + std::to_string(x.size()) +
                                    ", expected " + std::to_string(c.cols()));
    }
    std::vector<double> d2(static_cast<std::size_t>(c.rows()));
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
        d2[static_cast<std::size_t>(i)] = (c.row(i) - x).squaredNorm();
    }
    auto r = smallest_k(d2, model.k());
    for (auto& s : r.scores) s = std::sqrt(s);
    return r;
}

SelectionResult select_dnn(const SelectorModel& model, PointRef x) {
    if (model.kind() != SelectorKind::dnn) {
        throw std::logic_error("select_dnn called on a " + to_string(model.kind()) + " selector");
    }
    const VectorXd p = forward(*model.classifier(), x);
    std::vector<double> neg(static_cast<std::size_t>(p.size()));
    for (Eigen::Index i = 0; i < p.size(); ++i) neg[static_cast<std::size_t>(i)] = -p(i);
    auto r = smallest_k(neg, model.k());
    for (auto& s : r.scores) s = -s;
    return r;
}

SelectionResult select_static(const SelectorModel& model) {
    if (model.kind() != SelectorKind::static_graph) {
        throw std::logic_error("select_static called on a " + to_string(model.kind()) + " selector");
    }
    return {model.static_set_, model.static_scores_};
}

SelectionResult select(const SelectorModel& model, PointRef x) {
    switch (model.kind()) {
        case SelectorKind::knn: return select_knn(model, x);
        case SelectorKind::dnn: return select_dnn(model, x);
        case SelectorKind::static_graph: return select_static(model);
    }
    throw std::logic_error("unknown selector kind");
}

std::vector<ExpertId> top_k_descending(const VectorXd& scores, std::size_t k) {
    const auto m = static_cast<std::size_t>(scores.size());
    if (k > m) {
        throw std::invalid_argument("k exceeds the number of scores");
    }
    const double scale = scores.size() > 0 ? scores.cwiseAbs().maxCoeff() : 0.0;
    std::vector<double> q(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double s = scores(static_cast<Eigen::Index>(i));
        q[i] = scale > 0.0 ? std::round(s / scale * 1e12) : 0.0;
    }
    std::vector<ExpertId> ids(m);
    std::iota(ids.begin(), ids.end(), ExpertId{0});
    std::stable_sort(ids.begin(), ids.end(), [&](ExpertId a, ExpertId b) { return q[a] > q[b]; });
    ids.resize(k);
    return ids;
}

VectorXd precision_degree(const MatrixXd& covariance, std::optional<double> ridge) {
    const auto m = covariance.rows();
    if (m < 1 || covariance.cols() != m) {
        throw std::invalid_argument("covariance must be square and non-empty");
    }
    double r = ridge.value_or(1e-3 * covariance.trace() / static_cast<double>(m));
    if (!(r > 0.0)) {
        // All-constant predictions give a zero trace.
        r = 1e-12;
    }
    MatrixXd reg = covariance;
    reg.diagonal().array() += r;
    const Eigen::LDLT<MatrixXd> ldlt(reg);
    if (ldlt.info() != Eigen::Success) {
        throw NumericalError("regularized covariance is not invertible");
    }
    const MatrixXd precision = ldlt.solve(MatrixXd::Identity(m, m));
    VectorXd degree(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        degree(i) = precision.row(i).cwiseAbs().sum() - std::abs(precision(i, i));
    }
    return degree;
}

MatrixXd prediction_covariance(const ExpertEnsemble& ensemble, const MatrixXd& calibration_points) {
    if (calibration_points.rows() < 2) {
        throw std::invalid_argument("static selection needs at least 2 calibration points");
    }
    const auto locals = ensemble.predict_all(calibration_points);
    const auto n = calibration_points.rows();
    MatrixXd preds(n, static_cast<Eigen::Index>(locals.size()));
    for (std::size_t i = 0; i < locals.size(); ++i) {
        preds.col(static_cast<Eigen::Index>(i)) = locals[i].mean;
    }
    const MatrixXd centered = preds.rowwise() - preds.colwise().mean();
    return centered.transpose() * centered / static_cast<double>(n - 1);
}

SelectorModel fit_static_graph(const ExpertEnsemble& ensemble, const MatrixXd& calibration_points,
                               std::size_t k, std::optional<double> ridge) {
    return SelectorModel::static_graph(
        precision_degree(prediction_covariance(ensemble, calibration_points), ridge), k);
}

}  // namespace dgpsel
