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

#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include "dgpsel/selection.hpp"

using namespace dgpsel;

namespace {

Eigen::RowVectorXd pt(std::initializer_list<double> v) {
    Eigen::RowVectorXd r(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) r(i++) = x;
    return r;
}

}  // namespace

TEST_CASE("knn on a line of centroids") {
    MatrixXd c(3, 1);
    c << 0.0, 1.0, 2.0;
    const SelectorModel m = SelectorModel::knn(c, 2);
    const SelectionResult r = select_knn(m, pt({0.1}));
    // Zero-based ids: the two closest centroids are 0 and 1.
    CHECK(r.expert_ids == std::vector<ExpertId>{0, 1});
    REQUIRE(r.scores.size() == 2);
    CHECK(r.scores[0] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(r.scores[1] == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("knn at a centroid returns it with distance zero") {
    std::mt19937_64 rng(1);
    const MatrixXd c = oracle::gaussian_matrix(6, 3, rng);
    const SelectionResult r = select(SelectorModel::knn(c, 1), c.row(2));
    CHECK(r.expert_ids == std::vector<ExpertId>{2});
    CHECK(r.scores[0] == 0.0);
}

TEST_CASE("knn ties go to the lower index") {
    MatrixXd c(3, 1);
    c << -1.0, 1.0, 1.0;
    CHECK(select_knn(SelectorModel::knn(c, 1), pt({0.0})).expert_ids == std::vector<ExpertId>{0});
    CHECK(select_knn(SelectorModel::knn(c, 2), pt({0.0})).expert_ids == std::vector<ExpertId>{0, 1});
    CHECK(select_knn(SelectorModel::knn(c, 1), pt({1.0})).expert_ids == std::vector<ExpertId>{1});
}

TEST_CASE("knn near different centroids picks different experts") {
    MatrixXd c(2, 2);
    c << 0.0, 0.0, 5.0, 5.0;
    const SelectorModel m = SelectorModel::knn(c, 1);
    CHECK(select(m, pt({0.2, -0.1})).expert_ids != select(m, pt({4.8, 5.3})).expert_ids);
}

TEST_CASE("K = M selects every expert") {
    std::mt19937_64 rng(2);
    const MatrixXd c = oracle::gaussian_matrix(5, 2, rng);
    const auto clf = std::make_shared<const ClassifierModel>(ClassifierModel::initialize({2, 8, 5}, Activation::relu, 3));
    const SelectorModel models[] = {SelectorModel::knn(c, 5), SelectorModel::dnn(clf, 5),
                                    SelectorModel::static_graph(VectorXd::LinSpaced(5, 1, 2), 5)};
    for (const auto& m : models) {
        for (int t = 0; t < 10; ++t) {
            auto ids = select(m, oracle::gaussian_matrix(1, 2, rng).row(0)).expert_ids;
            std::sort(ids.begin(), ids.end());
            CHECK(ids == std::vector<ExpertId>{0, 1, 2, 3, 4});
        }
    }
}

TEST_CASE("dnn ranks by classifier probability") {
    auto model = ClassifierModel::zeros({2, 3}, Activation::relu);
    model.biases[0] << 0.1, 2.0, -1.0;
    const auto clf = std::make_shared<const ClassifierModel>(model);
    const SelectionResult r = select_dnn(SelectorModel::dnn(clf, 3), pt({0.4, 0.4}));
    CHECK(r.expert_ids == std::vector<ExpertId>{1, 0, 2});
    CHECK(r.scores[0] > r.scores[1]);
    CHECK(r.scores[1] > r.scores[2]);
    const VectorXd p = forward(model, pt({0.4, 0.4}));
    CHECK(r.scores[0] == doctest::Approx(p(1)).epsilon(1e-15));

    // Uniform output: ties resolve to ascending ids.
    const auto flat = std::make_shared<const ClassifierModel>(ClassifierModel::zeros({2, 4}, Activation::relu));
    CHECK(select_dnn(SelectorModel::dnn(flat, 2), pt({1.0, -3.0})).expert_ids == std::vector<ExpertId>{0, 1});
}

TEST_CASE("dnn selector on separable blobs") {
    std::mt19937_64 rng(4);
    MatrixXd centers(2, 2);
    centers << -3.0, 0.0, 3.0, 0.0;
    const auto b = oracle::blobs(centers, 80, 0.5, rng);
    TrainConfig cfg;
    cfg.epochs = 100;
    cfg.hidden_layers = {16};
    const TrainResult t = train_classifier(b.points, b.labels, 2, cfg);
    const auto clf = std::make_shared<const ClassifierModel>(t.model);
    const SelectorModel m = SelectorModel::dnn(clf, 1);
    CHECK(select(m, pt({-3.0, 0.0})).expert_ids == std::vector<ExpertId>{0});
    CHECK(select(m, pt({3.0, 0.1})).expert_ids == std::vector<ExpertId>{1});
}

TEST_CASE("precision degree on a block-diagonal covariance") {
    // Two independent 2-expert blocks; the second is ten times more coupled.
    MatrixXd s = MatrixXd::Identity(4, 4);
    s(0, 1) = s(1, 0) = 0.05;
    s(2, 3) = s(3, 2) = 0.5;
    const double ridge = 1e-3 * s.trace() / 4.0;
    const MatrixXd omega = (s + ridge * MatrixXd::Identity(4, 4)).fullPivLu().inverse();
    VectorXd ref(4);
    for (Eigen::Index i = 0; i < 4; ++i) ref(i) = omega.row(i).cwiseAbs().sum() - std::abs(omega(i, i));
    const VectorXd deg = precision_degree(s);
    CHECK(oracle::max_rel_err(deg, ref) < 1e-12);
    const SelectorModel m = SelectorModel::static_graph(deg, 2);
    CHECK(m.static_set() == std::vector<ExpertId>{2, 3});
    CHECK(precision_degree(s, 0.0).size() == 4);
}

TEST_CASE("identical expert predictions tie and resolve by index") {
    const VectorXd deg = precision_degree(MatrixXd::Ones(5, 5));
    CHECK(deg.allFinite());
    CHECK(top_k_descending(deg, 3) == std::vector<ExpertId>{0, 1, 2});

    // Same data in every expert makes S all equal entries.
    std::mt19937_64 rng(5);
    const MatrixXd x = oracle::gaussian_matrix(12, 2, rng);
    const VectorXd y = oracle::gaussian_matrix(12, 1, rng).col(0);
    const SharedHyperparams t = fixtures::theta(1.0, VectorXd::Ones(2), 0.1);
    const std::vector<std::size_t> all{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
    const ExpertEnsemble ens(t, build_experts(t, fixtures::identity_dataset(x, y), {all, all, all}));
    const SelectorModel m = fit_static_graph(ens, x, 2);
    CHECK(m.static_set() == std::vector<ExpertId>{0, 1});
}

TEST_CASE("static selector ignores the test point") {
    std::mt19937_64 rng(6);
    const MatrixXd x = oracle::gaussian_matrix(40, 2, rng);
    const VectorXd y = oracle::gp_sample(x, 1.0, VectorXd::Ones(2), 0.1, rng);
    const SharedHyperparams t = fixtures::theta(1.0, VectorXd::Ones(2), 0.1);
    const ExpertEnsemble ens(t, build_experts(t, fixtures::identity_dataset(x, y), kmeans_partition(x, 4, 0).members()));
    const SelectorModel m = fit_static_graph(ens, x, 2);
    CHECK(m.kind() == SelectorKind::static_graph);
    CHECK(m.static_set().size() == 2);
    CHECK(select(m, pt({0.0, 0.0})).expert_ids == select(m, pt({9.0, -4.0})).expert_ids);
    CHECK(select(m, pt({0.0, 0.0})).expert_ids == m.static_set());

    // k = M keeps both experts of a two-expert model whatever the graph.
    const ExpertEnsemble ens2(t, build_experts(t, fixtures::identity_dataset(x, y), fixtures::blocks(40, 2)));
    auto both = fit_static_graph(ens2, x, 2).static_set();
    std::sort(both.begin(), both.end());
    CHECK(both == std::vector<ExpertId>{0, 1});

    const MatrixXd s = prediction_covariance(ens, x);
    CHECK(s.rows() == 4);
    CHECK((s - s.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK_THROWS_AS(prediction_covariance(ens, x.topRows(1)), std::invalid_argument);
}

TEST_CASE("selector cardinality, distinctness and determinism") {
    std::mt19937_64 rng(7);
    const MatrixXd c = oracle::gaussian_matrix(8, 3, rng);
    const auto clf = std::make_shared<const ClassifierModel>(ClassifierModel::initialize({3, 10, 8}, Activation::tanh, 1));
    for (std::size_t k = 1; k <= 8; ++k) {
        const SelectorModel models[] = {SelectorModel::knn(c, k), SelectorModel::dnn(clf, k),
                                        SelectorModel::static_graph(oracle::gaussian_matrix(8, 1, rng).col(0), k)};
        for (const auto& m : models) {
            const Eigen::RowVectorXd x = oracle::gaussian_matrix(1, 3, rng).row(0);
            const SelectionResult a = select(m, x);
            CHECK(a.expert_ids.size() == k);
            CHECK(std::set<ExpertId>(a.expert_ids.begin(), a.expert_ids.end()).size() == k);
            CHECK(a.scores.size() == k);
            CHECK(select(m, x).expert_ids == a.expert_ids);
            CHECK(m.k() == k);
        }
    }
}

TEST_CASE("knn is permutation equivariant") {
    std::mt19937_64 rng(8);
    const MatrixXd c = oracle::gaussian_matrix(7, 2, rng);
    std::vector<Eigen::Index> perm{3, 0, 6, 1, 5, 2, 4};
    MatrixXd pc(7, 2);
    for (Eigen::Index i = 0; i < 7; ++i) pc.row(i) = c.row(perm[static_cast<std::size_t>(i)]);
    for (int t = 0; t < 20; ++t) {
        const Eigen::RowVectorXd x = oracle::gaussian_matrix(1, 2, rng).row(0);
        const auto a = select(SelectorModel::knn(c, 3), x).expert_ids;
        const auto b = select(SelectorModel::knn(pc, 3), x).expert_ids;
        for (std::size_t i = 0; i < 3; ++i) CHECK(static_cast<ExpertId>(perm[b[i]]) == a[i]);
    }
}

TEST_CASE("top_k_descending") {
    VectorXd s(5);
    s << 0.3, 0.9, 0.3, 0.9 + 1e-14, -1.0;
    CHECK(top_k_descending(s, 2) == std::vector<ExpertId>{1, 3});
    CHECK(top_k_descending(s, 4) == std::vector<ExpertId>{1, 3, 0, 2});
    CHECK_THROWS_AS(top_k_descending(s, 6), std::invalid_argument);
}

TEST_CASE("selector errors") {
    const MatrixXd c = MatrixXd::Zero(3, 2);
    CHECK_THROWS_AS(SelectorModel::knn(c, 0), std::invalid_argument);
    CHECK_THROWS_AS(SelectorModel::knn(c, 4), std::invalid_argument);
    CHECK_THROWS_AS(SelectorModel::knn(c, 2).with_k(5), std::invalid_argument);
    CHECK_THROWS_AS(select_knn(SelectorModel::knn(c, 2), pt({1.0})), std::invalid_argument);
    CHECK_THROWS_AS(SelectorModel::dnn(nullptr, 1), std::invalid_argument);
    const auto clf = std::make_shared<const ClassifierModel>(ClassifierModel::zeros({2, 3}, Activation::relu));
    CHECK_THROWS_AS(select_knn(SelectorModel::dnn(clf, 1), pt({1.0, 1.0})), std::logic_error);
    CHECK_THROWS_AS(select_dnn(SelectorModel::dnn(clf, 1), pt({1.0})), std::invalid_argument);
    const auto untrained = std::make_shared<const ClassifierModel>();
    CHECK_THROWS_AS(SelectorModel::dnn(untrained, 1), std::invalid_argument);
    CHECK_THROWS_AS(selector_kind_from_string("ggm"), std::invalid_argument);
    CHECK(selector_kind_from_string("static") == SelectorKind::static_graph);
    CHECK(to_string(SelectorKind::static_graph) == "static");
}
