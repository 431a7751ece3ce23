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
#include <filesystem>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "dgpsel/classifier.hpp"
#include "dgpsel/dataset.hpp"
#include "dgpsel/partitioner.hpp"

using namespace dgpsel;

namespace {

// Cross-entropy written out directly from the network definition.
double reference_loss(const ClassifierModel& m, const MatrixXd& x, const std::vector<std::size_t>& labels) {
    double total = 0.0;
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        VectorXd a = x.row(r).transpose();
        for (std::size_t l = 0; l < m.num_layers(); ++l) {
            VectorXd z = m.weights[l] * a + m.biases[l];
            if (l + 1 < m.num_layers()) {
                a = m.activation == Activation::relu ? VectorXd(z.cwiseMax(0.0)) : VectorXd(z.array().tanh());
            } else {
                const double mx = z.maxCoeff();
                const double lse = mx + std::log((z.array() - mx).exp().sum());
                total -= z(static_cast<Eigen::Index>(labels[static_cast<std::size_t>(r)])) - lse;
            }
        }
    }
    return total / static_cast<double>(x.rows());
}

std::vector<std::size_t> random_labels(std::size_t n, std::size_t m, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> u(0, m - 1);
    std::vector<std::size_t> l(n);
    for (auto& v : l) v = u(rng);
    return l;
}

}  // namespace

TEST_CASE("zero network is uniform") {
    const ClassifierModel m = ClassifierModel::zeros({3, 5, 4}, Activation::relu);
    const VectorXd p = forward(m, Eigen::RowVectorXd::Constant(3, 2.0));
    CHECK((p.array() - 0.25).abs().maxCoeff() < 1e-15);
    const std::vector<std::size_t> labels{2, 0};
    CHECK(loss_and_grad(m, MatrixXd::Random(2, 3), labels).loss == doctest::Approx(std::log(4.0)).epsilon(1e-14));
}

TEST_CASE("softmax outputs form a simplex") {
    std::mt19937_64 rng(1);
    const ClassifierModel m = ClassifierModel::initialize({4, 12, 12, 6}, Activation::tanh, 7);
    const MatrixXd x = oracle::gaussian_matrix(100, 4, rng, 3.0);
    const MatrixXd p = forward_batch(m, x);
    CHECK(p.rows() == 100);
    CHECK(p.cols() == 6);
    CHECK((p.array() > 0.0).all());
    CHECK(((p.rowwise().sum().array() - 1.0).abs() < 1e-9).all());
    CHECK((forward(m, x.row(17)) - p.row(17).transpose()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("output bias shift leaves probabilities unchanged") {
    std::mt19937_64 rng(2);
    ClassifierModel m = ClassifierModel::initialize({3, 8, 5}, Activation::relu, 2);
    const MatrixXd x = oracle::gaussian_matrix(10, 3, rng);
    const MatrixXd before = forward_batch(m, x);
    m.biases.back().array() += 3.7;
    CHECK((forward_batch(m, x) - before).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("loss matches the reference and duplicating rows keeps it") {
    std::mt19937_64 rng(3);
    const ClassifierModel m = ClassifierModel::initialize({3, 6, 4}, Activation::relu, 3);
    const MatrixXd x = oracle::gaussian_matrix(7, 3, rng);
    const auto labels = random_labels(7, 4, rng);
    const LossAndGrad a = loss_and_grad(m, x, labels);
    CHECK(a.loss == doctest::Approx(reference_loss(m, x, labels)).epsilon(1e-13));
    CHECK(mean_log_loss(m, x, labels) == doctest::Approx(a.loss).epsilon(1e-14));

    MatrixXd xx(14, 3);
    xx << x, x;
    std::vector<std::size_t> ll = labels;
    ll.insert(ll.end(), labels.begin(), labels.end());
    const LossAndGrad b = loss_and_grad(m, xx, ll);
    CHECK(b.loss == doctest::Approx(a.loss).epsilon(1e-14));
    for (std::size_t l = 0; l < m.num_layers(); ++l) {
        CHECK((b.grad.weights[l] - a.grad.weights[l]).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("backprop matches central differences") {
    std::mt19937_64 rng(4);
    for (auto act : {Activation::relu, Activation::tanh}) {
        // Two layers of weights: d=3 -> 5 hidden -> M=4.
        ClassifierModel m = ClassifierModel::initialize({3, 5, 4}, act, 11);
        for (auto& b : m.biases) b = oracle::gaussian_matrix(b.size(), 1, rng, 0.3).col(0);
        const MatrixXd x = oracle::gaussian_matrix(9, 3, rng);
        const auto labels = random_labels(9, 4, rng);
        const LossAndGrad g = loss_and_grad(m, x, labels);
        const double h = 1e-5;
        for (std::size_t l = 0; l < m.num_layers(); ++l) {
            for (Eigen::Index i = 0; i < m.weights[l].size(); ++i) {
                ClassifierModel p = m, q = m;
                p.weights[l](i) += h;
                q.weights[l](i) -= h;
                const double fd = (reference_loss(p, x, labels) - reference_loss(q, x, labels)) / (2 * h);
                CHECK(oracle::rel_close(g.grad.weights[l](i), fd, 1e-5));
            }
            for (Eigen::Index i = 0; i < m.biases[l].size(); ++i) {
                ClassifierModel p = m, q = m;
                p.biases[l](i) += h;
                q.biases[l](i) -= h;
                const double fd = (reference_loss(p, x, labels) - reference_loss(q, x, labels)) / (2 * h);
                CHECK(oracle::rel_close(g.grad.biases[l](i), fd, 1e-5));
            }
        }
    }
}

TEST_CASE("separable 1-D blobs are learned") {
    std::mt19937_64 rng(5);
    MatrixXd centers(2, 1);
    centers << -2.0, 2.0;
    const auto b = oracle::blobs(centers, 100, 0.5, rng);
    TrainConfig cfg;
    cfg.epochs = 200;
    const TrainResult r = train_classifier(b.points, b.labels, 2, cfg);
    CHECK(accuracy(r.model, b.points, b.labels) >= 0.95);
    CHECK(r.final_train_loss <= r.initial_train_loss);
    CHECK(r.validation_size == 20);
    CHECK(r.model.num_classes() == 2);
    CHECK(r.model.layer_sizes == std::vector<std::size_t>{1, 64, 64, 2});
}

TEST_CASE("training is deterministic per seed") {
    std::mt19937_64 rng(6);
    MatrixXd centers(3, 2);
    centers << 0, 0, 3, 0, 0, 3;
    const auto b = oracle::blobs(centers, 30, 0.7, rng);
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.seed = 9;
    const TrainResult a = train_classifier(b.points, b.labels, 3, cfg);
    const TrainResult c = train_classifier(b.points, b.labels, 3, cfg);
    for (std::size_t l = 0; l < a.model.num_layers(); ++l) {
        CHECK(a.model.weights[l] == c.model.weights[l]);
        CHECK(a.model.biases[l] == c.model.biases[l]);
    }
    cfg.seed = 10;
    CHECK(train_classifier(b.points, b.labels, 3, cfg).model.weights[0] != a.model.weights[0]);
}

TEST_CASE("shuffled labels stay at chance on validation") {
    std::mt19937_64 rng(7);
    const std::size_t m = 4;
    const MatrixXd x = oracle::gaussian_matrix(800, 3, rng);
    const auto labels = random_labels(800, m, rng);
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.validation_fraction = 0.25;
    const TrainResult r = train_classifier(x, labels, m, cfg);
    CHECK(r.validation_accuracy >= 1.0 / m - 0.1);
    CHECK(r.validation_accuracy <= 1.0 / m + 0.1);
}

TEST_CASE("kmeans cells of concrete are learned well above chance") {
    const Dataset ds = load_csv(std::filesystem::path(DGPSEL_DATA_DIR) / "concrete.csv");
    const Split s = split(ds, {0.9, 0});
    const PartitionModel p = kmeans_partition(s.train.features, 10, 0);
    const std::vector<std::size_t> labels(p.assignments.begin(), p.assignments.end());
    TrainConfig cfg;
    cfg.epochs = 100;
    const TrainResult r = train_classifier(s.train.features, labels, 10, cfg);
    CHECK(accuracy(r.model, s.train.features, labels) > 0.5);
    CHECK(r.validation_accuracy > 0.3);
}

TEST_CASE("classifier errors") {
    const ClassifierModel m = ClassifierModel::zeros({2, 3}, Activation::relu);
    CHECK_THROWS_AS(forward(m, Eigen::RowVectorXd::Zero(3)), std::invalid_argument);
    const std::vector<std::size_t> none;
    CHECK_THROWS_AS(loss_and_grad(m, MatrixXd(0, 2), none), std::invalid_argument);
    const std::vector<std::size_t> bad{3};
    CHECK_THROWS_AS(loss_and_grad(m, MatrixXd::Zero(1, 2), bad), std::invalid_argument);
    const std::vector<std::size_t> missing_class(10, 0);
    CHECK_THROWS_AS(train_classifier(MatrixXd::Zero(10, 2), missing_class, 2), std::invalid_argument);
    TrainConfig cfg;
    cfg.validation_fraction = 0.6;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    CHECK_THROWS_AS(ClassifierModel::zeros({2}, Activation::relu), std::invalid_argument);
    ClassifierModel broken = ClassifierModel::zeros({2, 3}, Activation::relu);
    broken.weights[0](0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
    CHECK_THROWS_AS(activation_from_string("gelu"), std::invalid_argument);
}
