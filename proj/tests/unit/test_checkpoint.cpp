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

#include <filesystem>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include "dgpsel/aggregation.hpp"
#include "dgpsel/checkpoint.hpp"

using namespace dgpsel;

TEST_CASE("checkpoint round trip restores identical predictions") {
    std::mt19937_64 rng(1);
    const MatrixXd raw = oracle::gaussian_matrix(60, 2, rng, 3.0);
    const VectorXd ry = oracle::gaussian_matrix(60, 1, rng).col(0);
    const Dataset ds = Dataset::from_raw(raw, ry, "toy");
    const PartitionModel parts = kmeans_partition(ds.features, 3, 5);
    SharedHyperparams theta = fixtures::theta(1.2, VectorXd::Constant(2, 0.8), 0.07);
    const ExpertEnsemble ens(theta, build_experts(theta, ds, parts.members()));

    Checkpoint c;
    c.theta = theta;
    c.partition = parts;
    c.expert_indices = parts.members();
    c.scaling = ds.scaling;
    c.classifier = ClassifierModel::initialize({2, 4, 3}, Activation::tanh, 2);
    c.source_name = "toy";

    const auto path = std::filesystem::temp_directory_path() / "dgpsel_test_ckpt.json";
    save_checkpoint(path, c);
    const Checkpoint back = load_checkpoint(path);
    CHECK(back.theta.pack() == theta.pack());
    CHECK(back.partition.assignments == parts.assignments);
    CHECK(back.partition.centroids == parts.centroids);
    CHECK(back.expert_indices == c.expert_indices);
    CHECK(back.scaling.feature_means == ds.scaling.feature_means);
    CHECK(back.scaling.target_std == ds.scaling.target_std);
    REQUIRE(back.classifier.has_value());
    CHECK(back.classifier->weights[1] == c.classifier->weights[1]);
    CHECK(back.classifier->activation == Activation::tanh);
    CHECK(back.source_name == "toy");

    const ExpertEnsemble restored = restore_ensemble(back, ds);
    const MatrixXd xs = oracle::gaussian_matrix(10, 2, rng);
    CHECK(aggregate_batch(restored, {}, xs).mean == aggregate_batch(ens, {}, xs).mean);
}

TEST_CASE("checkpoint rejects foreign documents") {
    CHECK_THROWS_AS(checkpoint_from_json(nlohmann::json{{"format_version", 99}}), std::invalid_argument);
    CHECK_THROWS_AS(load_checkpoint("/nonexistent/dgpsel.json"), std::invalid_argument);
    Checkpoint c;
    c.theta = SharedHyperparams::initial(1);
    c.partition.assignments = {0, 0};
    c.partition.centroids = MatrixXd::Zero(1, 1);
    c.expert_indices = {{0, 1}};
    c.scaling.feature_means = VectorXd::Zero(1);
    c.scaling.feature_stds = VectorXd::Ones(1);
    auto doc = to_json(c);
    doc["hyperparameters"]["kernel"] = "matern";
    CHECK_THROWS_AS(checkpoint_from_json(doc), std::invalid_argument);
    const Dataset wrong = fixtures::identity_dataset(MatrixXd::Zero(2, 3), VectorXd::Zero(2));
    CHECK_THROWS_AS(restore_ensemble(checkpoint_from_json(to_json(c)), wrong), std::invalid_argument);
}
