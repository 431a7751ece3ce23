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
#include <span>
#include <string>
#include <vector>

#include "dgpsel/common.hpp"

namespace dgpsel {

enum class Activation { relu, tanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// Fully connected network with a softmax output layer. weights[l] maps
/// layer l to layer l + 1 and has shape (layer_sizes[l + 1], layer_sizes[l]).
struct ClassifierModel {
    std::vector<std::size_t> layer_sizes;
    std::vector<MatrixXd> weights;
    std::vector<VectorXd> biases;
    Activation activation = Activation::relu;

    std::size_t input_dim() const { return layer_sizes.front(); }
    std::size_t num_classes() const { return layer_sizes.back(); }
    std::size_t num_layers() const { return weights.size(); }
    bool empty() const { return weights.empty(); }

    /// Glorot-uniform weights, zero biases.
    static ClassifierModel initialize(std::vector<std::size_t> layer_sizes, Activation activation,
                                      std::uint64_t seed);

    /// All-zero weights and biases.
    static ClassifierModel zeros(std::vector<std::size_t> layer_sizes, Activation activation);

    void validate() const;
};

/// Class probabilities at one point.
VectorXd forward(const ClassifierModel& model, PointRef x);

/// Row i holds the class probabilities of inputs.row(i).
MatrixXd forward_batch(const ClassifierModel& model, const MatrixXd& inputs);

struct ClassifierGradients {
    std::vector<MatrixXd> weights;
    std::vector<VectorXd> biases;
};

struct LossAndGrad {
    double loss = 0.0;
    ClassifierGradients grad;
};

/// Mean cross-entropy -1/B sum log P_label and its backpropagated gradient.
/// Labels are zero-based class indices.
LossAndGrad loss_and_grad(const ClassifierModel& model, const MatrixXd& batch,
                          std::span<const std::size_t> labels);

double mean_log_loss(const ClassifierModel& model, const MatrixXd& inputs,
                     std::span<const std::size_t> labels);

double accuracy(const ClassifierModel& model, const MatrixXd& inputs, std::span<const std::size_t> labels);

struct TrainConfig {
    std::size_t epochs = 300;
    std::size_t batch_size = 64;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    double validation_fraction = 0.1;
    std::vector<std::size_t> hidden_layers{64, 64};
    Activation activation = Activation::relu;

    void validate() const;
};

struct TrainResult {
    ClassifierModel model;
    double initial_train_loss = 0.0;
    double final_train_loss = 0.0;
    double best_validation_loss = 0.0;
    std::size_t best_epoch = 0;
    std::size_t validation_size = 0;
    double validation_accuracy = 0.0;
    std::size_t lr_backoffs = 0;
};

/// Mini-batch Adam on the cross-entropy. Keeps the parameters with the best
/// hold-out loss (training loss when there is no hold-out), and never
/// returns parameters worse on the training set than the initial ones.
TrainResult train_classifier(const MatrixXd& inputs, std::span<const std::size_t> labels,
                             std::size_t num_classes, const TrainConfig& config = {});

}  // namespace dgpsel
