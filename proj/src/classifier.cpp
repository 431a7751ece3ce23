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

#include "dgpsel/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace dgpsel {

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    throw std::invalid_argument("unknown activation '" + s + "'");
}

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void check_layers(const std::vector<std::size_t>& sizes) {
    if (sizes.size() < 2) {
        throw std::invalid_argument("classifier needs an input and an output layer");
    }
    for (auto s : sizes) {
        if (s == 0) {
            throw std::invalid_argument("classifier layers must be non-empty");
        }
    }
}

MatrixXd activate(const MatrixXd& z, Activation a) {
    return a == Activation::relu ? MatrixXd(z.cwiseMax(0.0)) : MatrixXd(z.array().tanh().matrix());
}

/// Row-wise softmax of logits, max-shifted.
MatrixXd softmax_rows(const MatrixXd& z) {
    const VectorXd mx = z.rowwise().maxCoeff();
    MatrixXd e = (z.colwise() - mx).array().exp().matrix();
    const VectorXd s = e.rowwise().sum();
    return e.array().colwise() / s.array();
}

struct ForwardPass {
    std::vector<MatrixXd> acts;  // acts[0] = input, acts[l + 1] = output of layer l
    MatrixXd logits;
};

ForwardPass run_forward(const ClassifierModel& m, const MatrixXd& x) {
    ForwardPass f;
    f.acts.reserve(m.num_layers());
    f.acts.push_back(x);
    for (std::size_t l = 0; l < m.num_layers(); ++l) {
        MatrixXd z = f.acts.back() * m.weights[l].transpose();
        z.rowwise() += m.biases[l].transpose();
        if (l + 1 == m.num_layers()) {
            f.logits = std::move(z);
        } else {
            f.acts.push_back(activate(z, m.activation));
        }
    }
    return f;
}

void check_batch(const ClassifierModel& m, const MatrixXd& x, std::span<const std::size_t> labels) {
    if (x.rows() == 0) {
        throw std::invalid_argument("empty batch");
    }
    if (static_cast<std::size_t>(x.cols()) != m.input_dim()) {
        throw std::invalid_argument("classifier input has " + std::to_string(x.cols()) +
                                    " columns, expected " + std::to_string(m.input_dim()));
    }
    if (labels.size() != static_cast<std::size_t>(x.rows())) {
        throw std::invalid_argument("label count differs from batch size");
    }
    for (auto l : labels) {
        if (l >= m.num_classes()) {
            throw std::invalid_argument("label " + std::to_string(l) + " out of range");
        }
    }
}

double log_loss_from_logits(const MatrixXd& logits, std::span<const std::size_t> labels) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double mx = logits.row(i).maxCoeff();
        const double lse = mx + std::log((logits.row(i).array() - mx).exp().sum());
        total += lse - logits(i, static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]));
    }
    return total / static_cast<double>(logits.rows());
}

MatrixXd gather_rows(const MatrixXd& x, std::span<const std::size_t> idx) {
    MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(idx[r]));
    }
    return out;
}

}  // namespace

ClassifierModel ClassifierModel::initialize(std::vector<std::size_t> layer_sizes, Activation activation,
                                            std::uint64_t seed) {
    check_layers(layer_sizes);
    ClassifierModel m;
    m.layer_sizes = std::move(layer_sizes);
    m.activation = activation;
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
        const auto in = static_cast<Eigen::Index>(m.layer_sizes[l]);
        const auto out = static_cast<Eigen::Index>(m.layer_sizes[l + 1]);
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        MatrixXd w(out, in);
        for (Eigen::Index j = 0; j < in; ++j) {
            for (Eigen::Index i = 0; i < out; ++i) {
                w(i, j) = (2.0 * uniform01(rng) - 1.0) * limit;
            }
        }
        m.weights.push_back(std::move(w));
        m.biases.push_back(VectorXd::Zero(out));
    }
    return m;
}

ClassifierModel ClassifierModel::zeros(std::vector<std::size_t> layer_sizes, Activation activation) {
    check_layers(layer_sizes);
    ClassifierModel m;
    m.layer_sizes = std::move(layer_sizes);
    m.activation = activation;
    for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
        m.weights.push_back(MatrixXd::Zero(static_cast<Eigen::Index>(m.layer_sizes[l + 1]),
                                           static_cast<Eigen::Index>(m.layer_sizes[l])));
        m.biases.push_back(VectorXd::Zero(static_cast<Eigen::Index>(m.layer_sizes[l + 1])));
    }
    return m;
}

void ClassifierModel::validate() const {
    check_layers(layer_sizes);
    if (weights.size() + 1 != layer_sizes.size() || biases.size() != weights.size()) {
        throw std::invalid_argument("classifier layer count mismatch");
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l].rows() != static_cast<Eigen::Index>(layer_sizes[l + 1]) ||
            weights[l].cols() != static_cast<Eigen::Index>(layer_sizes[l]) ||
            biases[l].size() != static_cast<Eigen::Index>(layer_sizes[l + 1])) {
            throw std::invalid_argument("classifier layer " + std::to_string(l) + " has the wrong shape");
        }
        if (!weights[l].allFinite() || !biases[l].allFinite()) {
            throw std::invalid_argument("classifier parameters must be finite");
        }
    }
}

VectorXd forward(const ClassifierModel& model, PointRef x) {
    if (model.empty()) {
        throw std::logic_error("classifier is not trained");
    }
    if (static_cast<std::size_t>(x.size()) != model.input_dim()) {
        throw std::invalid_argument("classifier input has dimension " + std::to_string(x.size()) +
                                    ", expected " + std::to_string(model.input_dim()));
    }
    const MatrixXd row = x;
    return forward_batch(model, row).row(0).transpose();
}

MatrixXd forward_batch(const ClassifierModel& model, const MatrixXd& inputs) {
    if (model.empty()) {
        throw std::logic_error("classifier is not trained");
    }
    if (static_cast<std::size_t>(inputs.cols()) != model.input_dim()) {
        throw std::invalid_argument("classifier input has " + std::to_string(inputs.cols()) +
                                    " columns, expected " + std::to_string(model.input_dim()));
    }
    return softmax_rows(run_forward(model, inputs).logits);
}

LossAndGrad loss_and_grad(const ClassifierModel& model, const MatrixXd& batch,
                          std::span<const std::size_t> labels) {
    check_batch(model, batch, labels);
    const auto f = run_forward(model, batch);
    const auto b = batch.rows();
    LossAndGrad out;
    out.loss = log_loss_from_logits(f.logits, labels);

    // d loss / d logits = (P - onehot) / B
    MatrixXd delta = softmax_rows(f.logits);
    for (Eigen::Index i = 0; i < b; ++i) {
        delta(i, static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)])) -= 1.0;
    }
    delta /= static_cast<double>(b);

    const std::size_t layers = model.num_layers();
    out.grad.weights.resize(layers);
    out.grad.biases.resize(layers);
    for (std::size_t l = layers; l-- > 0;) {
        out.grad.weights[l] = delta.transpose() * f.acts[l];
        out.grad.biases[l] = delta.colwise().sum().transpose();
        if (l == 0) {
            break;
        }
        MatrixXd back = delta * model.weights[l];
        const MatrixXd& a = f.acts[l];
        if (model.activation == Activation::relu) {
            back = back.cwiseProduct((a.array() > 0.0).cast<double>().matrix());
        } else {
            back = back.cwiseProduct((1.0 - a.array().square()).matrix());
        }
        delta = std::move(back);
    }
    return out;
}

double mean_log_loss(const ClassifierModel& model, const MatrixXd& inputs,
                     std::span<const std::size_t> labels) {
    check_batch(model, inputs, labels);
    return log_loss_from_logits(run_forward(model, inputs).logits, labels);
}

double accuracy(const ClassifierModel& model, const MatrixXd& inputs, std::span<const std::size_t> labels) {
    check_batch(model, inputs, labels);
    const MatrixXd logits = run_forward(model, inputs).logits;
    std::size_t hits = 0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        Eigen::Index arg = 0;
        logits.row(i).maxCoeff(&arg);
        hits += static_cast<std::size_t>(arg) == labels[static_cast<std::size_t>(i)] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(logits.rows());
}

void TrainConfig::validate() const {
    if (epochs == 0 || batch_size == 0 || !(learning_rate > 0.0)) {
        throw std::invalid_argument("epochs, batch size and learning rate must be positive");
    }
    if (!(validation_fraction >= 0.0 && validation_fraction <= 0.5)) {
        throw std::invalid_argument("validation_fraction must lie in [0, 0.5]");
    }
}

namespace {

struct AdamState {
    std::vector<MatrixXd> mw, vw;
    std::vector<VectorXd> mb, vb;
    std::size_t t = 0;

    explicit AdamState(const ClassifierModel& m) {
        for (std::size_t l = 0; l < m.num_layers(); ++l) {
            mw.push_back(MatrixXd::Zero(m.weights[l].rows(), m.weights[l].cols()));
            vw.push_back(mw.back());
            mb.push_back(VectorXd::Zero(m.biases[l].size()));
            vb.push_back(mb.back());
        }
    }

    void step(ClassifierModel& m, const ClassifierGradients& g, double lr) {
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        ++t;
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
        for (std::size_t l = 0; l < m.num_layers(); ++l) {
            mw[l] = b1 * mw[l] + (1.0 - b1) * g.weights[l];
            vw[l] = b2 * vw[l] + (1.0 - b2) * g.weights[l].cwiseAbs2();
            m.weights[l].array() -= lr * (mw[l].array() / c1) / ((vw[l].array() / c2).sqrt() + eps);
            mb[l] = b1 * mb[l] + (1.0 - b1) * g.biases[l];
            vb[l] = b2 * vb[l] + (1.0 - b2) * g.biases[l].cwiseAbs2();
            m.biases[l].array() -= lr * (mb[l].array() / c1) / ((vb[l].array() / c2).sqrt() + eps);
        }
    }
};

}  // namespace

TrainResult train_classifier(const MatrixXd& inputs, std::span<const std::size_t> labels,
                             std::size_t num_classes, const TrainConfig& config) {
    config.validate();
    if (inputs.rows() < 2 || labels.size() != static_cast<std::size_t>(inputs.rows())) {
        throw std::invalid_argument("classifier training needs >= 2 labelled rows");
    }
    std::vector<std::size_t> seen(num_classes, 0);
    for (auto l : labels) {
        if (l >= num_classes) {
            throw std::invalid_argument("label " + std::to_string(l) + " out of range");
        }
        ++seen[l];
    }
    if (std::count(seen.begin(), seen.end(), std::size_t{0}) > 0) {
        throw std::invalid_argument("every class needs at least one training row");
    }

    std::mt19937_64 rng(config.seed);
    const auto n = static_cast<std::size_t>(inputs.rows());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) {
        std::swap(order[i], order[static_cast<std::size_t>(rng() % (i + 1))]);
    }
    std::size_t n_val = static_cast<std::size_t>(std::llround(config.validation_fraction * static_cast<double>(n)));
    n_val = std::min(n_val, n - 1);
    std::vector<std::size_t> val_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

    const MatrixXd train_x = gather_rows(inputs, train_idx);
    std::vector<std::size_t> train_y;
    for (auto i : train_idx) train_y.push_back(labels[i]);
    const MatrixXd val_x = gather_rows(inputs, val_idx);
    std::vector<std::size_t> val_y;
    for (auto i : val_idx) val_y.push_back(labels[i]);

    std::vector<std::size_t> sizes{static_cast<std::size_t>(inputs.cols())};
    sizes.insert(sizes.end(), config.hidden_layers.begin(), config.hidden_layers.end());
    sizes.push_back(num_classes);

    TrainResult result;
    result.model = ClassifierModel::initialize(sizes, config.activation, rng());
    result.validation_size = n_val;
    const ClassifierModel initial = result.model;
    result.initial_train_loss = mean_log_loss(initial, train_x, train_y);

    auto selection_loss = [&](const ClassifierModel& m) {
        return n_val > 0 ? mean_log_loss(m, val_x, val_y) : mean_log_loss(m, train_x, train_y);
    };

    ClassifierModel current = initial;
    ClassifierModel best = initial;
    double best_loss = selection_loss(initial);
    AdamState adam(current);
    double lr = config.learning_rate;
    std::size_t backoffs = 0;
    std::vector<std::size_t> perm(train_idx.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        for (std::size_t i = perm.size() - 1; i > 0; --i) {
            std::swap(perm[i], perm[static_cast<std::size_t>(rng() % (i + 1))]);
        }
        bool diverged = false;
        for (std::size_t start = 0; start < perm.size(); start += config.batch_size) {
            const std::size_t stop = std::min(start + config.batch_size, perm.size());
            const std::span<const std::size_t> rows(perm.data() + start, stop - start);
            const MatrixXd bx = gather_rows(train_x, rows);
            std::vector<std::size_t> by;
            by.reserve(rows.size());
            for (auto r : rows) by.push_back(train_y[r]);
            auto lg = loss_and_grad(current, bx, by);
            if (!std::isfinite(lg.loss)) {
                diverged = true;
                break;
            }
            adam.step(current, lg.grad, lr);
        }
        double loss = diverged ? std::numeric_limits<double>::quiet_NaN() : selection_loss(current);
        if (!std::isfinite(loss)) {
            if (++backoffs > 5) {
                throw NumericalError("classifier training diverged after learning-rate backoff");
            }
            lr *= 0.5;
            current = best;
            adam = AdamState(current);
            continue;
        }
        if (loss < best_loss) {
            best_loss = loss;
            best = current;
            result.best_epoch = epoch;
        }
    }

    result.lr_backoffs = backoffs;
    result.final_train_loss = mean_log_loss(best, train_x, train_y);
    if (result.final_train_loss > result.initial_train_loss) {
        best = initial;
        result.final_train_loss = result.initial_train_loss;
        result.best_epoch = 0;
        best_loss = selection_loss(initial);
    }
    result.best_validation_loss = best_loss;
    result.validation_accuracy = n_val > 0 ? accuracy(best, val_x, val_y) : accuracy(best, train_x, train_y);
    result.model = std::move(best);
    return result;
}

}  // namespace dgpsel
