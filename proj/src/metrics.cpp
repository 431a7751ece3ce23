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

#include "dgpsel/metrics.hpp"

#include <cmath>
#include <numbers>

namespace dgpsel {

namespace {

void check_lengths(const VectorXd& a, const VectorXd& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("prediction and target lengths differ");
    }
}

double gaussian_nll(double y, double mean, double var) {
    return 0.5 * std::log(2.0 * std::numbers::pi * var) + (y - mean) * (y - mean) / (2.0 * var);
}

}  // namespace

double smse(const VectorXd& pred_mean, const VectorXd& y_test) {
    check_lengths(pred_mean, y_test);
    if (y_test.size() < 2) {
        throw std::invalid_argument("SMSE needs at least 2 test points");
    }
    const double n = static_cast<double>(y_test.size());
    const double var = (y_test.array() - y_test.mean()).square().sum() / n;
    if (!(var > 0.0)) {
        throw std::invalid_argument("SMSE undefined for constant test targets");
    }
    return (pred_mean - y_test).squaredNorm() / n / var;
}

double msll(const VectorXd& pred_mean, const VectorXd& pred_var, const VectorXd& y_test, double train_mean,
            double train_var) {
    check_lengths(pred_mean, y_test);
    check_lengths(pred_var, y_test);
    if (y_test.size() < 1) {
        throw std::invalid_argument("MSLL needs at least 1 test point");
    }
    if (!(train_var > 0.0)) {
        throw std::invalid_argument("MSLL needs a positive training variance");
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i < y_test.size(); ++i) {
        if (!(pred_var(i) >= 1e-300)) {
            throw std::invalid_argument("MSLL needs predictive variances >= 1e-300");
        }
        total += gaussian_nll(y_test(i), pred_mean(i), pred_var(i)) -
                 gaussian_nll(y_test(i), train_mean, train_var);
    }
    return total / static_cast<double>(y_test.size());
}

double rmse(const VectorXd& pred_mean, const VectorXd& y_test) {
    check_lengths(pred_mean, y_test);
    if (y_test.size() < 1) {
        throw std::invalid_argument("RMSE needs at least 1 test point");
    }
    return std::sqrt((pred_mean - y_test).squaredNorm() / static_cast<double>(y_test.size()));
}

}  // namespace dgpsel
