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

#include <optional>
#include <string>

#include "dgpsel/common.hpp"

namespace dgpsel {

struct MetricReport {
    double smse = 0.0;
    double msll = 0.0;
    double rmse_raw = 0.0;  // root mean squared error in the original target units
    std::size_t n_test = 0;
    std::string method;
    std::string selector;
    std::optional<std::size_t> k;
    double wall_time_seconds = 0.0;
};

/// Mean squared error over the population variance of y_test.
double smse(const VectorXd& pred_mean, const VectorXd& y_test);

/// Mean negative log density of y_test under N(pred_mean, pred_var) minus
/// the same quantity under N(train_mean, train_var).
double msll(const VectorXd& pred_mean, const VectorXd& pred_var, const VectorXd& y_test, double train_mean,
            double train_var);

double rmse(const VectorXd& pred_mean, const VectorXd& y_test);

}  // namespace dgpsel
