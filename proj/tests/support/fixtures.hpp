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

#include <cmath>
#include <vector>

#include "dgpsel/dataset.hpp"
#include "dgpsel/expert.hpp"

namespace fixtures {

/// Dataset holding x and y verbatim (identity standardization).
inline dgpsel::Dataset identity_dataset(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    dgpsel::Dataset ds;
    ds.features = x;
    ds.targets = y;
    ds.scaling.feature_means = Eigen::VectorXd::Zero(x.cols());
    ds.scaling.feature_stds = Eigen::VectorXd::Ones(x.cols());
    ds.source_name = "synthetic";
    return ds;
}

inline dgpsel::SharedHyperparams theta(double sf2, const Eigen::VectorXd& ell, double sn2) {
    dgpsel::SharedHyperparams t;
    t.kernel.log_signal_variance = std::log(sf2);
    t.kernel.log_lengthscales = ell.array().log().matrix();
    t.log_noise_variance = std::log(sn2);
    return t;
}

/// Contiguous blocks [0, n/m), [n/m, 2n/m), ...
inline std::vector<std::vector<std::size_t>> blocks(std::size_t n, std::size_t m) {
    std::vector<std::vector<std::size_t>> g(m);
    for (std::size_t i = 0; i < n; ++i) g[i * m / n].push_back(i);
    return g;
}

}  // namespace fixtures
