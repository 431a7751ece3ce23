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
#include <filesystem>
#include <string>
#include <vector>

#include "dgpsel/common.hpp"

namespace dgpsel {

/// Per-column z-score parameters. Columns whose spread is zero keep a
/// divisor of 1, so they standardize to all zeros.
struct Standardization {
    VectorXd feature_means;
    VectorXd feature_stds;
    double target_mean = 0.0;
    double target_std = 1.0;

    /// Population (divide-by-n) statistics of the given raw columns.
    /// Throws std::invalid_argument if the targets are constant.
    static Standardization fit(const MatrixXd& raw_features, const VectorXd& raw_targets);

    MatrixXd standardize_features(const MatrixXd& raw) const;
    VectorXd standardize_targets(const VectorXd& raw) const;
    MatrixXd restore_features(const MatrixXd& standardized) const;
    VectorXd restore_targets(const VectorXd& standardized) const;
};

/// Standardized regression data. Rows of `features` are points.
struct Dataset {
    MatrixXd features;
    VectorXd targets;
    Standardization scaling;
    std::string source_name;
    std::vector<std::string> feature_names;
    std::string target_name;

    std::size_t size() const { return static_cast<std::size_t>(features.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }

    MatrixXd raw_features() const { return scaling.restore_features(features); }
    VectorXd raw_targets() const { return scaling.restore_targets(targets); }

    /// Builds a dataset from raw values, standardizing with their own
    /// statistics. Validates shape and finiteness.
    static Dataset from_raw(const MatrixXd& raw_features, const VectorXd& raw_targets,
                            std::string source_name = {});

    /// Rows of this dataset restandardized with `scaling` (which may come
    /// from a different set of rows).
    Dataset rows(const std::vector<std::size_t>& indices, const Standardization& scaling) const;
};

struct SplitSpec {
    double train_fraction = 0.9;
    std::uint64_t seed = 0;
};

/// Train/test views. Both sides are standardized with statistics of the
/// training rows only.
struct Split {
    Dataset train;
    Dataset test;
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
};

/// Reads a headered, comma separated numeric file. `target_column` is a
/// header name or a zero-based column number; empty selects the last column.
Dataset load_csv(const std::filesystem::path& path, const std::string& target_column = {});

/// Seeded uniform shuffle, |train| = round(train_fraction * n).
Split split(const Dataset& ds, const SplitSpec& spec);

}  // namespace dgpsel
