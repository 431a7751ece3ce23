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
#include <string>
#include <vector>

#include "dgpsel/common.hpp"

namespace dgpsel {

enum class PartitionMethod { kmeans, random };

std::string to_string(PartitionMethod m);
PartitionMethod partition_method_from_string(const std::string& s);

/// Disjoint assignment of training rows to M experts.
struct PartitionModel {
    std::vector<ExpertId> assignments;  // one label per training row
    MatrixXd centroids;                 // M x d, mean of each block
    PartitionMethod method = PartitionMethod::kmeans;
    std::uint64_t seed = 0;

    // K-Means diagnostics: within-cluster sum of squares after every Lloyd
    // update (empty for random partitions).
    std::vector<double> wcss_history;
    std::size_t iterations = 0;

    std::size_t num_partitions() const { return static_cast<std::size_t>(centroids.rows()); }
    std::vector<std::vector<std::size_t>> members() const;
    std::vector<std::size_t> sizes() const;

    /// Throws std::logic_error if a label is out of range, a block is
    /// empty, or the assignment length differs from n.
    void validate(std::size_t n) const;
};

/// Block means of `points` under `assignments`; labels must lie in [0, M).
MatrixXd block_means(const MatrixXd& points, const std::vector<ExpertId>& assignments, std::size_t m);

/// Within-cluster sum of squares.
double wcss(const MatrixXd& points, const std::vector<ExpertId>& assignments, const MatrixXd& centroids);

struct KMeansOptions {
    std::size_t max_iterations = 300;
};

/// Lloyd iterations from k-means++ seeds, until the assignment is a fixed
/// point or the iteration cap is hit. Empty clusters are reseeded with the
/// point farthest from its own centroid.
PartitionModel kmeans_partition(const MatrixXd& points, std::size_t m, std::uint64_t seed,
                                const KMeansOptions& options = {});

/// Seeded shuffle cut into M blocks whose sizes differ by at most one.
PartitionModel random_partition(const MatrixXd& points, std::size_t m, std::uint64_t seed);

PartitionModel make_partition(const MatrixXd& points, std::size_t m, PartitionMethod method,
                              std::uint64_t seed);

}  // namespace dgpsel
