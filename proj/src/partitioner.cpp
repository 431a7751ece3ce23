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

#include "dgpsel/partitioner.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

namespace dgpsel {

std::string to_string(PartitionMethod m) {
    return m == PartitionMethod::kmeans ? "kmeans" : "random";
}

PartitionMethod partition_method_from_string(const std::string& s) {
    if (s == "kmeans") return PartitionMethod::kmeans;
    if (s == "random") return PartitionMethod::random;
    throw std::invalid_argument("unknown partition method '" + s + "'");
}

std::vector<std::vector<std::size_t>> PartitionModel::members() const {
    std::vector<std::vector<std::size_t>> out(num_partitions());
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        out.at(assignments[i]).push_back(i);
    }
    return out;
}

std::vector<std::size_t> PartitionModel::sizes() const {
    std::vector<std::size_t> out(num_partitions(), 0);
    for (auto a : assignments) {
        ++out.at(a);
    }
    return out;
}

void PartitionModel::validate(std::size_t n) const {
    if (assignments.size() != n) {
        throw std::logic_error("partition covers " + std::to_string(assignments.size()) +
                               " rows, expected " + std::to_string(n));
    }
    std::vector<std::size_t> count(num_partitions(), 0);
    for (auto a : assignments) {
        if (a >= num_partitions()) {
            throw std::logic_error("partition label " + std::to_string(a) + " out of range");
        }
        ++count[a];
    }
    for (std::size_t b = 0; b < count.size(); ++b) {
        if (count[b] == 0) {
            throw std::logic_error("partition block " + std::to_string(b) + " is empty");
        }
    }
}

MatrixXd block_means(const MatrixXd& points, const std::vector<ExpertId>& assignments, std::size_t m) {
    MatrixXd sums = MatrixXd::Zero(static_cast<Eigen::Index>(m), points.cols());
    VectorXd counts = VectorXd::Zero(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        const auto b = static_cast<Eigen::Index>(assignments[i]);
        sums.row(b) += points.row(static_cast<Eigen::Index>(i));
        counts(b) += 1.0;
    }
    for (Eigen::Index b = 0; b < sums.rows(); ++b) {
        if (counts(b) > 0) {
            sums.row(b) /= counts(b);
        }
    }
    return sums;
}

double wcss(const MatrixXd& points, const std::vector<ExpertId>& assignments, const MatrixXd& centroids) {
    double total = 0.0;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        total += (points.row(static_cast<Eigen::Index>(i)) -
                  centroids.row(static_cast<Eigen::Index>(assignments[i])))
                     .squaredNorm();
    }
    return total;
}

namespace {

void check_sizes(const MatrixXd& points, std::size_t m) {
    if (m < 1) {
        throw std::invalid_argument("number of partitions must be at least 1");
    }
    if (static_cast<std::size_t>(points.rows()) < m) {
        throw std::invalid_argument("cannot split " + std::to_string(points.rows()) +
                                    " points into " + std::to_string(m) + " partitions");
    }
}

double uniform01(std::mt19937_64& rng) {
    // 53 random mantissa bits; independent of the library's distribution code.
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

MatrixXd kmeanspp_seeds(const MatrixXd& points, std::size_t m, std::mt19937_64& rng) {
    const auto n = static_cast<std::size_t>(points.rows());
    MatrixXd centers(static_cast<Eigen::Index>(m), points.cols());
    std::size_t first = static_cast<std::size_t>(rng() % n);
    centers.row(0) = points.row(static_cast<Eigen::Index>(first));
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    for (std::size_t c = 1; c < m; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = (points.row(static_cast<Eigen::Index>(i)) -
                              centers.row(static_cast<Eigen::Index>(c - 1)))
                                 .squaredNorm();
            d2[i] = std::min(d2[i], d);
            total += d2[i];
        }
        std::size_t pick = static_cast<std::size_t>(rng() % n);
        if (total > 0.0) {
            const double u = uniform01(rng) * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc > u) {
                    pick = i;
                    break;
                }
            }
        }
        centers.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(pick));
    }
    return centers;
}

/// Moves the farthest point of a multi-point cluster into every empty
/// cluster. Returns true if anything moved.
bool repair_empty(const MatrixXd& points, std::vector<ExpertId>& assign, MatrixXd& centers) {
    const std::size_t m = static_cast<std::size_t>(centers.rows());
    bool moved = false;
    for (std::size_t c = 0; c < m; ++c) {
        std::vector<std::size_t> counts(m, 0);
        for (auto a : assign) ++counts[a];
        if (counts[c] != 0) {
            continue;
        }
        std::size_t far = assign.size();
        double far_d = -1.0;
        for (std::size_t i = 0; i < assign.size(); ++i) {
            if (counts[assign[i]] < 2) {
                continue;
            }
            const double d = (points.row(static_cast<Eigen::Index>(i)) -
                              centers.row(static_cast<Eigen::Index>(assign[i])))
                                 .squaredNorm();
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        assign[far] = c;
        centers = block_means(points, assign, m);
        moved = true;
    }
    return moved;
}

}  // namespace

PartitionModel kmeans_partition(const MatrixXd& points, std::size_t m, std::uint64_t seed,
                                const KMeansOptions& options) {
    check_sizes(points, m);
    std::mt19937_64 rng(seed);
    const auto n = static_cast<std::size_t>(points.rows());
    MatrixXd centers = kmeanspp_seeds(points, m, rng);

    PartitionModel model;
    model.method = PartitionMethod::kmeans;
    model.seed = seed;
    std::vector<ExpertId> assign(n, 0);
    bool first = true;
    std::size_t it = 0;
    for (; it < options.max_iterations; ++it) {
        bool changed = first;
        for (std::size_t i = 0; i < n; ++i) {
            const auto p = points.row(static_cast<Eigen::Index>(i));
            ExpertId best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < m; ++c) {
                const double d = (p - centers.row(static_cast<Eigen::Index>(c))).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        first = false;
        if (!changed) {
            break;
        }
        centers = block_means(points, assign, m);
        repair_empty(points, assign, centers);
        model.wcss_history.push_back(wcss(points, assign, centers));
    }
    // The cap can leave the last assignment step unrepaired.
    centers = block_means(points, assign, m);
    if (repair_empty(points, assign, centers)) {
        model.wcss_history.push_back(wcss(points, assign, centers));
    }
    model.iterations = it;
    model.assignments = std::move(assign);
    model.centroids = std::move(centers);
    model.validate(n);
    return model;
}

PartitionModel random_partition(const MatrixXd& points, std::size_t m, std::uint64_t seed) {
    check_sizes(points, m);
    const auto n = static_cast<std::size_t>(points.rows());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        std::swap(order[i], order[static_cast<std::size_t>(rng() % (i + 1))]);
    }
    PartitionModel model;
    model.method = PartitionMethod::random;
    model.seed = seed;
    model.assignments.assign(n, 0);
    // The first n % m blocks get one extra point.
    const std::size_t base = n / m;
    const std::size_t extra = n % m;
    std::size_t pos = 0;
    for (std::size_t b = 0; b < m; ++b) {
        const std::size_t len = base + (b < extra ? 1 : 0);
        for (std::size_t k = 0; k < len; ++k) {
            model.assignments[order[pos++]] = b;
        }
    }
    model.centroids = block_means(points, model.assignments, m);
    model.validate(n);
    return model;
}

PartitionModel make_partition(const MatrixXd& points, std::size_t m, PartitionMethod method,
                              std::uint64_t seed) {
    return method == PartitionMethod::kmeans ? kmeans_partition(points, m, seed)
                                             : random_partition(points, m, seed);
}

}  // namespace dgpsel
