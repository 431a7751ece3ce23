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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dgpsel/aggregation.hpp"
#include "dgpsel/classifier.hpp"
#include "dgpsel/expert.hpp"
#include "dgpsel/partitioner.hpp"
#include "dgpsel/selection.hpp"

namespace dgpsel {

/// One benchmark run: load, split, partition, fit, then every
/// (method, selector, K) combination for every seed.
struct RunConfig {
    std::filesystem::path data_path;
    std::string target_column;
    double train_fraction = 0.9;
    std::size_t partitions = 10;
    PartitionMethod partition_method = PartitionMethod::kmeans;
    std::vector<AggregationMethod> methods{AggregationMethod::poe, AggregationMethod::gpoe,
                                           AggregationMethod::bcm, AggregationMethod::npae};
    BetaRule beta_rule = BetaRule::diff_entropy;
    std::vector<SelectorKind> selectors{SelectorKind::static_graph, SelectorKind::knn, SelectorKind::dnn};
    std::vector<std::size_t> k_values{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<std::uint64_t> seeds{0};
    OptimizerConfig optimizer;
    TrainConfig classifier;
    std::filesystem::path output_path;              // JSON report; empty = do not write
    std::filesystem::path csv_path;                 // metric rows; empty = next to the JSON
    std::filesystem::path checkpoint_path;          // model of the first seed; empty = none

    void validate() const;
    static RunConfig from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
};

/// One metric row. `selector` is "none" for the unselected baseline,
/// which has no K.
struct MetricRow {
    std::string method;
    std::string selector;
    std::optional<std::size_t> k;
    std::uint64_t seed = 0;
    double smse = 0.0;
    double msll = 0.0;
    double rmse_raw = 0.0;
    std::size_t n_test = 0;
    double wall_time_seconds = 0.0;
    double solve_time_seconds = 0.0;
    std::size_t fallback_count = 0;
    double mean_experts_used = 0.0;
};

struct SeedSummary {
    std::uint64_t seed = 0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::vector<std::size_t> partition_sizes;
    SharedHyperparams theta;
    double initial_nlml = 0.0;
    double final_nlml = 0.0;
    double fit_seconds = 0.0;
    double classifier_validation_accuracy = 0.0;
    double classifier_seconds = 0.0;
    std::vector<ExpertId> static_ranking;
};

struct RunReport {
    RunConfig config;
    std::vector<SeedSummary> seeds;
    std::vector<MetricRow> rows;
    nlohmann::json metadata;
    double total_seconds = 0.0;

    /// Rows matching method/selector/K/seed; K ignored for "none".
    const MetricRow* find(const std::string& method, const std::string& selector, std::optional<std::size_t> k,
                          std::uint64_t seed) const;
};

/// Thrown by run_benchmark; carries the rows completed before the failure.
class BenchmarkError : public StageError {
public:
    BenchmarkError(std::string stage, const std::string& what, RunReport partial)
        : StageError(std::move(stage), what), partial_(std::move(partial)) {}
    const RunReport& partial() const { return partial_; }

private:
    RunReport partial_;
};

/// Runs the whole protocol in memory. Progress goes to `log` if given.
/// Writes nothing; see write_report().
RunReport run_benchmark(const RunConfig& config, std::ostream* log = nullptr);

nlohmann::json report_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& doc);

/// Deterministic metric rows (no timings), one line per combination.
std::string rows_to_csv(const RunReport& report);

/// Writes the JSON report and the CSV rows to the configured paths.
void write_report(const RunReport& report);

struct SummaryRow {
    std::string method;
    std::string selector;
    std::optional<std::size_t> k;
    std::size_t n_seeds = 0;
    double smse_mean = 0.0;
    double smse_std = 0.0;
    double msll_mean = 0.0;
    double msll_std = 0.0;
    std::optional<double> smse_deviation;  // mean |SMSE - full NPAE SMSE| over seeds
    std::optional<double> msll_deviation;
};

struct SummaryTable {
    std::vector<SummaryRow> rows;
    std::vector<std::string> warnings;

    std::string to_text() const;
    std::string to_csv() const;
};

/// Seed-averaged comparison against the full (unselected) NPAE row, sorted
/// by K with baselines first.
SummaryTable compare_report(const RunReport& report);

}  // namespace dgpsel
