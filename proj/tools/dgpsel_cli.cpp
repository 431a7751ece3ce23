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

// dgpsel bench   --data concrete.csv --seeds 0,1,2 --out report.json
// dgpsel compare report.json

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dgpsel/bench.hpp"

using namespace dgpsel;

namespace {

// Exit codes: 1 usage/config, 2 pipeline stage failure, 3 report I/O.
constexpr int kConfigError = 1;
constexpr int kStageError = 2;
constexpr int kIoError = 3;

int run_bench(const CLI::App& cmd, RunConfig cfg, const std::string& config_file, const std::vector<std::string>& methods,
              const std::vector<std::string>& selectors, bool quiet) {
    try {
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            if (!in) throw std::invalid_argument("cannot open config " + config_file);
            RunConfig from_file = RunConfig::from_json(nlohmann::json::parse(in));
            // Explicit flags win over the file.
            if (cmd.count("--data")) from_file.data_path = cfg.data_path;
            if (cmd.count("--target-col")) from_file.target_column = cfg.target_column;
            if (cmd.count("--partitions")) from_file.partitions = cfg.partitions;
            if (cmd.count("--partition-method")) from_file.partition_method = cfg.partition_method;
            if (cmd.count("--train-frac")) from_file.train_fraction = cfg.train_fraction;
            if (cmd.count("--k")) from_file.k_values = cfg.k_values;
            if (cmd.count("--seeds")) from_file.seeds = cfg.seeds;
            if (cmd.count("--out")) from_file.output_path = cfg.output_path;
            if (cmd.count("--csv")) from_file.csv_path = cfg.csv_path;
            if (cmd.count("--save-model")) from_file.checkpoint_path = cfg.checkpoint_path;
            if (cmd.count("--beta")) from_file.beta_rule = cfg.beta_rule;
            if (cmd.count("--iterations")) from_file.optimizer.iterations = cfg.optimizer.iterations;
            if (cmd.count("--epochs")) from_file.classifier.epochs = cfg.classifier.epochs;
            cfg = from_file;
        }
        if (cmd.count("--methods")) {
            cfg.methods.clear();
            for (const auto& m : methods) cfg.methods.push_back(aggregation_method_from_string(m));
        }
        if (cmd.count("--selectors")) {
            cfg.selectors.clear();
            for (const auto& s : selectors) {
                if (s != "none") cfg.selectors.push_back(selector_kind_from_string(s));
            }
        }
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "config: " << e.what() << '\n';
        return kConfigError;
    }

    RunReport report;
    int status = 0;
    try {
        report = run_benchmark(cfg, quiet ? nullptr : &std::cerr);
    } catch (const BenchmarkError& e) {
        std::cerr << "error [" << e.stage() << "]: " << e.what() << '\n';
        report = e.partial();
        status = kStageError;
    }

    try {
        write_report(report);
    } catch (const std::exception& e) {
        std::cerr << "error [write]: " << e.what() << '\n';
        return status ? status : kIoError;
    }
    if (status == 0) {
        if (cfg.output_path.empty()) {
            std::cout << rows_to_csv(report);
        } else if (!quiet) {
            std::cerr << "wrote " << report.rows.size() << " rows to " << cfg.output_path.string() << " in "
                      << report.total_seconds << " s\n";
        }
        if (!quiet && !report.rows.empty()) std::cout << compare_report(report).to_text();
    }
    return status;
}

int run_compare(const std::string& path, bool csv) {
    try {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open " + path);
        const SummaryTable table = compare_report(report_from_json(nlohmann::json::parse(in)));
        std::cout << (csv ? table.to_csv() : table.to_text());
        if (csv) {
            for (const auto& w : table.warnings) std::cerr << "warning: " << w << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error [compare]: " << e.what() << '\n';
        return kIoError;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed GP regression with expert selection"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_file, partition_method = "kmeans", beta = "diff_entropy";
    std::vector<std::string> methods, selectors;
    bool quiet = false;
    std::string data, out, csv, model;

    auto* bench = app.add_subcommand("bench", "run the train/aggregate/select benchmark");
    bench->add_option("--data", data, "CSV file with a header row");
    bench->add_option("--target-col", cfg.target_column, "target column name or zero-based index (default: last)");
    bench->add_option("--partitions,-M", cfg.partitions, "number of experts")->capture_default_str();
    bench->add_option("--partition-method", partition_method, "kmeans or random")->capture_default_str();
    bench->add_option("--train-frac", cfg.train_fraction, "training fraction")->capture_default_str();
    bench->add_option("--methods", methods, "poe,gpoe,bcm,npae")->delimiter(',');
    bench->add_option("--beta", beta, "gPoE weights: diff_entropy or uniform")->capture_default_str();
    bench->add_option("--selectors", selectors, "knn,dnn,static,none")->delimiter(',');
    bench->add_option("--k", cfg.k_values, "selection sizes")->delimiter(',');
    bench->add_option("--seeds", cfg.seeds, "split/partition/training seeds")->delimiter(',');
    bench->add_option("--out", out, "JSON report path");
    bench->add_option("--csv", csv, "CSV rows path (default: report path with .csv)");
    bench->add_option("--save-model", model, "checkpoint of the first seed's model");
    bench->add_option("--config", config_file, "JSON run configuration; flags override it");
    bench->add_option("--iterations", cfg.optimizer.iterations, "Adam iterations per restart")->capture_default_str();
    bench->add_option("--epochs", cfg.classifier.epochs, "classifier epochs")->capture_default_str();
    bench->add_flag("--quiet,-q", quiet, "no progress output");

    std::string report_path;
    bool compare_csv = false;
    auto* compare = app.add_subcommand("compare", "summarize a report against the full NPAE baseline");
    compare->add_option("report", report_path, "JSON report written by bench")->required();
    compare->add_flag("--csv", compare_csv, "CSV instead of a text table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kConfigError;
    }

    if (*compare) return run_compare(report_path, compare_csv);

    try {
        cfg.data_path = data;
        cfg.output_path = out;
        cfg.csv_path = csv;
        cfg.checkpoint_path = model;
        cfg.partition_method = partition_method_from_string(partition_method);
        cfg.beta_rule = beta_rule_from_string(beta);
    } catch (const std::exception& e) {
        std::cerr << "config: " << e.what() << '\n';
        return kConfigError;
    }
    return run_bench(*bench, cfg, config_file, methods, selectors, quiet);
}
