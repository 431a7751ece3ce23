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

#include "dgpsel/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "dgpsel/checkpoint.hpp"
#include "dgpsel/dataset.hpp"
#include "dgpsel/metrics.hpp"

namespace dgpsel {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_fixed(double v, int precision) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

json optional_k(const std::optional<std::size_t>& k) { return k ? json(*k) : json(nullptr); }

std::optional<std::size_t> k_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<std::size_t>();
}

json theta_json(const SharedHyperparams& t) {
    const VectorXd& l = t.kernel.log_lengthscales;
    return {{"log_signal_variance", t.kernel.log_signal_variance},
            {"log_lengthscales", std::vector<double>(l.data(), l.data() + l.size())},
            {"log_noise_variance", t.log_noise_variance}};
}

SharedHyperparams theta_from(const json& j) {
    SharedHyperparams t;
    t.kernel.log_signal_variance = j.at("log_signal_variance").get<double>();
    const auto l = j.at("log_lengthscales").get<std::vector<double>>();
    t.kernel.log_lengthscales = Eigen::Map<const VectorXd>(l.data(), static_cast<Eigen::Index>(l.size()));
    t.log_noise_variance = j.at("log_noise_variance").get<double>();
    return t;
}

json environment_metadata() {
    json env;
#if defined(__clang__)
    env["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
    env["compiler"] = std::string("gcc ") + __VERSION__;
#else
    env["compiler"] = "unknown";
#endif
#ifdef NDEBUG
    env["build_type"] = "release";
#else
    env["build_type"] = "debug";
#endif
    env["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                           std::to_string(EIGEN_MINOR_VERSION);
    env["hardware_threads"] = std::thread::hardware_concurrency();
    env["cxx_standard"] = static_cast<long>(__cplusplus);
    return env;
}

json method_notes() {
    return {
        {"standardization", "features and targets z-scored with training-split population statistics"},
        {"kernel", "squared exponential with ARD lengthscales, hyperparameters shared by all experts"},
        {"training", "Adam on the sum of per-expert negative log marginal likelihoods"},
        {"npae_variance", "k(x,x) + sn2 - k_A^T K_A^{-1} k_A, floored at 1e-12"},
        {"local_variance", "expert predictive variances include the noise term"},
        {"smse", "mean squared error divided by the population variance of the test targets"},
        {"msll", "relative to N(train mean, train population variance) in standardized units"},
        {"labels", "expert ids are zero-based"},
        {"baseline", "selector 'none' aggregates over all experts and has no K"},
    };
}

std::vector<std::size_t> labels_of(const PartitionModel& parts) {
    return {parts.assignments.begin(), parts.assignments.end()};
}

MetricRow score(const std::string& method, const std::string& selector, std::optional<std::size_t> k,
                std::uint64_t seed, const AggregatedPrediction& pred, const Split& data, double train_mean,
                double train_var) {
    MetricRow row;
    row.method = method;
    row.selector = selector;
    row.k = k;
    row.seed = seed;
    row.n_test = pred.size();
    row.smse = smse(pred.mean, data.test.targets);
    row.msll = msll(pred.mean, pred.variance, data.test.targets, train_mean, train_var);
    row.rmse_raw = rmse(data.train.scaling.restore_targets(pred.mean), data.test.raw_targets());
    row.wall_time_seconds = pred.wall_time_seconds;
    row.solve_time_seconds = pred.solve_time_seconds;
    row.fallback_count = pred.fallback_count;
    if (!pred.experts_used.empty()) {
        row.mean_experts_used =
            static_cast<double>(std::accumulate(pred.experts_used.begin(), pred.experts_used.end(), std::size_t{0})) /
            static_cast<double>(pred.experts_used.size());
    }
    return row;
}

}  // namespace

void RunConfig::validate() const {
    if (data_path.empty()) throw std::invalid_argument("no data path given");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("train fraction must lie in (0, 1)");
    }
    if (partitions < 1) throw std::invalid_argument("need at least one partition");
    if (methods.empty()) throw std::invalid_argument("no aggregation method given");
    if (seeds.empty()) throw std::invalid_argument("need at least one seed");
    if (!selectors.empty() && k_values.empty()) throw std::invalid_argument("selectors given without K values");
    for (std::size_t k : k_values) {
        if (k < 1 || k > partitions) {
            throw std::invalid_argument("K = " + std::to_string(k) + " outside [1, " + std::to_string(partitions) +
                                        "]");
        }
    }
    if (optimizer.iterations == 0) throw std::invalid_argument("optimizer needs at least one iteration");
    classifier.validate();
}

json RunConfig::to_json() const {
    json j;
    j["data"] = data_path.string();
    j["target_column"] = target_column;
    j["train_fraction"] = train_fraction;
    j["partitions"] = partitions;
    j["partition_method"] = to_string(partition_method);
    j["methods"] = json::array();
    for (auto m : methods) j["methods"].push_back(to_string(m));
    j["beta_rule"] = to_string(beta_rule);
    j["selectors"] = json::array();
    for (auto s : selectors) j["selectors"].push_back(to_string(s));
    j["k"] = k_values;
    j["seeds"] = seeds;
    j["optimizer"] = {{"iterations", optimizer.iterations},
                      {"restarts", optimizer.restarts},
                      {"step", optimizer.step},
                      {"restart_spread", optimizer.restart_spread}};
    j["classifier"] = {{"epochs", classifier.epochs},
                       {"batch_size", classifier.batch_size},
                       {"learning_rate", classifier.learning_rate},
                       {"validation_fraction", classifier.validation_fraction},
                       {"hidden_layers", classifier.hidden_layers},
                       {"activation", to_string(classifier.activation)}};
    j["out"] = output_path.string();
    j["csv"] = csv_path.string();
    j["save_model"] = checkpoint_path.string();
    return j;
}

RunConfig RunConfig::from_json(const json& doc) {
    RunConfig c;
    c.data_path = doc.value("data", std::string{});
    c.target_column = doc.value("target_column", c.target_column);
    c.train_fraction = doc.value("train_fraction", c.train_fraction);
    c.partitions = doc.value("partitions", c.partitions);
    if (doc.contains("partition_method")) {
        c.partition_method = partition_method_from_string(doc.at("partition_method").get<std::string>());
    }
    if (doc.contains("methods")) {
        c.methods.clear();
        for (const auto& m : doc.at("methods")) c.methods.push_back(aggregation_method_from_string(m.get<std::string>()));
    }
    if (doc.contains("beta_rule")) c.beta_rule = beta_rule_from_string(doc.at("beta_rule").get<std::string>());
    if (doc.contains("selectors")) {
        c.selectors.clear();
        for (const auto& s : doc.at("selectors")) {
            const auto name = s.get<std::string>();
            if (name != "none") c.selectors.push_back(selector_kind_from_string(name));
        }
    }
    if (doc.contains("k")) c.k_values = doc.at("k").get<std::vector<std::size_t>>();
    if (doc.contains("seeds")) c.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    if (doc.contains("optimizer")) {
        const auto& o = doc.at("optimizer");
        c.optimizer.iterations = o.value("iterations", c.optimizer.iterations);
        c.optimizer.restarts = o.value("restarts", c.optimizer.restarts);
        c.optimizer.step = o.value("step", c.optimizer.step);
        c.optimizer.restart_spread = o.value("restart_spread", c.optimizer.restart_spread);
    }
    if (doc.contains("classifier")) {
        const auto& t = doc.at("classifier");
        c.classifier.epochs = t.value("epochs", c.classifier.epochs);
        c.classifier.batch_size = t.value("batch_size", c.classifier.batch_size);
        c.classifier.learning_rate = t.value("learning_rate", c.classifier.learning_rate);
        c.classifier.validation_fraction = t.value("validation_fraction", c.classifier.validation_fraction);
        if (t.contains("hidden_layers")) {
            c.classifier.hidden_layers = t.at("hidden_layers").get<std::vector<std::size_t>>();
        }
        if (t.contains("activation")) {
            c.classifier.activation = activation_from_string(t.at("activation").get<std::string>());
        }
    }
    c.output_path = doc.value("out", std::string{});
    c.csv_path = doc.value("csv", std::string{});
    c.checkpoint_path = doc.value("save_model", std::string{});
    return c;
}

const MetricRow* RunReport::find(const std::string& method, const std::string& selector,
                                 std::optional<std::size_t> k, std::uint64_t seed) const {
    for (const auto& r : rows) {
        if (r.method != method || r.selector != selector || r.seed != seed) continue;
        if (selector == "none" || r.k == k) return &r;
    }
    return nullptr;
}

RunReport run_benchmark(const RunConfig& config, std::ostream* log) {
    const auto t_run = Clock::now();
    RunReport report;
    report.config = config;
    report.metadata["environment"] = environment_metadata();
    report.metadata["notes"] = method_notes();

    std::string stage = "config";
    auto say = [&](const std::string& msg) {
        if (log) *log << msg << std::endl;
    };

    try {
        config.validate();

        stage = "load";
        const Dataset data = load_csv(config.data_path, config.target_column);
        report.metadata["dataset"] = {{"source", data.source_name},
                                      {"n", data.size()},
                                      {"d", data.dim()},
                                      {"target", data.target_name},
                                      {"features", data.feature_names}};
        say("loaded " + data.source_name + ": n=" + std::to_string(data.size()) + " d=" + std::to_string(data.dim()));
        const std::size_t m = config.partitions;

        for (std::uint64_t seed : config.seeds) {
            SeedSummary info;
            info.seed = seed;

            stage = "split";
            const Split parts = split(data, SplitSpec{config.train_fraction, seed});
            info.n_train = parts.train.size();
            info.n_test = parts.test.size();
            const double train_mean = parts.train.targets.mean();
            const double train_var = (parts.train.targets.array() - train_mean).square().mean();

            stage = "partition";
            const PartitionModel partition = make_partition(parts.train.features, m, config.partition_method, seed);
            info.partition_sizes = partition.sizes();

            stage = "fit";
            auto t0 = Clock::now();
            OptimizerConfig opt = config.optimizer;
            opt.seed = seed;
            FitResult fitted = fit(parts.train, partition, SharedHyperparams::initial(data.dim()), opt);
            info.fit_seconds = seconds_since(t0);
            info.theta = fitted.theta;
            info.initial_nlml = fitted.initial_nlml;
            info.final_nlml = fitted.final_nlml;
            say("seed " + std::to_string(seed) + ": fitted " + std::to_string(m) + " experts, NLML " +
                fmt_fixed(fitted.initial_nlml, 3) + " -> " + fmt_fixed(fitted.final_nlml, 3) + " in " +
                fmt_fixed(info.fit_seconds, 2) + " s");
            const ExpertEnsemble ensemble(fitted.theta, std::move(fitted.experts));

            const auto want = [&](SelectorKind k) {
                return std::find(config.selectors.begin(), config.selectors.end(), k) != config.selectors.end();
            };
            std::map<SelectorKind, SelectorModel> selectors;
            const std::size_t k0 = config.k_values.empty() ? m : config.k_values.front();

            std::shared_ptr<const ClassifierModel> classifier;
            if (want(SelectorKind::dnn) || !config.checkpoint_path.empty()) {
                stage = "classifier";
                t0 = Clock::now();
                TrainConfig tc = config.classifier;
                tc.seed = seed;
                const auto labels = labels_of(partition);
                TrainResult trained = train_classifier(parts.train.features, labels, m, tc);
                info.classifier_seconds = seconds_since(t0);
                info.classifier_validation_accuracy = trained.validation_accuracy;
                classifier = std::make_shared<const ClassifierModel>(std::move(trained.model));
                say("seed " + std::to_string(seed) + ": classifier validation accuracy " +
                    fmt_fixed(info.classifier_validation_accuracy, 3) + " in " +
                    fmt_fixed(info.classifier_seconds, 2) + " s");
            }

            stage = "select";
            if (want(SelectorKind::knn)) selectors.emplace(SelectorKind::knn, SelectorModel::knn(partition.centroids, k0));
            if (want(SelectorKind::dnn)) selectors.emplace(SelectorKind::dnn, SelectorModel::dnn(classifier, k0));
            if (want(SelectorKind::static_graph)) {
                auto s = fit_static_graph(ensemble, parts.train.features, m);
                info.static_ranking = s.static_set();
                selectors.emplace(SelectorKind::static_graph, s.with_k(k0));
            }

            if (!config.checkpoint_path.empty() && seed == config.seeds.front()) {
                stage = "write";
                Checkpoint ckpt;
                ckpt.theta = ensemble.hyperparams();
                ckpt.partition = partition;
                ckpt.expert_indices = partition.members();
                ckpt.scaling = parts.train.scaling;
                if (classifier) ckpt.classifier = *classifier;
                ckpt.source_name = data.source_name;
                save_checkpoint(config.checkpoint_path, ckpt);
            }

            for (AggregationMethod method : config.methods) {
                const AggregationConfig agg{method, config.beta_rule};
                const std::string mname = to_string(method);

                stage = "aggregate";
                auto pred = aggregate_batch(ensemble, agg, parts.test.features);
                stage = "metrics";
                report.rows.push_back(score(mname, "none", std::nullopt, seed, pred, parts, train_mean, train_var));

                for (SelectorKind kind : config.selectors) {
                    const SelectorModel& base = selectors.at(kind);
                    for (std::size_t k : config.k_values) {
                        stage = "aggregate";
                        const SelectorModel sel = base.with_k(k);
                        pred = aggregate_batch(ensemble, agg, parts.test.features, &sel);
                        stage = "metrics";
                        report.rows.push_back(score(mname, to_string(kind), k, seed, pred, parts, train_mean, train_var));
                    }
                }
                const MetricRow& b = *report.find(mname, "none", std::nullopt, seed);
                say("seed " + std::to_string(seed) + ": " + mname + " SMSE " + fmt_fixed(b.smse, 4) + " MSLL " +
                    fmt_fixed(b.msll, 4));
            }
            report.seeds.push_back(std::move(info));
        }
    } catch (const BenchmarkError&) {
        throw;
    } catch (const std::exception& e) {
        report.total_seconds = seconds_since(t_run);
        throw BenchmarkError(stage, e.what(), std::move(report));
    }
    report.total_seconds = seconds_since(t_run);
    return report;
}

json report_to_json(const RunReport& report) {
    json doc;
    doc["schema"] = "dgpsel-report/1";
    doc["config"] = report.config.to_json();
    doc["metadata"] = report.metadata;
    doc["total_seconds"] = report.total_seconds;
    doc["seeds"] = json::array();
    for (const auto& s : report.seeds) {
        doc["seeds"].push_back({{"seed", s.seed},
                                {"n_train", s.n_train},
                                {"n_test", s.n_test},
                                {"partition_sizes", s.partition_sizes},
                                {"hyperparameters", theta_json(s.theta)},
                                {"initial_nlml", s.initial_nlml},
                                {"final_nlml", s.final_nlml},
                                {"fit_seconds", s.fit_seconds},
                                {"classifier_validation_accuracy", s.classifier_validation_accuracy},
                                {"classifier_seconds", s.classifier_seconds},
                                {"static_ranking", s.static_ranking}});
    }
    doc["rows"] = json::array();
    for (const auto& r : report.rows) {
        doc["rows"].push_back({{"method", r.method},
                               {"selector", r.selector},
                               {"k", optional_k(r.k)},
                               {"seed", r.seed},
                               {"n_test", r.n_test},
                               {"smse", r.smse},
                               {"msll", r.msll},
                               {"rmse_raw", r.rmse_raw},
                               {"wall_time_seconds", r.wall_time_seconds},
                               {"solve_time_seconds", r.solve_time_seconds},
                               {"fallback_count", r.fallback_count},
                               {"mean_experts_used", r.mean_experts_used}});
    }
    return doc;
}

RunReport report_from_json(const json& doc) {
    RunReport report;
    if (doc.contains("config")) report.config = RunConfig::from_json(doc.at("config"));
    report.metadata = doc.value("metadata", json::object());
    report.total_seconds = doc.value("total_seconds", 0.0);
    for (const auto& s : doc.value("seeds", json::array())) {
        SeedSummary info;
        info.seed = s.at("seed").get<std::uint64_t>();
        info.n_train = s.value("n_train", std::size_t{0});
        info.n_test = s.value("n_test", std::size_t{0});
        info.partition_sizes = s.value("partition_sizes", std::vector<std::size_t>{});
        if (s.contains("hyperparameters")) info.theta = theta_from(s.at("hyperparameters"));
        info.initial_nlml = s.value("initial_nlml", 0.0);
        info.final_nlml = s.value("final_nlml", 0.0);
        info.fit_seconds = s.value("fit_seconds", 0.0);
        info.classifier_validation_accuracy = s.value("classifier_validation_accuracy", 0.0);
        info.classifier_seconds = s.value("classifier_seconds", 0.0);
        info.static_ranking = s.value("static_ranking", std::vector<ExpertId>{});
        report.seeds.push_back(std::move(info));
    }
    for (const auto& r : doc.at("rows")) {
        MetricRow row;
        row.method = r.at("method").get<std::string>();
        row.selector = r.at("selector").get<std::string>();
        row.k = k_from(r.at("k"));
        row.seed = r.at("seed").get<std::uint64_t>();
        row.n_test = r.value("n_test", std::size_t{0});
        row.smse = r.at("smse").get<double>();
        row.msll = r.at("msll").get<double>();
        row.rmse_raw = r.value("rmse_raw", 0.0);
        row.wall_time_seconds = r.value("wall_time_seconds", 0.0);
        row.solve_time_seconds = r.value("solve_time_seconds", 0.0);
        row.fallback_count = r.value("fallback_count", std::size_t{0});
        row.mean_experts_used = r.value("mean_experts_used", 0.0);
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string rows_to_csv(const RunReport& report) {
    std::ostringstream out;
    out << "method,selector,k,seed,n_test,smse,msll,rmse_raw,fallback_count,mean_experts_used\n";
    for (const auto& r : report.rows) {
        out << r.method << ',' << r.selector << ',' << (r.k ? std::to_string(*r.k) : std::string{}) << ',' << r.seed
            << ',' << r.n_test << ',' << fmt_double(r.smse) << ',' << fmt_double(r.msll) << ','
            << fmt_double(r.rmse_raw) << ',' << r.fallback_count << ',' << fmt_double(r.mean_experts_used) << '\n';
    }
    return out.str();
}

void write_report(const RunReport& report) {
    const auto& cfg = report.config;
    if (cfg.output_path.empty()) return;
    {
        std::ofstream out(cfg.output_path);
        if (!out) throw StageError("write", "cannot open " + cfg.output_path.string());
        out << report_to_json(report).dump(2) << '\n';
    }
    std::filesystem::path csv = cfg.csv_path;
    if (csv.empty()) csv = std::filesystem::path(cfg.output_path).replace_extension(".csv");
    std::ofstream out(csv);
    if (!out) throw StageError("write", "cannot open " + csv.string());
    out << rows_to_csv(report);
}

SummaryTable compare_report(const RunReport& report) {
    if (report.rows.empty()) throw std::invalid_argument("report has no metric rows");

    SummaryTable table;
    std::map<std::uint64_t, const MetricRow*> baseline;
    for (const auto& r : report.rows) {
        if (r.method == "npae" && r.selector == "none") baseline.emplace(r.seed, &r);
    }
    if (baseline.empty()) table.warnings.push_back("no full NPAE baseline row; deviations omitted");

    using Key = std::tuple<std::string, std::string, std::optional<std::size_t>>;
    std::map<Key, std::vector<const MetricRow*>> groups;
    std::vector<Key> order;
    for (const auto& r : report.rows) {
        Key key{r.method, r.selector, r.selector == "none" ? std::nullopt : r.k};
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) order.push_back(key);
        it->second.push_back(&r);
    }

    std::vector<std::uint64_t> missing;
    for (const auto& key : order) {
        const auto& rows = groups.at(key);
        SummaryRow s;
        std::tie(s.method, s.selector, s.k) = key;
        s.n_seeds = rows.size();
        const double n = static_cast<double>(rows.size());
        double dsmse = 0.0, dmsll = 0.0;
        std::size_t with_base = 0;
        for (const MetricRow* r : rows) {
            s.smse_mean += r->smse / n;
            s.msll_mean += r->msll / n;
            const auto b = baseline.find(r->seed);
            if (b != baseline.end()) {
                dsmse += std::abs(r->smse - b->second->smse);
                dmsll += std::abs(r->msll - b->second->msll);
                ++with_base;
            } else if (!baseline.empty() &&
                       std::find(missing.begin(), missing.end(), r->seed) == missing.end()) {
                missing.push_back(r->seed);
            }
        }
        if (rows.size() > 1) {
            for (const MetricRow* r : rows) {
                s.smse_std += (r->smse - s.smse_mean) * (r->smse - s.smse_mean);
                s.msll_std += (r->msll - s.msll_mean) * (r->msll - s.msll_mean);
            }
            s.smse_std = std::sqrt(s.smse_std / (n - 1.0));
            s.msll_std = std::sqrt(s.msll_std / (n - 1.0));
        }
        if (with_base > 0) {
            s.smse_deviation = dsmse / static_cast<double>(with_base);
            s.msll_deviation = dmsll / static_cast<double>(with_base);
        }
        table.rows.push_back(std::move(s));
    }
    for (std::uint64_t seed : missing) {
        table.warnings.push_back("no full NPAE baseline for seed " + std::to_string(seed) +
                                 "; its rows are left out of the deviations");
    }

    // Baselines (no K) first, then ascending K; ties keep report order.
    std::stable_sort(table.rows.begin(), table.rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
        if (a.k.has_value() != b.k.has_value()) return !a.k.has_value();
        return a.k.value_or(0) < b.k.value_or(0);
    });
    return table;
}

std::string SummaryTable::to_text() const {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-6s %-8s %4s %5s %21s %21s %11s %11s\n", "method", "selector", "K", "seeds",
                  "SMSE (mean +- std)", "MSLL (mean +- std)", "|dSMSE|", "|dMSLL|");
    out << line;
    for (const auto& r : rows) {
        const std::string k = r.k ? std::to_string(*r.k) : "-";
        const std::string ds = r.smse_deviation ? fmt_fixed(*r.smse_deviation, 6) : "n/a";
        const std::string dm = r.msll_deviation ? fmt_fixed(*r.msll_deviation, 6) : "n/a";
        std::snprintf(line, sizeof line, "%-6s %-8s %4s %5zu %10.6f +- %7.5f %10.5f +- %7.5f %11s %11s\n",
                      r.method.c_str(), r.selector.c_str(), k.c_str(), r.n_seeds, r.smse_mean, r.smse_std,
                      r.msll_mean, r.msll_std, ds.c_str(), dm.c_str());
        out << line;
    }
    for (const auto& w : warnings) out << "warning: " << w << '\n';
    return out.str();
}

std::string SummaryTable::to_csv() const {
    std::ostringstream out;
    out << "method,selector,k,n_seeds,smse_mean,smse_std,msll_mean,msll_std,smse_deviation,msll_deviation\n";
    for (const auto& r : rows) {
        out << r.method << ',' << r.selector << ',' << (r.k ? std::to_string(*r.k) : std::string{}) << ','
            << r.n_seeds << ',' << fmt_double(r.smse_mean) << ',' << fmt_double(r.smse_std) << ','
            << fmt_double(r.msll_mean) << ',' << fmt_double(r.msll_std) << ','
            << (r.smse_deviation ? fmt_double(*r.smse_deviation) : std::string{}) << ','
            << (r.msll_deviation ? fmt_double(*r.msll_deviation) : std::string{}) << '\n';
    }
    return out.str();
}

}  // namespace dgpsel
