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

#include "dgpsel/checkpoint.hpp"

#include <fstream>

namespace dgpsel {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json vec_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

VectorXd vec_from(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json mat_json(const MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::vector<double> r(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index c = 0; c < m.cols(); ++c) r[static_cast<std::size_t>(c)] = m(i, c);
        rows.push_back(std::move(r));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

MatrixXd mat_from(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows) {
        throw std::invalid_argument("checkpoint matrix row count mismatch");
    }
    MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto r = data.at(static_cast<std::size_t>(i)).get<std::vector<double>>();
        if (static_cast<Eigen::Index>(r.size()) != cols) {
            throw std::invalid_argument("checkpoint matrix column count mismatch");
        }
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = r[static_cast<std::size_t>(c)];
    }
    return m;
}

}  // namespace

json to_json(const ClassifierModel& model) {
    json layers = json::array();
    for (std::size_t l = 0; l < model.num_layers(); ++l) {
        layers.push_back({{"weights", mat_json(model.weights[l])}, {"biases", vec_json(model.biases[l])}});
    }
    return {{"layer_sizes", model.layer_sizes}, {"activation", to_string(model.activation)}, {"layers", layers}};
}

ClassifierModel classifier_from_json(const json& doc) {
    ClassifierModel m;
    m.layer_sizes = doc.at("layer_sizes").get<std::vector<std::size_t>>();
    m.activation = activation_from_string(doc.at("activation").get<std::string>());
    for (const auto& layer : doc.at("layers")) {
        m.weights.push_back(mat_from(layer.at("weights")));
        m.biases.push_back(vec_from(layer.at("biases")));
    }
    m.validate();
    return m;
}

json to_json(const Checkpoint& ckpt) {
    json doc;
    doc["format_version"] = kFormatVersion;
    doc["source_name"] = ckpt.source_name;
    doc["hyperparameters"] = {
        {"kernel", "squared_exponential_ard"},
        {"log_signal_variance", ckpt.theta.kernel.log_signal_variance},
        {"log_lengthscales", vec_json(ckpt.theta.kernel.log_lengthscales)},
        {"log_noise_variance", ckpt.theta.log_noise_variance},
    };
    doc["partition"] = {
        {"method", to_string(ckpt.partition.method)},
        {"seed", ckpt.partition.seed},
        {"assignments", ckpt.partition.assignments},
        {"centroids", mat_json(ckpt.partition.centroids)},
    };
    doc["expert_indices"] = ckpt.expert_indices;
    doc["standardization"] = {
        {"feature_means", vec_json(ckpt.scaling.feature_means)},
        {"feature_stds", vec_json(ckpt.scaling.feature_stds)},
        {"target_mean", ckpt.scaling.target_mean},
        {"target_std", ckpt.scaling.target_std},
    };
    doc["classifier"] = ckpt.classifier ? to_json(*ckpt.classifier) : json(nullptr);
    return doc;
}

Checkpoint checkpoint_from_json(const json& doc) {
    if (doc.value("format_version", 0) != kFormatVersion) {
        throw std::invalid_argument("unsupported checkpoint format version");
    }
    Checkpoint c;
    c.source_name = doc.value("source_name", std::string{});
    const auto& h = doc.at("hyperparameters");
    if (h.value("kernel", std::string{}) != "squared_exponential_ard") {
        throw std::invalid_argument("checkpoint uses an unknown kernel");
    }
    c.theta.kernel.log_signal_variance = h.at("log_signal_variance").get<double>();
    c.theta.kernel.log_lengthscales = vec_from(h.at("log_lengthscales"));
    c.theta.log_noise_variance = h.at("log_noise_variance").get<double>();
    c.theta.validate();

    const auto& p = doc.at("partition");
    c.partition.method = partition_method_from_string(p.at("method").get<std::string>());
    c.partition.seed = p.at("seed").get<std::uint64_t>();
    c.partition.assignments = p.at("assignments").get<std::vector<ExpertId>>();
    c.partition.centroids = mat_from(p.at("centroids"));
    c.partition.validate(c.partition.assignments.size());

    c.expert_indices = doc.at("expert_indices").get<std::vector<std::vector<std::size_t>>>();
    const auto& s = doc.at("standardization");
    c.scaling.feature_means = vec_from(s.at("feature_means"));
    c.scaling.feature_stds = vec_from(s.at("feature_stds"));
    c.scaling.target_mean = s.at("target_mean").get<double>();
    c.scaling.target_std = s.at("target_std").get<double>();
    if (doc.contains("classifier") && !doc.at("classifier").is_null()) {
        c.classifier = classifier_from_json(doc.at("classifier"));
    }
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write checkpoint " + path.string());
    }
    out << to_json(ckpt).dump(1) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open checkpoint " + path.string());
    }
    return checkpoint_from_json(json::parse(in));
}

ExpertEnsemble restore_ensemble(const Checkpoint& ckpt, const Dataset& train) {
    if (train.dim() != ckpt.theta.dim()) {
        throw std::invalid_argument("training data dimension does not match the checkpoint");
    }
    return ExpertEnsemble(ckpt.theta, build_experts(ckpt.theta, train, ckpt.expert_indices));
}

}  // namespace dgpsel
