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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dgpsel/classifier.hpp"
#include "dgpsel/dataset.hpp"
#include "dgpsel/expert.hpp"
#include "dgpsel/partitioner.hpp"

namespace dgpsel {

/// Everything needed to rebuild a fitted model from its training data.
/// Cholesky factors are not stored; restore_ensemble() recomputes them.
struct Checkpoint {
    SharedHyperparams theta;
    PartitionModel partition;
    std::vector<std::vector<std::size_t>> expert_indices;
    Standardization scaling;
    std::optional<ClassifierModel> classifier;
    std::string source_name;
};

nlohmann::json to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const ClassifierModel& model);
ClassifierModel classifier_from_json(const nlohmann::json& doc);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

ExpertEnsemble restore_ensemble(const Checkpoint& ckpt, const Dataset& train);

}  // namespace dgpsel
