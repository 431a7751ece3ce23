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

#include "dgpsel/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace dgpsel {

namespace {

struct ColumnStats {
    double mean;
    double std;
    bool constant;
};

ColumnStats column_stats(const Eigen::Ref<const VectorXd>& col) {
    const double n = static_cast<double>(col.size());
    const double mean = col.sum() / n;
    const double var = (col.array() - mean).square().sum() / n;
    const double std = std::sqrt(var);
    const bool constant = std <= 1e-12 * std::max(1.0, std::abs(mean));
    return {mean, std, constant};
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        cells.push_back(trim(cell));
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no, std::size_t col) {
    if (cell.empty()) {
        throw std::invalid_argument("empty cell at line " + std::to_string(line_no) + ", column " +
                                    std::to_string(col));
    }
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(v)) {
        throw std::invalid_argument("non-numeric cell '" + cell + "' at line " +
                                    std::to_string(line_no) + ", column " + std::to_string(col));
    }
    return v;
}

std::size_t resolve_target(const std::vector<std::string>& header, const std::string& selector) {
    if (selector.empty()) {
        return header.size() - 1;
    }
    const auto it = std::find(header.begin(), header.end(), selector);
    if (it != header.end()) {
        return static_cast<std::size_t>(it - header.begin());
    }
    char* end = nullptr;
    const long idx = std::strtol(selector.c_str(), &end, 10);
    if (end == selector.c_str() + selector.size() && idx >= 0 &&
        static_cast<std::size_t>(idx) < header.size()) {
        return static_cast<std::size_t>(idx);
    }
    throw std::invalid_argument("target column '" + selector + "' not found");
}

}  // namespace

Standardization Standardization::fit(const MatrixXd& raw_features, const VectorXd& raw_targets) {
    if (raw_features.rows() < 1 || raw_targets.size() != raw_features.rows()) {
        throw std::invalid_argument("standardization needs matching non-empty features and targets");
    }
    Standardization s;
    const auto d = raw_features.cols();
    s.feature_means.resize(d);
    s.feature_stds.resize(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const auto st = column_stats(raw_features.col(j));
        s.feature_means(j) = st.mean;
        s.feature_stds(j) = st.constant ? 1.0 : st.std;
    }
    const auto tt = column_stats(raw_targets);
    if (tt.constant) {
        throw std::invalid_argument("target column is constant (std = 0)");
    }
    s.target_mean = tt.mean;
    s.target_std = tt.std;
    return s;
}

MatrixXd Standardization::standardize_features(const MatrixXd& raw) const {
    return (raw.rowwise() - feature_means.transpose()).array().rowwise() /
           feature_stds.transpose().array();
}

VectorXd Standardization::standardize_targets(const VectorXd& raw) const {
    return (raw.array() - target_mean) / target_std;
}

MatrixXd Standardization::restore_features(const MatrixXd& standardized) const {
    MatrixXd out = standardized.array().rowwise() * feature_stds.transpose().array();
    return out.rowwise() + feature_means.transpose();
}

VectorXd Standardization::restore_targets(const VectorXd& standardized) const {
    return standardized.array() * target_std + target_mean;
}

Dataset Dataset::from_raw(const MatrixXd& raw_features, const VectorXd& raw_targets,
                          std::string source_name) {
    if (raw_features.rows() < 2) {
        throw std::invalid_argument("dataset needs at least 2 rows");
    }
    if (raw_features.cols() < 1) {
        throw std::invalid_argument("dataset needs at least 1 feature column");
    }
    if (raw_targets.size() != raw_features.rows()) {
        throw std::invalid_argument("feature and target row counts differ");
    }
    if (!raw_features.allFinite() || !raw_targets.allFinite()) {
        throw std::invalid_argument("dataset contains non-finite values");
    }
    Dataset ds;
    ds.scaling = Standardization::fit(raw_features, raw_targets);
    ds.features = ds.scaling.standardize_features(raw_features);
    ds.targets = ds.scaling.standardize_targets(raw_targets);
    ds.source_name = std::move(source_name);
    for (Eigen::Index j = 0; j < raw_features.cols(); ++j) {
        ds.feature_names.push_back("x" + std::to_string(j));
    }
    ds.target_name = "y";
    return ds;
}

Dataset Dataset::rows(const std::vector<std::size_t>& indices, const Standardization& s) const {
    const MatrixXd raw_x = raw_features();
    const VectorXd raw_y = raw_targets();
    MatrixXd x(static_cast<Eigen::Index>(indices.size()), features.cols());
    VectorXd y(static_cast<Eigen::Index>(indices.size()));
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const auto src = static_cast<Eigen::Index>(indices[r]);
        x.row(static_cast<Eigen::Index>(r)) = raw_x.row(src);
        y(static_cast<Eigen::Index>(r)) = raw_y(src);
    }
    Dataset out;
    out.scaling = s;
    out.features = s.standardize_features(x);
    out.targets = s.standardize_targets(y);
    out.source_name = source_name;
    out.feature_names = feature_names;
    out.target_name = target_name;
    return out;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& target_column) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open " + path.string());
    }
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (header.empty() && std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) {
            line.erase(0, 3);
        }
        if (!trim(line).empty()) {
            header = split_row(line);
        }
    }
    if (header.size() < 2) {
        throw std::invalid_argument(path.string() + ": header needs at least two columns");
    }
    const std::size_t target = resolve_target(header, target_column);

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto cells = split_row(line);
        if (cells.size() != header.size()) {
            throw std::invalid_argument(path.string() + ": ragged row at line " +
                                        std::to_string(line_no) + " (" +
                                        std::to_string(cells.size()) + " cells, expected " +
                                        std::to_string(header.size()) + ")");
        }
        std::vector<double> values(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            values[c] = parse_cell(cells[c], line_no, c);
        }
        rows.push_back(std::move(values));
    }
    if (rows.size() < 2) {
        throw std::invalid_argument(path.string() + ": need at least 2 data rows");
    }

    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto d = static_cast<Eigen::Index>(header.size() - 1);
    MatrixXd x(n, d);
    VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index col = 0;
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (c == target) {
                y(i) = rows[static_cast<std::size_t>(i)][c];
            } else {
                x(i, col++) = rows[static_cast<std::size_t>(i)][c];
            }
        }
    }
    Dataset ds = Dataset::from_raw(x, y, path.filename().string());
    ds.feature_names.clear();
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c != target) {
            ds.feature_names.push_back(header[c]);
        }
    }
    ds.target_name = header[target];
    return ds;
}

Split split(const Dataset& ds, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
        throw std::invalid_argument("train_fraction must lie in (0, 1)");
    }
    const std::size_t n = ds.size();
    const auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
    if (n_train == 0 || n_train >= n) {
        throw std::invalid_argument("split leaves an empty side (" + std::to_string(n_train) +
                                    " of " + std::to_string(n) + " rows for training)");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(spec.seed);
    // Fisher-Yates with an explicit draw so the order does not depend on the
    // standard library's shuffle implementation.
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(order[i], order[j]);
    }

    Split out;
    out.train_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());

    const MatrixXd raw_x = ds.raw_features();
    const VectorXd raw_y = ds.raw_targets();
    MatrixXd train_x(static_cast<Eigen::Index>(n_train), raw_x.cols());
    VectorXd train_y(static_cast<Eigen::Index>(n_train));
    for (std::size_t r = 0; r < n_train; ++r) {
        train_x.row(static_cast<Eigen::Index>(r)) = raw_x.row(static_cast<Eigen::Index>(out.train_indices[r]));
        train_y(static_cast<Eigen::Index>(r)) = raw_y(static_cast<Eigen::Index>(out.train_indices[r]));
    }
    const Standardization train_scaling = Standardization::fit(train_x, train_y);
    out.train = ds.rows(out.train_indices, train_scaling);
    out.test = ds.rows(out.test_indices, train_scaling);
    return out;
}

}  // namespace dgpsel
