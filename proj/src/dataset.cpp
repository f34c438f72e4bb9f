#include "tsvc/dataset.hpp"

#include <cmath>
#include <unordered_set>
#include <utility>

namespace tsvc {

const char* scale_name(Scale scale) {
    switch (scale) {
        case Scale::continuous: return "continuous";
        case Scale::ordinal: return "ordinal";
        case Scale::binary: return "binary";
    }
    return "continuous";
}

Scale scale_from_name(const std::string& name) {
    if (name == "continuous") return Scale::continuous;
    if (name == "ordinal") return Scale::ordinal;
    if (name == "binary") return Scale::binary;
    throw schema_error("unknown scale '" + name + "'");
}

Dataset::Dataset(std::vector<Column> predictors)
    : predictors_(std::move(predictors)) {
    if (predictors_.empty())
        throw schema_error("dataset needs at least one predictor column");
    n_ = predictors_.front().values.size();
    if (n_ < 1) throw schema_error("dataset needs at least one row");

    std::unordered_set<std::string> seen;
    for (const Column& col : predictors_) {
        if (!seen.insert(col.name).second)
            throw schema_error("duplicate column name '" + col.name + "'");
        validate_column(col);
    }
}

Dataset::Dataset(std::vector<Column> predictors, std::string response_name,
                 Eigen::VectorXd response)
    : Dataset(std::move(predictors)) {
    response_name_ = std::move(response_name);
    response_ = std::move(response);
    has_response_ = true;
    if (response_.size() != n_)
        throw schema_error("response length does not match predictor columns");
    if (index_of(response_name_) >= 0)
        throw schema_error("response name '" + response_name_ + "' collides with a predictor");
    for (Eigen::Index i = 0; i < n_; ++i)
        if (!std::isfinite(response_[i]))
            throw missing_value_error("non-finite response value at row " + std::to_string(i + 1));
}

void Dataset::validate_column(const Column& column) const {
    if (column.values.size() != n_)
        throw schema_error("column '" + column.name + "' has mismatched length");
    for (Eigen::Index i = 0; i < n_; ++i) {
        const double v = column.values[i];
        if (!std::isfinite(v))
            throw missing_value_error("non-finite value in column '" + column.name +
                                      "' at row " + std::to_string(i + 1));
        if (column.scale == Scale::binary && v != 0.0 && v != 1.0)
            throw schema_error("binary column '" + column.name + "' has value " +
                               std::to_string(v) + " at row " + std::to_string(i + 1));
    }
}

const Column& Dataset::predictor(int j) const {
    if (j < 0 || j >= n_predictors())
        throw invalid_index_error("predictor index " + std::to_string(j) + " out of range");
    return predictors_[static_cast<std::size_t>(j)];
}

int Dataset::index_of(const std::string& name) const {
    for (std::size_t j = 0; j < predictors_.size(); ++j)
        if (predictors_[j].name == name) return static_cast<int>(j);
    return -1;
}

std::vector<std::string> Dataset::predictor_names() const {
    std::vector<std::string> names;
    names.reserve(predictors_.size());
    for (const Column& col : predictors_) names.push_back(col.name);
    return names;
}

const Eigen::VectorXd& Dataset::response() const {
    if (!has_response_) throw schema_error("dataset has no response column");
    return response_;
}

void Dataset::set_predictor_values(int j, Eigen::VectorXd values) {
    if (j < 0 || j >= n_predictors())
        throw invalid_index_error("predictor index " + std::to_string(j) + " out of range");
    Column& col = predictors_[static_cast<std::size_t>(j)];
    Column candidate{col.name, col.scale, std::move(values)};
    validate_column(candidate);
    col.values = std::move(candidate.values);
}

}  // namespace tsvc
