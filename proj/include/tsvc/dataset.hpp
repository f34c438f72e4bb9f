#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "tsvc/errors.hpp"

namespace tsvc {

enum class Scale { continuous, ordinal, binary };

const char* scale_name(Scale scale);
Scale scale_from_name(const std::string& name);

struct Column {
    std::string name;
    Scale scale = Scale::continuous;
    Eigen::VectorXd values;
};

// Column-oriented observation matrix with per-column scale metadata and an
// optional response vector.  Construction validates everything once; after
// that the dataset is treated as read-only and may be shared across workers.
// The only mutator, set_predictor_values, exists so the linear screen's
// permutation test can shuffle one column of a private scratch copy without
// rebuilding the rest.
class Dataset {
public:
    // Predictors only (prediction on unlabeled data).
    explicit Dataset(std::vector<Column> predictors);
    // Predictors plus response.
    Dataset(std::vector<Column> predictors, std::string response_name,
            Eigen::VectorXd response);

    Eigen::Index n_rows() const { return n_; }
    int n_predictors() const { return static_cast<int>(predictors_.size()); }

    const Column& predictor(int j) const;
    const Eigen::VectorXd& values(int j) const { return predictor(j).values; }
    // Index of a named predictor, or -1 when absent.
    int index_of(const std::string& name) const;
    std::vector<std::string> predictor_names() const;

    bool has_response() const { return has_response_; }
    const Eigen::VectorXd& response() const;
    const std::string& response_name() const { return response_name_; }

    // Replaces column j in-place (same length and scale domain enforced).
    void set_predictor_values(int j, Eigen::VectorXd values);

private:
    void validate_column(const Column& column) const;

    std::vector<Column> predictors_;
    std::string response_name_;
    Eigen::VectorXd response_;
    bool has_response_ = false;
    Eigen::Index n_ = 0;
};

}  // namespace tsvc
