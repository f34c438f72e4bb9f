#pragma once

#include <string>
#include <vector>

#include "tsvc/dataset.hpp"

namespace tsvc {

// One entry of a schema sidecar: how to treat one CSV column.
struct ColumnSpec {
    enum class Role { response, predictor, ignore };
    std::string name;
    Role role = Role::predictor;
    Scale scale = Scale::continuous;
};

const char* role_name(ColumnSpec::Role role);
ColumnSpec::Role role_from_name(const std::string& name);

// Reads a schema sidecar:
//   {"columns": [{"name": "age", "role": "predictor", "scale": "ordinal"}, ...]}
// "scale" defaults to continuous and is meaningful for predictors only.
// Throws schema_error on duplicates, more than one response, or no
// predictors.
std::vector<ColumnSpec> load_schema(const std::string& path);

// Loads a CSV file (header row, comma separated, dot decimal separator,
// locale independent) against a schema.  Predictor columns must all be
// present; the response column may be absent, which yields an unlabeled
// dataset (for prediction).  File columns the schema does not mention are
// ignored.  Empty cells and NA markers are rejected with their row number.
Dataset load_csv(const std::string& path, const std::vector<ColumnSpec>& schema);

// Number of data rows (non-empty lines after the header); 0 for a file with
// only a header.  Lets callers handle empty inputs before load_csv, which
// requires at least one row.
long count_csv_rows(const std::string& path);

}  // namespace tsvc
