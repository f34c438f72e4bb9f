#pragma once

#include <stdexcept>
#include <string>

namespace tsvc {

// Base of all library errors. CLI maps the three branches below to exit
// codes: invalid_args -> 2, data_error -> 3, numeric_error -> 4.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct invalid_args_error : error {
    using error::error;
};

struct invalid_index_error : invalid_args_error {
    using invalid_args_error::invalid_args_error;
};

struct data_error : error {
    using error::error;
};

struct parse_error : data_error {
    parse_error(std::string msg, long row, std::string column)
        : data_error(std::move(msg)), row(row), column(std::move(column)) {}
    long row;            // 1-based data row (header not counted)
    std::string column;  // column name or ordinal
};

struct schema_error : data_error {
    using data_error::data_error;
};

struct missing_value_error : data_error {
    using data_error::data_error;
};

struct schema_mismatch_error : data_error {
    using data_error::data_error;
};

struct invalid_response_error : data_error {
    using data_error::data_error;
};

struct degenerate_data_error : data_error {
    using data_error::data_error;
};

struct numeric_error : error {
    using error::error;
};

struct rank_deficient_error : numeric_error {
    using numeric_error::numeric_error;
};

struct empty_leaf_error : numeric_error {
    using numeric_error::numeric_error;
};

struct no_admissible_split_error : numeric_error {
    using numeric_error::numeric_error;
};

}  // namespace tsvc
