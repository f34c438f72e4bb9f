#include "tsvc/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "tsvc/errors.hpp"

namespace tsvc {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

bool is_missing(const std::string& cell) {
    return cell.empty() || cell == "NA" || cell == "na" || cell == "NaN" ||
           cell == "nan" || cell == "NULL";
}

double parse_cell(const std::string& cell, long row, const std::string& column) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw parse_error("cannot parse '" + cell + "' as a number", row, column);
    return value;
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path);
    return in;
}

}  // namespace

const char* role_name(ColumnSpec::Role role) {
    switch (role) {
        case ColumnSpec::Role::response: return "response";
        case ColumnSpec::Role::predictor: return "predictor";
        case ColumnSpec::Role::ignore: return "ignore";
    }
    return "";
}

ColumnSpec::Role role_from_name(const std::string& name) {
    if (name == "response") return ColumnSpec::Role::response;
    if (name == "predictor") return ColumnSpec::Role::predictor;
    if (name == "ignore") return ColumnSpec::Role::ignore;
    throw schema_error("unknown column role '" + name + "'");
}

std::vector<ColumnSpec> load_schema(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw schema_error("cannot parse schema " + path + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("columns") || !doc["columns"].is_array())
        throw schema_error("schema must be an object with a 'columns' array");

    std::vector<ColumnSpec> schema;
    int n_response = 0;
    int n_predictors = 0;
    for (const auto& entry : doc["columns"]) {
        if (!entry.is_object() || !entry.contains("name") || !entry.contains("role"))
            throw schema_error("every schema column needs 'name' and 'role'");
        ColumnSpec spec;
        spec.name = entry["name"].get<std::string>();
        spec.role = role_from_name(entry["role"].get<std::string>());
        if (entry.contains("scale"))
            spec.scale = scale_from_name(entry["scale"].get<std::string>());
        for (const ColumnSpec& seen : schema)
            if (seen.name == spec.name)
                throw schema_error("duplicate schema column '" + spec.name + "'");
        n_response += spec.role == ColumnSpec::Role::response ? 1 : 0;
        n_predictors += spec.role == ColumnSpec::Role::predictor ? 1 : 0;
        schema.push_back(std::move(spec));
    }
    if (n_response > 1) throw schema_error("schema declares more than one response");
    if (n_predictors == 0) throw schema_error("schema declares no predictors");
    return schema;
}

Dataset load_csv(const std::string& path, const std::vector<ColumnSpec>& schema) {
    std::ifstream in = open_or_throw(path);
    std::string line;
    if (!std::getline(in, line)) throw data_error(path + " is empty");
    const std::vector<std::string> header = split_line(line);

    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t k = 0; k < header.size(); ++k) position[header[k]] = k;

    // Resolve schema columns against the header.
    struct Bound {
        const ColumnSpec* spec;
        std::size_t field;
    };
    std::vector<Bound> predictors;
    const ColumnSpec* response_spec = nullptr;
    std::size_t response_field = 0;
    bool have_response = false;
    for (const ColumnSpec& spec : schema) {
        if (spec.role == ColumnSpec::Role::ignore) continue;
        const auto it = position.find(spec.name);
        if (spec.role == ColumnSpec::Role::predictor) {
            if (it == position.end())
                throw schema_error("predictor column '" + spec.name + "' not in " + path);
            predictors.push_back(Bound{&spec, it->second});
        } else {
            response_spec = &spec;
            if (it != position.end()) {
                have_response = true;
                response_field = it->second;
            }
        }
    }

    std::vector<std::vector<double>> values(predictors.size());
    std::vector<double> response;
    long row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const std::vector<std::string> fields = split_line(line);
        if (fields.size() != header.size())
            throw parse_error("expected " + std::to_string(header.size()) +
                                  " fields, found " + std::to_string(fields.size()),
                              row, "row");
        for (std::size_t k = 0; k < predictors.size(); ++k) {
            const std::string& cell = fields[predictors[k].field];
            const std::string& name = predictors[k].spec->name;
            if (is_missing(cell))
                throw missing_value_error("missing value in row " + std::to_string(row) +
                                          ", column " + name);
            values[k].push_back(parse_cell(cell, row, name));
        }
        if (have_response) {
            const std::string& cell = fields[response_field];
            if (is_missing(cell))
                throw missing_value_error("missing value in row " + std::to_string(row) +
                                          ", column " + response_spec->name);
            response.push_back(parse_cell(cell, row, response_spec->name));
        }
    }
    if (row == 0) throw data_error(path + " has no data rows");

    std::vector<Column> columns;
    columns.reserve(predictors.size());
    for (std::size_t k = 0; k < predictors.size(); ++k) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(values[k].size()));
        for (std::size_t i = 0; i < values[k].size(); ++i)
            v[static_cast<Eigen::Index>(i)] = values[k][i];
        columns.push_back(Column{predictors[k].spec->name, predictors[k].spec->scale, v});
    }
    if (have_response) {
        Eigen::VectorXd y(static_cast<Eigen::Index>(response.size()));
        for (std::size_t i = 0; i < response.size(); ++i)
            y[static_cast<Eigen::Index>(i)] = response[i];
        return Dataset(std::move(columns), response_spec->name, y);
    }
    return Dataset(std::move(columns));
}

long count_csv_rows(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    std::string line;
    if (!std::getline(in, line)) throw data_error(path + " is empty");
    long rows = 0;
    while (std::getline(in, line))
        if (!trim(line).empty()) ++rows;
    return rows;
}

}  // namespace tsvc
