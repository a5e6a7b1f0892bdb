#include "sera/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

#include "sera/errors.hpp"

namespace sera {

namespace {

// One CSV line -> cells. Supports double-quoted fields with "" escapes;
// no embedded newlines.
std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else if (c != '\r') {
            cell += c;
        }
    }
    if (quoted)
        throw ParseError("unterminated quote on line " + std::to_string(line_no));
    cells.push_back(std::move(cell));
    return cells;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + s.size();
}

} // namespace

Dataset load_csv(const std::filesystem::path& path, const std::string& target_column,
                 MissingPolicy on_missing) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open CSV file: " + path.string());

    std::string line;
    if (!std::getline(in, line) || trim(line).empty())
        throw ParseError("missing header row on line 1 of " + path.string());
    const std::vector<std::string> header = split_csv_line(line, 1);

    std::size_t target_col = header.size();
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string name = trim(header[c]);
        if (name == target_column) target_col = c;
        for (std::size_t c2 = c + 1; c2 < header.size(); ++c2)
            if (name == trim(header[c2]))
                throw ParseError("duplicate column name '" + name + "' on line 1");
    }
    if (target_col == header.size())
        throw ParseError("target column '" + target_column +
                         "' not found in header (line 1) of " + path.string());

    // Pass 1: read raw cells, drop or reject incomplete rows.
    std::vector<std::vector<std::string>> rows;
    std::size_t dropped = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split_csv_line(line, line_no);
        if (cells.size() != header.size())
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " cells, got " +
                             std::to_string(cells.size()));
        for (auto& cell : cells) cell = trim(cell);
        const bool incomplete =
            std::any_of(cells.begin(), cells.end(),
                        [](const std::string& s) { return s.empty(); });
        if (incomplete) {
            if (on_missing == MissingPolicy::Error)
                throw ParseError("line " + std::to_string(line_no) +
                                 ": empty cell (missing value)");
            ++dropped;
            continue;
        }
        rows.push_back(std::move(cells));
    }
    if (rows.empty()) throw ParseError("no data rows in " + path.string());

    // Column typing: numeric iff every cell parses as a finite double.
    const std::size_t n_cols = header.size();
    std::vector<bool> numeric(n_cols, true);
    for (std::size_t c = 0; c < n_cols; ++c) {
        for (const auto& row : rows) {
            double v;
            if (!parse_double(row[c], v)) {
                numeric[c] = false;
                break;
            }
        }
    }
    if (!numeric[target_col])
        throw ParseError("target column '" + target_column + "' is not numeric");

    Dataset ds;
    ds.dropped_rows = dropped;

    // Encoded column layout, original order, nominals expanded in place.
    std::vector<std::size_t> col_offset(n_cols, 0);
    for (std::size_t c = 0; c < n_cols; ++c) {
        if (c == target_col) continue;
        const std::string name = trim(header[c]);
        col_offset[c] = ds.feature_names.size();
        if (numeric[c]) {
            ds.feature_names.push_back(name);
            ++ds.n_numeric_features;
        } else {
            std::set<std::string> values;
            for (const auto& row : rows) values.insert(row[c]);
            auto& emitted = ds.nominal_map[name];
            for (const auto& v : values) {
                emitted.push_back(name + "=" + v);
                ds.feature_names.push_back(name + "=" + v);
            }
        }
    }
    {
        std::set<std::string> unique(ds.feature_names.begin(), ds.feature_names.end());
        if (unique.size() != ds.feature_names.size())
            throw ParseError("encoded column names are not unique");
    }

    ds.features = Matrix(rows.size(), ds.feature_names.size());
    ds.target.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < n_cols; ++c) {
            if (c == target_col) continue;
            if (numeric[c]) {
                double v;
                parse_double(rows[r][c], v);
                if (!std::isfinite(v))
                    throw ParseError("non-finite value in column '" + trim(header[c]) +
                                     "'");
                ds.features.at(r, col_offset[c]) = v;
            } else {
                const auto& emitted = ds.nominal_map[trim(header[c])];
                const std::string one_hot = trim(header[c]) + "=" + rows[r][c];
                const auto it = std::find(emitted.begin(), emitted.end(), one_hot);
                ds.features.at(r, col_offset[c] +
                                      static_cast<std::size_t>(it - emitted.begin())) =
                    1.0;
            }
        }
        double v;
        parse_double(rows[r][target_col], v);
        if (!std::isfinite(v)) throw ParseError("non-finite target value");
        ds.target.push_back(v);
    }
    return ds;
}

Dataset select_rows(const Dataset& dataset, std::span<const std::size_t> rows) {
    Dataset out;
    out.feature_names = dataset.feature_names;
    out.nominal_map = dataset.nominal_map;
    out.n_numeric_features = dataset.n_numeric_features;
    out.features = Matrix(rows.size(), dataset.features.cols);
    out.target.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t r = rows[i];
        if (r >= dataset.n_rows()) throw InvalidInput("select_rows: index out of range");
        for (std::size_t c = 0; c < dataset.features.cols; ++c)
            out.features.at(i, c) = dataset.features.at(r, c);
        out.target.push_back(dataset.target[r]);
    }
    return out;
}

} // namespace sera
