#include "opshrink/curve_table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "opshrink/errors.hpp"
#include "opshrink/matrix_io.hpp"

namespace opshrink {

CurveTable::CurveTable(std::vector<std::string> columns) : columns_{std::move(columns)} {}

void CurveTable::add_row(std::vector<double> row) {
    if (row.size() != columns_.size()) {
        throw UsageError("curve table row has " + std::to_string(row.size()) + " values, expected " +
                         std::to_string(columns_.size()));
    }
    if (!std::all_of(row.begin(), row.end(), [](double v) { return std::isfinite(v); })) {
        throw DomainError("curve table entries must be finite");
    }
    rows_.push_back(std::move(row));
}

void CurveTable::add_metadata(std::string key, std::string value) {
    metadata_.emplace_back(std::move(key), std::move(value));
}

std::size_t CurveTable::column_index(const std::string& name) const {
    const auto it = std::find(columns_.begin(), columns_.end(), name);
    if (it == columns_.end()) {
        throw UsageError("no column named '" + name + "'");
    }
    return static_cast<std::size_t>(it - columns_.begin());
}

std::vector<double> CurveTable::column(const std::string& name) const {
    const std::size_t idx = column_index(name);
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& row : rows_) {
        out.push_back(row[idx]);
    }
    return out;
}

std::string format_curve_table(const CurveTable& table) {
    std::string out;
    for (const auto& [key, value] : table.metadata()) {
        out += "# " + key + ": " + value + "\n";
    }
    for (std::size_t j = 0; j < table.columns().size(); ++j) {
        out += (j ? "," : "") + table.columns()[j];
    }
    out += '\n';
    for (const auto& row : table.rows()) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) {
                out += ',';
            }
            out += format_real(row[j]);
        }
        out += '\n';
    }
    return out;
}

void write_curve_table(const CurveTable& table, const std::filesystem::path& path) {
    const std::string text = format_curve_table(table);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(path.string() + ": cannot open for writing");
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.close();
    if (!out) {
        throw IoError(path.string() + ": write failure");
    }
}

CurveTable read_curve_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError(path.string() + ": cannot open for reading");
    }
    CurveTable table;
    std::vector<std::pair<std::string, std::string>> metadata;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (line.rfind("# ", 0) == 0) {
            const auto colon = line.find(": ", 2);
            if (colon == std::string::npos) {
                throw FormatError(path.string() + ": malformed metadata line");
            }
            metadata.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            fields.push_back(field);
        }
        if (!have_header) {
            table = CurveTable(std::move(fields));
            have_header = true;
            continue;
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) {
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc{} || ptr != f.data() + f.size()) {
                throw FormatError(path.string() + ": cannot parse '" + f + "'");
            }
            row.push_back(v);
        }
        table.add_row(std::move(row));
    }
    if (!have_header) {
        throw FormatError(path.string() + ": missing header row");
    }
    for (auto& [k, v] : metadata) {
        table.add_metadata(std::move(k), std::move(v));
    }
    return table;
}

} // namespace opshrink
