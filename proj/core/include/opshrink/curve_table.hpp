#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace opshrink {

/// Rectangular table of finite reals with named columns and free-form
/// key/value metadata.
class CurveTable {
public:
    CurveTable() = default;
    explicit CurveTable(std::vector<std::string> columns);

    const std::vector<std::string>& columns() const noexcept { return columns_; }
    const std::vector<std::vector<double>>& rows() const noexcept { return rows_; }
    const std::vector<std::pair<std::string, std::string>>& metadata() const noexcept { return metadata_; }

    /// Throws UsageError on width mismatch, DomainError on non-finite values.
    void add_row(std::vector<double> row);
    void add_metadata(std::string key, std::string value);

    /// Index of a named column; throws UsageError if absent.
    std::size_t column_index(const std::string& name) const;
    std::vector<double> column(const std::string& name) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
    std::vector<std::pair<std::string, std::string>> metadata_;
};

/// CSV text: "# key: value" metadata lines, a header row, then one line per
/// row with 17 significant digits per value. Output is a pure function of
/// the table.
std::string format_curve_table(const CurveTable& table);

/// Writes format_curve_table to path. Throws IoError with the path on failure.
void write_curve_table(const CurveTable& table, const std::filesystem::path& path);

/// Parses the format produced by format_curve_table.
CurveTable read_curve_table(const std::filesystem::path& path);

} // namespace opshrink
