#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace opshrink {

enum class MatrixFormat { Csv, Binary };

/// "csv" or "bin"; throws ConfigError otherwise.
MatrixFormat parse_matrix_format(std::string_view name);

/// CSV: one matrix row per line, comma-separated. With has_header the first
/// non-empty line is skipped. Throws IoError / FormatError.
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path, bool has_header = false);

/// Writes 17 significant digits per entry. With header, a "c1,...,cn" line
/// is written first.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m, bool header = false);

// OPSK binary layout, all little-endian:
//   bytes  0..3   magic "OPSK"
//   bytes  4..7   u32 rows
//   bytes  8..11  u32 cols
//   bytes 12..15  u32 reserved, written as 0, ignored on read
//   then rows*cols IEEE-754 binary64 values in row-major order.
inline constexpr std::string_view kBinaryMagic = "OPSK";
inline constexpr std::size_t kBinaryHeaderBytes = 16;

Eigen::MatrixXd read_matrix_binary(const std::filesystem::path& path);
void write_matrix_binary(const std::filesystem::path& path, const Eigen::MatrixXd& m);

Eigen::MatrixXd read_matrix(const std::filesystem::path& path, MatrixFormat format, bool csv_header = false);
void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m, MatrixFormat format,
                  bool csv_header = false);

/// Shortest-roundtrip-safe decimal form used by every text writer.
std::string format_real(double value);

} // namespace opshrink
