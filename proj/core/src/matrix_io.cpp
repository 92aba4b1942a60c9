#include "opshrink/matrix_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <vector>

#include "opshrink/errors.hpp"

namespace opshrink {

namespace {

std::string context(const std::filesystem::path& path) { return path.string() + ": "; }

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_real(std::string_view token, const std::filesystem::path& path, std::size_t line) {
    token = trim(token);
    if (!token.empty() && token.front() == '+') {
        token.remove_prefix(1);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty()) {
        throw FormatError(context(path) + "line " + std::to_string(line) + ": cannot parse '" +
                          std::string(token) + "' as a number");
    }
    return value;
}

void put_u32(std::array<unsigned char, kBinaryHeaderBytes>& buf, std::size_t at, std::uint32_t v) {
    for (std::size_t i = 0; i < 4; ++i) {
        buf[at + i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFFu);
    }
}

std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    }
    return v;
}

void put_f64(unsigned char* out, double value) {
    const auto bits = std::bit_cast<std::uint64_t>(value);
    for (std::size_t i = 0; i < 8; ++i) {
        out[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFFu);
    }
}

double get_f64(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < 8; ++i) {
        bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    }
    return std::bit_cast<double>(bits);
}

} // namespace

MatrixFormat parse_matrix_format(std::string_view name) {
    if (name == "csv") {
        return MatrixFormat::Csv;
    }
    if (name == "bin") {
        return MatrixFormat::Binary;
    }
    throw ConfigError("unknown matrix format '" + std::string(name) + "' (expected csv or bin)");
}

std::string format_real(double value) {
    std::array<char, 40> buf{};
    const int len = std::snprintf(buf.data(), buf.size(), "%.17g", value);
    return std::string(buf.data(), static_cast<std::size_t>(len));
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path, bool has_header) {
    std::ifstream in(path);
    if (!in) {
        throw IoError(context(path) + "cannot open for reading");
    }
    std::vector<double> values;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::size_t line_no = 0;
    bool header_pending = has_header;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = trim(line);
        if (view.empty()) {
            continue;
        }
        if (header_pending) {
            header_pending = false;
            continue;
        }
        std::size_t count = 0;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = view.find(',', start);
            const std::string_view token =
                view.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
            values.push_back(parse_real(token, path, line_no));
            ++count;
            if (comma == std::string_view::npos) {
                break;
            }
            start = comma + 1;
        }
        if (rows == 0) {
            cols = count;
        } else if (count != cols) {
            throw FormatError(context(path) + "line " + std::to_string(line_no) + " has " +
                              std::to_string(count) + " fields, expected " + std::to_string(cols));
        }
        ++rows;
    }
    if (in.bad()) {
        throw IoError(context(path) + "read failure");
    }
    if (rows == 0) {
        throw FormatError(context(path) + "no matrix rows");
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * cols + j];
        }
    }
    return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m, bool header) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(context(path) + "cannot open for writing");
    }
    if (header) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out << (j ? "," : "") << 'c' << (j + 1);
        }
        out << '\n';
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) {
                out << ',';
            }
            out << format_real(m(i, j));
        }
        out << '\n';
    }
    if (!out) {
        throw IoError(context(path) + "write failure");
    }
}

Eigen::MatrixXd read_matrix_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(context(path) + "cannot open for reading");
    }
    const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (in.bad()) {
        throw IoError(context(path) + "read failure");
    }
    if (bytes.size() < kBinaryHeaderBytes) {
        throw FormatError(context(path) + "truncated OPSK header");
    }
    if (!std::equal(kBinaryMagic.begin(), kBinaryMagic.end(), bytes.begin())) {
        throw FormatError(context(path) + "bad magic, not an OPSK file");
    }
    const std::uint32_t rows = get_u32(bytes.data() + 4);
    const std::uint32_t cols = get_u32(bytes.data() + 8);
    const std::uint64_t expected = kBinaryHeaderBytes + 8ull * rows * cols;
    if (bytes.size() != expected) {
        throw FormatError(context(path) + "payload size " + std::to_string(bytes.size()) +
                          " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    Eigen::MatrixXd m(rows, cols);
    const unsigned char* p = bytes.data() + kBinaryHeaderBytes;
    for (std::uint32_t i = 0; i < rows; ++i) {
        for (std::uint32_t j = 0; j < cols; ++j, p += 8) {
            m(i, j) = get_f64(p);
        }
    }
    return m;
}

void write_matrix_binary(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
    if (m.rows() > 0xFFFFFFFFll || m.cols() > 0xFFFFFFFFll) {
        throw UsageError("matrix too large for OPSK format");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(context(path) + "cannot open for writing");
    }
    std::array<unsigned char, kBinaryHeaderBytes> header{};
    std::copy(kBinaryMagic.begin(), kBinaryMagic.end(), header.begin());
    put_u32(header, 4, static_cast<std::uint32_t>(m.rows()));
    put_u32(header, 8, static_cast<std::uint32_t>(m.cols()));
    put_u32(header, 12, 0);
    out.write(reinterpret_cast<const char*>(header.data()), header.size());

    std::vector<unsigned char> row(static_cast<std::size_t>(m.cols()) * 8);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            put_f64(row.data() + 8 * j, m(i, j));
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!out) {
        throw IoError(context(path) + "write failure");
    }
}

Eigen::MatrixXd read_matrix(const std::filesystem::path& path, MatrixFormat format, bool csv_header) {
    return format == MatrixFormat::Csv ? read_matrix_csv(path, csv_header) : read_matrix_binary(path);
}

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m, MatrixFormat format,
                  bool csv_header) {
    if (format == MatrixFormat::Csv) {
        write_matrix_csv(path, m, csv_header);
    } else {
        write_matrix_binary(path, m);
    }
}

} // namespace opshrink
