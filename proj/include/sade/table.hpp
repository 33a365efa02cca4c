#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sade {

/// Shortest text that parses back to the same double ("inf", "-inf", "nan" for the specials).
std::string format_real(double v);
/// Fixed decimals for human-facing tables.
std::string format_fixed(double v, int decimals);
double parse_real(const std::string& text);
std::int64_t parse_int(const std::string& text);

/// Median of a non-empty sample; mean of the middle pair for even sizes.
double median(std::vector<double> v);

/// Comma-separated table with a header row. Fields holding commas, quotes or newlines are quoted.
class Table {
public:
    explicit Table(std::vector<std::string> header);

    void add(std::vector<std::string> row);
    std::size_t rows() const { return rows_.size(); }
    const std::vector<std::string>& header() const { return header_; }
    const std::vector<std::string>& row(std::size_t i) const { return rows_[i]; }
    std::size_t column(const std::string& name) const;
    const std::string& at(std::size_t row, const std::string& column_name) const;

    std::string to_csv() const;
    /// Writes through a temporary file and renames it into place.
    void save(const std::filesystem::path& path) const;
    static Table load(const std::filesystem::path& path);
    static Table parse(const std::string& text);

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace sade
