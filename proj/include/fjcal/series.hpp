#pragma once

#include <compare>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fjcal {

/// Calendar date as read from an ISO-8601 `YYYY-MM-DD` field.
struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    auto operator<=>(const Date&) const = default;

    /// Throws std::invalid_argument on anything that is not a valid calendar date.
    static Date parse(std::string_view text);
    [[nodiscard]] std::string iso() const;
};

/// Raised for malformed or invalid price files. `row()` is the 1-based data
/// row (header excluded), or 0 when the error is not tied to a row.
class DataError : public std::runtime_error {
public:
    DataError(const std::string& what, std::size_t row = 0) : std::runtime_error(what), row_(row) {}
    [[nodiscard]] std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

/// Daily closing prices. Invariants: at least two rows, strictly positive
/// closes, strictly increasing dates.
class PriceSeries {
public:
    PriceSeries(std::vector<Date> dates, std::vector<double> closes);

    [[nodiscard]] const std::vector<Date>& dates() const noexcept { return dates_; }
    [[nodiscard]] const std::vector<double>& closes() const noexcept { return closes_; }
    [[nodiscard]] std::size_t size() const noexcept { return closes_.size(); }

    bool operator==(const PriceSeries&) const = default;

private:
    std::vector<Date> dates_;
    std::vector<double> closes_;
};

/// Log returns; every value finite.
class ReturnSeries {
public:
    ReturnSeries() = default;
    explicit ReturnSeries(std::vector<double> values);

    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }

    bool operator==(const ReturnSeries&) const = default;

private:
    std::vector<double> values_;
};

/// Parses a `date,close` CSV with a header row. Lines starting with '#' are
/// treated as comments.
[[nodiscard]] PriceSeries parse_price_csv(std::string_view text);

/// Reads a price file from disk; a missing file raises DataError naming the path.
[[nodiscard]] PriceSeries load_price_series(const std::filesystem::path& path);

/// values[i] = ln(closes[i+1]) - ln(closes[i]).
[[nodiscard]] ReturnSeries log_returns(const PriceSeries& prices);

/// Serializes back to the `date,close` format accepted by parse_price_csv.
[[nodiscard]] std::string format_price_csv(const PriceSeries& prices);

/// Single-column `log_return` CSV for inspection.
[[nodiscard]] std::string format_return_csv(const ReturnSeries& returns);

}  // namespace fjcal
