#include "fjcal/series.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fjcal {

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static constexpr int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return (m == 2 && is_leap(y)) ? 29 : days[m - 1];
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    s = trim(s);
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::string row_msg(std::size_t row, const std::string& what) {
    return "row " + std::to_string(row) + ": " + what;
}

}  // namespace

Date Date::parse(std::string_view text) {
    text = trim(text);
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw std::invalid_argument("expected YYYY-MM-DD, got '" + std::string(text) + "'");
    Date d;
    if (!parse_number(text.substr(0, 4), d.year) || !parse_number(text.substr(5, 2), d.month) ||
        !parse_number(text.substr(8, 2), d.day))
        throw std::invalid_argument("non-numeric date '" + std::string(text) + "'");
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month))
        throw std::invalid_argument("invalid calendar date '" + std::string(text) + "'");
    return d;
}

std::string Date::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

PriceSeries::PriceSeries(std::vector<Date> dates, std::vector<double> closes)
    : dates_(std::move(dates)), closes_(std::move(closes)) {
    if (dates_.size() != closes_.size()) throw DataError("dates and closes differ in length");
    if (closes_.size() < 2) throw DataError("fewer than 2 valid rows");
    for (std::size_t i = 0; i < closes_.size(); ++i) {
        if (!(closes_[i] > 0.0) || !std::isfinite(closes_[i]))
            throw DataError(row_msg(i + 1, "close must be positive and finite"), i + 1);
        if (i > 0 && !(dates_[i - 1] < dates_[i]))
            throw DataError(row_msg(i + 1, "non-increasing dates"), i + 1);
    }
}

ReturnSeries::ReturnSeries(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (!std::isfinite(values_[i]))
            throw std::invalid_argument("non-finite return at index " + std::to_string(i));
}

PriceSeries parse_price_csv(std::string_view text) {
    std::vector<Date> dates;
    std::vector<double> closes;
    bool header_seen = false;
    std::size_t row = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        if (line.empty() || line.front() == '#') {
            if (end == text.size()) break;
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            if (line.find("date") == std::string_view::npos || line.find("close") == std::string_view::npos)
                throw DataError("missing header row 'date,close'");
            continue;
        }
        ++row;
        auto comma = line.find(',');
        if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos)
            throw DataError(row_msg(row, "expected exactly two fields"), row);
        Date d;
        try {
            d = Date::parse(line.substr(0, comma));
        } catch (const std::invalid_argument& e) {
            throw DataError(row_msg(row, e.what()), row);
        }
        double close = 0.0;
        if (!parse_number(line.substr(comma + 1), close))
            throw DataError(row_msg(row, "non-numeric close"), row);
        if (!(close > 0.0) || !std::isfinite(close))
            throw DataError(row_msg(row, "close must be positive, got " + std::string(trim(line.substr(comma + 1)))),
                            row);
        if (!dates.empty() && !(dates.back() < d)) throw DataError(row_msg(row, "non-increasing dates"), row);
        dates.push_back(d);
        closes.push_back(close);
        if (end == text.size()) break;
    }
    if (!header_seen) throw DataError("empty price file");
    if (closes.size() < 2) throw DataError("fewer than 2 valid rows");
    return PriceSeries(std::move(dates), std::move(closes));
}

PriceSeries load_price_series(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open price file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_price_csv(buf.str());
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what(), e.row());
    }
}

ReturnSeries log_returns(const PriceSeries& prices) {
    const auto& c = prices.closes();
    std::vector<double> r(c.size() - 1);
    for (std::size_t i = 0; i + 1 < c.size(); ++i) r[i] = std::log(c[i + 1]) - std::log(c[i]);
    return ReturnSeries(std::move(r));
}

std::string format_price_csv(const PriceSeries& prices) {
    std::string out = "date,close\n";
    char buf[64];
    for (std::size_t i = 0; i < prices.size(); ++i) {
        std::snprintf(buf, sizeof buf, ",%.17g\n", prices.closes()[i]);
        out += prices.dates()[i].iso();
        out += buf;
    }
    return out;
}

std::string format_return_csv(const ReturnSeries& returns) {
    std::string out = "log_return\n";
    char buf[40];
    for (double v : returns.values()) {
        std::snprintf(buf, sizeof buf, "%.17g\n", v);
        out += buf;
    }
    return out;
}

}  // namespace fjcal
