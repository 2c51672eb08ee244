#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "fjcal/series.hpp"

using namespace fjcal;

namespace {

std::string csv(std::initializer_list<const char*> rows) {
    std::string s = "date,close\n";
    for (const char* r : rows) s += std::string(r) + "\n";
    return s;
}

void expect_data_error(const std::string& text, const std::string& fragment, std::size_t row) {
    try {
        (void)parse_price_csv(text);
        FAIL() << "expected DataError containing '" << fragment << "'";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
        EXPECT_EQ(e.row(), row);
    }
}

}  // namespace

TEST(Date, ParsesAndValidatesCalendar) {
    EXPECT_EQ(Date::parse("2016-04-29"), (Date{2016, 4, 29}));
    EXPECT_EQ(Date::parse("2016-02-29").iso(), "2016-02-29");
    EXPECT_THROW((void)Date::parse("2015-02-29"), std::invalid_argument);
    EXPECT_THROW((void)Date::parse("2015-13-01"), std::invalid_argument);
    EXPECT_THROW((void)Date::parse("2015/01/01"), std::invalid_argument);
}

TEST(PriceCsv, MinimalValidFile) {
    const auto p = parse_price_csv(csv({"2020-01-01,100", "2020-01-02,110"}));
    ASSERT_EQ(p.size(), 2u);
    EXPECT_DOUBLE_EQ(p.closes()[1], 110.0);
}

TEST(PriceCsv, RejectsNegativeCloseNamingRow) {
    expect_data_error(csv({"2020-01-01,100", "2020-01-02,-5", "2020-01-03,101"}), "row 2", 2);
}

TEST(PriceCsv, RejectsZeroAndNonNumericCloses) {
    expect_data_error(csv({"2020-01-01,100", "2020-01-02,0"}), "close must be positive", 2);
    expect_data_error(csv({"2020-01-01,abc", "2020-01-02,1"}), "non-numeric close", 1);
}

TEST(PriceCsv, RejectsDuplicatedDate) {
    expect_data_error(csv({"2020-01-01,100", "2020-01-01,101"}), "non-increasing dates", 2);
    expect_data_error(csv({"2020-01-02,100", "2020-01-01,101"}), "non-increasing dates", 2);
}

TEST(PriceCsv, RejectsMalformedRowsAndShortFiles) {
    expect_data_error(csv({"2020-01-01,100,7", "2020-01-02,101"}), "expected exactly two fields", 1);
    expect_data_error(csv({"2020-01-01,100"}), "fewer than 2 valid rows", 0);
    expect_data_error("", "empty price file", 0);
    expect_data_error("2020-01-01,100\n2020-01-02,101\n", "header", 0);
}

TEST(PriceCsv, CommentsAndBlankLinesAreIgnored) {
    const auto p = parse_price_csv("# source: test\ndate,close\n2020-01-01,100\n\n# mid\n2020-01-02,101\n");
    EXPECT_EQ(p.size(), 2u);
}

TEST(PriceFile, MissingFileNamesPath) {
    try {
        (void)load_price_series("/nonexistent/prices.csv");
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("/nonexistent/prices.csv"), std::string::npos);
    }
}

TEST(PriceFile, RoundTripIsIdempotent) {
    const auto p = parse_price_csv(csv({"2020-01-01,100.125", "2020-01-02,99.5", "2020-01-06,101.0000001"}));
    const auto path = std::filesystem::temp_directory_path() / "fjcal_roundtrip.csv";
    {
        std::ofstream out(path);
        out << format_price_csv(p);
    }
    const auto q = load_price_series(path);
    EXPECT_EQ(p, q);
    EXPECT_EQ(format_price_csv(q), format_price_csv(p));
    std::filesystem::remove(path);
}

TEST(LogReturns, Examples) {
    auto r = log_returns(PriceSeries({{2020, 1, 1}, {2020, 1, 2}, {2020, 1, 3}}, {100, 100, 100}));
    EXPECT_EQ(r.size(), 2u);
    EXPECT_EQ(r[0], 0.0);
    EXPECT_EQ(r[1], 0.0);

    r = log_returns(PriceSeries({{2020, 1, 1}, {2020, 1, 2}}, {100, 100 * std::exp(1.0)}));
    EXPECT_NEAR(r[0], 1.0, 1e-15);

    r = log_returns(PriceSeries({{2020, 1, 1}, {2020, 1, 2}, {2020, 1, 3}}, {100, 110, 99}));
    EXPECT_NEAR(r[0], std::log(1.1), 1e-15);
    EXPECT_NEAR(r[1], std::log(0.9), 1e-15);
}

TEST(LogReturns, CumulativeSumRecoversCloses) {
    std::vector<Date> dates;
    std::vector<double> closes;
    double c = 57.3;
    for (int i = 0; i < 300; ++i) {
        dates.push_back({2000 + i / 12, 1 + i % 12, 1});
        closes.push_back(c);
        c *= std::exp(0.03 * std::sin(0.7 * i));
    }
    const PriceSeries p(dates, closes);
    const auto r = log_returns(p);
    double acc = 0;
    for (std::size_t i = 1; i < closes.size(); ++i) {
        acc += r[i - 1];
        EXPECT_NEAR(closes[0] * std::exp(acc) / closes[i], 1.0, 1e-12);
    }
}

TEST(ReturnCsv, SingleColumn) {
    const ReturnSeries r({0.5, -0.25});
    EXPECT_EQ(format_return_csv(r), "log_return\n0.5\n-0.25\n");
    EXPECT_THROW(ReturnSeries({1.0, NAN}), std::invalid_argument);
}
