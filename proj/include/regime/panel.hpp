#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace regime {

/// Calendar date, read and written as ISO-8601 (YYYY-MM-DD).
class Date {
public:
    Date() = default;
    explicit Date(std::chrono::year_month_day ymd);

    static Date parse(std::string_view text);
    std::string iso() const;
    std::chrono::year_month_day ymd() const noexcept { return ymd_; }

    friend auto operator<=>(const Date&, const Date&) = default;

private:
    std::chrono::year_month_day ymd_{std::chrono::year{1970}, std::chrono::month{1},
                                     std::chrono::day{1}};
};

/// `count` consecutive weekdays starting at `first` (moved forward if it falls on a weekend).
std::vector<Date> business_days(Date first, std::size_t count);

/// Dated matrix of aligned numeric series, one column per label.
///
/// Rows are trading days in strictly increasing date order; no missing values.
struct Panel {
    std::vector<Date> dates;
    std::vector<std::string> labels;
    Eigen::MatrixXd values;  // dates.size() x labels.size()

    std::size_t rows() const noexcept { return dates.size(); }
    std::size_t cols() const noexcept { return labels.size(); }

    /// Column position of `label`; throws ValidationError when absent.
    std::size_t column(std::string_view label) const;

    /// Checks shape, date order, label uniqueness and finiteness.
    void validate() const;

    bool operator==(const Panel& other) const;
};

using ReturnPanel = Panel;
using ResidualPanel = Panel;

}  // namespace regime
