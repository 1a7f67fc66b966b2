#include <regime/panel.hpp>

#include <regime/error.hpp>

#include <fmt/format.h>

#include <charconv>
#include <set>

namespace regime {

Date::Date(std::chrono::year_month_day ymd) : ymd_(ymd) {
    if (!ymd_.ok()) {
        throw ValidationError("invalid calendar date");
    }
}

Date Date::parse(std::string_view text) {
    auto bad = [&] { return ValidationError(fmt::format("'{}' is not an ISO-8601 date", text)); };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw bad();
    }
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    auto field = [&](std::size_t at, std::size_t len, auto& out) {
        const char* first = text.data() + at;
        const auto [ptr, ec] = std::from_chars(first, first + len, out);
        if (ec != std::errc{} || ptr != first + len) {
            throw bad();
        }
    };
    field(0, 4, y);
    field(5, 2, m);
    field(8, 2, d);
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}};
    if (!ymd.ok()) {
        throw bad();
    }
    return Date(ymd);
}

std::string Date::iso() const {
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd_.year()),
                       static_cast<unsigned>(ymd_.month()), static_cast<unsigned>(ymd_.day()));
}

std::vector<Date> business_days(Date first, std::size_t count) {
    using namespace std::chrono;
    std::vector<Date> out;
    out.reserve(count);
    sys_days day{first.ymd()};
    while (out.size() < count) {
        const weekday wd{day};
        if (wd != Saturday && wd != Sunday) {
            out.emplace_back(year_month_day{day});
        }
        day += days{1};
    }
    return out;
}

std::size_t Panel::column(std::string_view label) const {
    for (std::size_t j = 0; j < labels.size(); ++j) {
        if (labels[j] == label) {
            return j;
        }
    }
    throw ValidationError(fmt::format("unknown column label '{}'", label));
}

void Panel::validate() const {
    if (static_cast<std::size_t>(values.rows()) != dates.size() ||
        static_cast<std::size_t>(values.cols()) != labels.size()) {
        throw ValidationError(fmt::format("panel shape {}x{} does not match {} dates and {} labels",
                                          values.rows(), values.cols(), dates.size(),
                                          labels.size()));
    }
    for (std::size_t t = 1; t < dates.size(); ++t) {
        if (!(dates[t - 1] < dates[t])) {
            throw ValidationError(fmt::format("dates not strictly increasing at row {} ({})", t,
                                              dates[t].iso()));
        }
    }
    std::set<std::string> seen;
    for (const auto& l : labels) {
        if (!seen.insert(l).second) {
            throw ValidationError(fmt::format("duplicate column label '{}'", l));
        }
    }
    if (!values.allFinite()) {
        throw ValidationError("panel contains missing or non-finite values");
    }
}

bool Panel::operator==(const Panel& other) const {
    return dates == other.dates && labels == other.labels &&
           values.rows() == other.values.rows() && values.cols() == other.values.cols() &&
           values == other.values;
}

}  // namespace regime
