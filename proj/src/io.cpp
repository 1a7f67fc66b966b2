#include <regime/io.hpp>

#include <regime/error.hpp>

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string_view>

namespace regime {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.emplace_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

/// Non-comment, non-blank CSV records with their 1-based line numbers.
class CsvReader {
public:
    CsvReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

    bool next(std::vector<std::string>& fields) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            const auto t = trim(line);
            if (t.empty() || t.front() == '#') {
                continue;
            }
            fields = split(t);
            return true;
        }
        return false;
    }

    std::size_t line() const noexcept { return line_no_; }

    ValidationError error(const std::string& what) const {
        return ValidationError(fmt::format("{}:{}: {}", source_, line_no_, what));
    }

    double number(const std::string& field, const char* what) const {
        if (field.empty() || field == "NA" || field == "NaN" || field == "nan") {
            throw error(fmt::format("missing value for {}", what));
        }
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
            throw error(fmt::format("'{}' is not a finite number ({})", field, what));
        }
        return v;
    }

    int integer(const std::string& field, const char* what) const {
        int v = 0;
        const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
            throw error(fmt::format("'{}' is not an integer ({})", field, what));
        }
        return v;
    }

    const std::string& source() const noexcept { return source_; }

private:
    std::istream& in_;
    std::string source_;
    std::size_t line_no_ = 0;
};

std::ifstream open(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError(fmt::format("cannot open '{}'", path.string()));
    }
    return in;
}

void schema_comment(std::ostream& out) {
    out << "# schema_version: " << kSchemaVersion << '\n';
}

Date parse_date(const CsvReader& csv, const std::string& field) {
    try {
        return Date::parse(field);
    } catch (const ValidationError& e) {
        throw csv.error(e.what());
    }
}

}  // namespace

std::string format_double(double v) {
    return fmt::format("{}", v);
}

ReturnPanel read_return_panel(std::istream& in, const std::string& source) {
    CsvReader csv(in, source);
    std::vector<std::string> fields;
    if (!csv.next(fields)) {
        throw ValidationError(fmt::format("{}: no data", source));
    }
    if (fields.size() < 2 || fields[0] != "date") {
        throw csv.error("header must be 'date,<label>,...'");
    }
    ReturnPanel panel;
    panel.labels.assign(fields.begin() + 1, fields.end());
    std::set<std::string> seen;
    for (const auto& l : panel.labels) {
        if (l.empty() || !seen.insert(l).second) {
            throw csv.error(fmt::format("empty or duplicate column label '{}'", l));
        }
    }

    std::vector<std::vector<double>> rows;
    while (csv.next(fields)) {
        if (fields.size() != panel.labels.size() + 1) {
            throw csv.error(fmt::format("expected {} fields, found {}", panel.labels.size() + 1,
                                        fields.size()));
        }
        const Date d = parse_date(csv, fields[0]);
        if (!panel.dates.empty() && !(panel.dates.back() < d)) {
            throw csv.error(fmt::format("date {} does not follow {}", d.iso(),
                                        panel.dates.back().iso()));
        }
        panel.dates.push_back(d);
        std::vector<double> row(panel.labels.size());
        for (std::size_t j = 0; j < row.size(); ++j) {
            row[j] = csv.number(fields[j + 1], panel.labels[j].c_str());
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw ValidationError(fmt::format("{}: no data rows", source));
    }
    panel.values.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(panel.labels.size()));
    for (std::size_t t = 0; t < rows.size(); ++t) {
        for (std::size_t j = 0; j < rows[t].size(); ++j) {
            panel.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = rows[t][j];
        }
    }
    return panel;
}

ReturnPanel load_return_panel(const std::filesystem::path& path) {
    auto in = open(path);
    return read_return_panel(in, path.string());
}

void write_panel_csv(std::ostream& out, const Panel& panel) {
    schema_comment(out);
    out << "date";
    for (const auto& l : panel.labels) {
        out << ',' << l;
    }
    out << '\n';
    for (std::size_t t = 0; t < panel.rows(); ++t) {
        out << panel.dates[t].iso();
        for (std::size_t j = 0; j < panel.cols(); ++j) {
            out << ','
                << format_double(
                       panel.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)));
        }
        out << '\n';
    }
}

FactorPanel read_factor_panel(std::istream& in, const std::string& source) {
    const ReturnPanel raw = read_return_panel(in, source);
    FactorPanel f;
    f.dates = raw.dates;
    auto take = [&](const char* name) -> Eigen::VectorXd {
        try {
            return raw.values.col(static_cast<Eigen::Index>(raw.column(name)));
        } catch (const ValidationError&) {
            throw ValidationError(fmt::format("{}: missing factor column '{}'", source, name));
        }
    };
    f.x_us = take("x_us");
    f.x_eu = take("x_eu");
    f.delta_us = take("delta_us");
    f.delta_eu = take("delta_eu");
    return f;
}

FactorPanel load_factor_panel(const std::filesystem::path& path) {
    auto in = open(path);
    return read_factor_panel(in, path.string());
}

void write_factor_csv(std::ostream& out, const FactorPanel& f) {
    Panel p;
    p.dates = f.dates;
    p.labels = {"x_us", "x_eu", "delta_us", "delta_eu"};
    p.values.resize(static_cast<Eigen::Index>(f.size()), 4);
    p.values << f.x_us, f.x_eu, f.delta_us, f.delta_eu;
    write_panel_csv(out, p);
}

FirmCohort read_firm_csv(std::istream& in, const std::string& source) {
    CsvReader csv(in, source);
    std::vector<std::string> fields;
    if (!csv.next(fields)) {
        throw ValidationError(fmt::format("{}: no data", source));
    }
    if (fields != std::vector<std::string>{"firm_id", "year", "value"}) {
        throw csv.error("header must be 'firm_id,year,value'");
    }

    std::map<std::string, std::map<int, double>> by_firm;
    std::map<std::pair<std::string, int>, std::size_t> first_line;
    while (csv.next(fields)) {
        if (fields.size() != 3) {
            throw csv.error(fmt::format("expected 3 fields, found {}", fields.size()));
        }
        if (fields[0].empty()) {
            throw csv.error("empty firm_id");
        }
        const int year = csv.integer(fields[1], "year");
        const double value = csv.number(fields[2], "value");
        const auto key = std::make_pair(fields[0], year);
        if (const auto it = first_line.find(key); it != first_line.end()) {
            throw csv.error(fmt::format("duplicate row for firm '{}' year {} (first seen on line {})",
                                        fields[0], year, it->second));
        }
        first_line.emplace(key, csv.line());
        by_firm[fields[0]][year] = value;
    }
    if (by_firm.empty()) {
        throw ValidationError(fmt::format("{}: no data rows", source));
    }

    std::set<int> years;
    for (const auto& [id, obs] : by_firm) {
        for (const auto& [year, v] : obs) {
            years.insert(year);
        }
    }
    FirmCohort cohort;
    cohort.years.assign(years.begin(), years.end());
    std::map<int, int> grid;
    for (std::size_t k = 0; k < cohort.years.size(); ++k) {
        grid[cohort.years[k]] = static_cast<int>(k) + 1;
    }
    for (auto& [id, obs] : by_firm) {
        FirmSeries f;
        f.firm_id = id;
        for (const auto& [year, v] : obs) {
            f.times.push_back(grid.at(year));
            f.values.push_back(v);
        }
        cohort.firms.push_back(std::move(f));
    }
    return cohort;
}

FirmCohort load_firm_csv(const std::filesystem::path& path) {
    auto in = open(path);
    return read_firm_csv(in, path.string());
}

void write_firm_csv(std::ostream& out, const FirmCohort& cohort) {
    schema_comment(out);
    out << "firm_id,year,value\n";
    for (const auto& f : cohort.firms) {
        for (std::size_t t = 0; t < f.size(); ++t) {
            out << f.firm_id << ',' << cohort.years.at(static_cast<std::size_t>(f.times[t] - 1))
                << ',' << format_double(f.values[t]) << '\n';
        }
    }
}

void write_snapshots_jsonl(std::ostream& out, const std::vector<GraphSnapshot>& snapshots) {
    for (const auto& s : snapshots) {
        nlohmann::ordered_json j;
        j["schema_version"] = kSchemaVersion;
        j["window_index"] = s.window_index;
        j["window_start"] = s.window_start.iso();
        const auto p = s.adjacency.rows();
        std::vector<int> adj;
        std::vector<double> sigma;
        adj.reserve(static_cast<std::size_t>(p * p));
        sigma.reserve(static_cast<std::size_t>(p * p));
        for (Eigen::Index a = 0; a < p; ++a) {
            for (Eigen::Index b = 0; b < p; ++b) {
                adj.push_back(s.adjacency(a, b));
                sigma.push_back(s.sigma(a, b));
            }
        }
        std::vector<std::string> labels;
        for (const auto& nb : s.neighborhoods) {
            labels.push_back(nb.label);
        }
        j["labels"] = labels;
        j["adjacency"] = adj;
        j["sigma"] = sigma;
        j["pvalue"] = s.empty_graph.pvalue;
        j["statistic"] = s.empty_graph.statistic;
        j["eigen_shift"] = s.eigen_shift;
        out << j.dump() << '\n';
    }
}

void write_window_series_csv(std::ostream& out, const std::vector<GraphSnapshot>& snapshots,
                             const std::vector<SeriesColumn>& series) {
    schema_comment(out);
    out << "window_start,node_or_pair,value\n";
    for (const auto& col : series) {
        if (col.values.size() != snapshots.size()) {
            throw ValidationError(fmt::format("series '{}' has {} values for {} windows", col.name,
                                              col.values.size(), snapshots.size()));
        }
        for (std::size_t w = 0; w < snapshots.size(); ++w) {
            out << snapshots[w].window_start.iso() << ',' << col.name << ','
                << format_double(col.values[w]) << '\n';
        }
    }
}

void write_posterior_csv(std::ostream& out, const std::vector<ChangepointPosterior>& posteriors) {
    schema_comment(out);
    out << "firm_id,k,probability\n";
    for (const auto& p : posteriors) {
        for (std::size_t k = 0; k < p.probs.size(); ++k) {
            out << p.firm_id << ',' << k << ',' << format_double(p.probs[k]) << '\n';
        }
    }
}

void write_omega_csv(std::ostream& out, const std::vector<double>& omega_mean,
                     const std::vector<int>& years) {
    schema_comment(out);
    out << "k,year,omega_mean\n";
    const std::size_t n = omega_mean.empty() ? 0 : omega_mean.size() - 1;
    for (std::size_t k = 0; k < omega_mean.size(); ++k) {
        out << k << ',';
        if (k > 0 && k < n && k - 1 < years.size()) {
            out << years[k - 1];
        }
        out << ',' << format_double(omega_mean[k]) << '\n';
    }
}

}  // namespace regime
