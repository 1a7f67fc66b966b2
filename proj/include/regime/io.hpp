#pragma once

#include <regime/changepoint.hpp>
#include <regime/factor_model.hpp>
#include <regime/graph_select.hpp>
#include <regime/panel.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace regime {

/// Version stamped into every artifact this library writes.
inline constexpr int kSchemaVersion = 1;

// CSV conventions: comma separated, first non-comment line is the header,
// lines starting with '#' are comments. Written CSVs start with a
// "# schema_version: N" comment.

/// Wide CSV: `date,<label>,...`, one row per trading day.
ReturnPanel load_return_panel(const std::filesystem::path& path);
ReturnPanel read_return_panel(std::istream& in, const std::string& source = "<stream>");
void write_panel_csv(std::ostream& out, const Panel& panel);

/// CSV with columns date,x_us,x_eu,delta_us,delta_eu (any order).
FactorPanel load_factor_panel(const std::filesystem::path& path);
FactorPanel read_factor_panel(std::istream& in, const std::string& source = "<stream>");
void write_factor_csv(std::ostream& out, const FactorPanel& factors);

/// Long CSV `firm_id,year,value`; gaps allowed, (firm, year) pairs unique.
/// The grid is the sorted union of years; firms are ordered by id.
FirmCohort load_firm_csv(const std::filesystem::path& path);
FirmCohort read_firm_csv(std::istream& in, const std::string& source = "<stream>");
void write_firm_csv(std::ostream& out, const FirmCohort& cohort);

/// One JSON object per window: window_start, adjacency, sigma, pvalue and friends.
void write_snapshots_jsonl(std::ostream& out, const std::vector<GraphSnapshot>& snapshots);

/// Long CSV `window_start,node_or_pair,value`.
struct SeriesColumn {
    std::string name;
    std::vector<double> values;
};
void write_window_series_csv(std::ostream& out, const std::vector<GraphSnapshot>& snapshots,
                             const std::vector<SeriesColumn>& series);

/// `firm_id,k,probability` for every firm and hypothesis.
void write_posterior_csv(std::ostream& out, const std::vector<ChangepointPosterior>& posteriors);

/// `k,year,omega_mean`; year is blank for the no-split hypotheses 0 and n.
void write_omega_csv(std::ostream& out, const std::vector<double>& omega_mean,
                     const std::vector<int>& years);

/// Shortest representation that reads back to the same double.
std::string format_double(double v);

}  // namespace regime
