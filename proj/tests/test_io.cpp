#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include <regime/io.hpp>
#include <regime/simulate.hpp>

#include <json.hpp>

#include <sstream>

using namespace regime;

namespace {

const std::filesystem::path kData = REGIME_TEST_DATA;

std::string error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

bool contains(const std::string& s, const std::string& part) {
    return s.find(part) != std::string::npos;
}

}  // namespace

TEST_CASE("dates") {
    const auto d = Date::parse("2008-09-15");
    CHECK(d.iso() == "2008-09-15");
    CHECK(Date::parse("2008-09-14") < d);
    CHECK_THROWS_AS(Date::parse("2008-02-30"), ValidationError);
    CHECK_THROWS_AS(Date::parse("15/09/2008"), ValidationError);
    const auto days = business_days(Date::parse("2010-05-07"), 3);
    CHECK(days[0].iso() == "2010-05-07");
    CHECK(days[1].iso() == "2010-05-10");
    CHECK(days[2].iso() == "2010-05-11");
    CHECK(business_days(Date::parse("2010-05-08"), 1)[0].iso() == "2010-05-10");
}

TEST_CASE("golden return panel has the known dimensions") {
    const auto p = load_return_panel(kData / "returns_small.csv");
    CHECK(p.rows() == 6);
    CHECK(p.cols() == 3);
    CHECK(p.labels == std::vector<std::string>{"DEU", "ITA", "ESP"});
    CHECK(p.dates.front().iso() == "2010-05-03");
    CHECK(p.dates.back().iso() == "2010-05-10");
    CHECK(p.values(4, 1) == -0.0412);
    CHECK(p.column("ESP") == 2);
    CHECK_THROWS_AS(p.column("FRA"), ValidationError);
}

TEST_CASE("return panel rejections") {
    CHECK(contains(error_of([] {
                       std::istringstream in("");
                       read_return_panel(in, "empty.csv");
                   }),
                   "no data"));
    CHECK(contains(error_of([] {
                       std::istringstream in("# only a comment\n\n");
                       read_return_panel(in, "c.csv");
                   }),
                   "no data"));
    CHECK(contains(error_of([] {
                       std::istringstream in("date,A\n");
                       read_return_panel(in, "h.csv");
                   }),
                   "no data rows"));
    CHECK(contains(error_of([] {
                       std::istringstream in("date,A,B\n2010-01-04,1,2\n2010-01-05,1\n");
                       read_return_panel(in, "r.csv");
                   }),
                   "r.csv:3:"));
    CHECK(contains(error_of([] {
                       std::istringstream in("date,A\n2010-01-05,1\n2010-01-04,2\n");
                       read_return_panel(in, "m.csv");
                   }),
                   "m.csv:3:"));
    CHECK(contains(error_of([] {
                       std::istringstream in("date,A\n2010-01-04,1\n2010-01-04,2\n");
                       read_return_panel(in, "d.csv");
                   }),
                   "does not follow"));
    CHECK(contains(error_of([] {
                       std::istringstream in("date,A,B\n2010-01-04,1,NA\n");
                       read_return_panel(in, "na.csv");
                   }),
                   "missing value"));
    CHECK(contains(error_of([] {
                       std::istringstream in("date,A,B\n2010-01-04,1,\n");
                       read_return_panel(in, "blank.csv");
                   }),
                   "missing value"));
    CHECK(contains(error_of([] {
                       std::istringstream in("date,A,B\n2010-01-04,1,x\n");
                       read_return_panel(in, "x.csv");
                   }),
                   "x.csv:2:"));
    CHECK(contains(error_of([] {
                       std::istringstream in("day,A\n2010-01-04,1\n");
                       read_return_panel(in, "hdr.csv");
                   }),
                   "header"));
    CHECK(contains(error_of([] {
                       std::istringstream in("date,A,A\n2010-01-04,1,2\n");
                       read_return_panel(in, "dup.csv");
                   }),
                   "duplicate"));
    CHECK_THROWS_AS(load_return_panel(kData / "does_not_exist.csv"), ValidationError);
}

TEST_CASE("return panel round-trips") {
    const auto sim = simulate_contagion(regime_flip_spec(40, 20), 3);
    std::stringstream buf;
    write_panel_csv(buf, sim.returns);
    CHECK(buf.str().rfind("# schema_version: 1\n", 0) == 0);
    const auto back = read_return_panel(buf);
    CHECK(back == sim.returns);

    const auto golden = load_return_panel(kData / "returns_small.csv");
    std::stringstream buf2;
    write_panel_csv(buf2, golden);
    CHECK(read_return_panel(buf2) == golden);
}

TEST_CASE("factor panel round-trips and requires its columns") {
    auto spec = regime_flip_spec(30, 15);
    spec.factor_structure = true;
    const auto sim = simulate_contagion(spec, 4);
    std::stringstream buf;
    write_factor_csv(buf, *sim.factors);
    const auto back = read_factor_panel(buf);
    CHECK(back.dates == sim.factors->dates);
    CHECK(back.x_us == sim.factors->x_us);
    CHECK(back.delta_eu == sim.factors->delta_eu);

    std::istringstream reordered("date,delta_eu,x_eu,delta_us,x_us\n2010-01-04,1,2,3,4\n");
    const auto r = read_factor_panel(reordered);
    CHECK(r.x_us(0) == 4.0);
    CHECK(r.delta_eu(0) == 1.0);
    std::istringstream missing("date,x_us,x_eu,delta_us\n2010-01-04,1,2,3\n");
    CHECK(contains(error_of([&] { read_factor_panel(missing, "f.csv"); }), "delta_eu"));
}

TEST_CASE("golden firm file") {
    const auto c = load_firm_csv(kData / "firms_small.csv");
    CHECK(c.years == std::vector<int>{1990, 1991, 1992, 1995});
    CHECK(c.n() == 4);
    REQUIRE(c.firms.size() == 3);
    CHECK(c.firms[0].firm_id == "A03");
    CHECK(c.firms[0].times == std::vector<int>{2, 3, 4});
    CHECK(c.firms[0].values == std::vector<double>{-0.05, 0.02, 0.40});
    CHECK(c.firms[1].firm_id == "B17");
    CHECK(c.firms[1].times == std::vector<int>{1, 3});
    CHECK(c.firms[2].size() == 1);
}

TEST_CASE("firm file rejections") {
    const auto dup = error_of([] {
        std::istringstream in("firm_id,year,value\nA,2000,1\nB,2000,2\nA,2000,3\n");
        read_firm_csv(in, "dup.csv");
    });
    CHECK(contains(dup, "dup.csv:4:"));
    CHECK(contains(dup, "first seen on line 2"));
    CHECK(contains(error_of([] {
                       std::istringstream in("");
                       read_firm_csv(in, "e.csv");
                   }),
                   "no data"));
    CHECK(contains(error_of([] {
                       std::istringstream in("firm_id,year,value\nA,20x0,1\n");
                       read_firm_csv(in, "y.csv");
                   }),
                   "y.csv:2:"));
    CHECK(contains(error_of([] {
                       std::istringstream in("firm_id,year,value\nA,2000\n");
                       read_firm_csv(in, "f.csv");
                   }),
                   "expected 3 fields"));
    CHECK(contains(error_of([] {
                       std::istringstream in("firm,year,value\nA,2000,1\n");
                       read_firm_csv(in, "h.csv");
                   }),
                   "header"));
}

TEST_CASE("firm file round-trips") {
    FirmSimSpec spec;
    spec.firms = 30;
    spec.missing_rate = 0.3;
    const auto sim = simulate_firms(spec, 5);
    std::stringstream buf;
    write_firm_csv(buf, sim.cohort);
    const auto back = read_firm_csv(buf);
    CHECK(back.years == sim.cohort.years);
    REQUIRE(back.firms.size() == sim.cohort.firms.size());
    for (std::size_t i = 0; i < back.firms.size(); ++i) {
        CHECK(back.firms[i].firm_id == sim.cohort.firms[i].firm_id);
        CHECK(back.firms[i].times == sim.cohort.firms[i].times);
        CHECK(back.firms[i].values == sim.cohort.firms[i].values);
    }
}

TEST_CASE("snapshot JSON lines") {
    const auto sim = simulate_contagion(regime_flip_spec(170, 85), 6);
    const auto snaps = rolling_graphs(sim.noise, {150, 10});
    std::stringstream buf;
    write_snapshots_jsonl(buf, snaps);
    std::string line;
    std::size_t count = 0;
    while (std::getline(buf, line)) {
        const auto j = nlohmann::json::parse(line);
        const auto& s = snaps[count];
        CHECK(j["schema_version"] == 1);
        CHECK(j["window_start"] == s.window_start.iso());
        CHECK(j["adjacency"].size() == 100);
        CHECK(j["sigma"].size() == 100);
        CHECK(j["adjacency"][1].get<int>() == s.adjacency(0, 1));
        CHECK(j["sigma"][12].get<double>() == s.sigma(1, 2));
        CHECK(j["pvalue"].get<double>() == s.empty_graph.pvalue);
        CHECK(j["labels"][0] == "DEU");
        ++count;
    }
    CHECK(count == snaps.size());
}

TEST_CASE("series, posterior and omega CSVs") {
    const auto sim = simulate_contagion(regime_flip_spec(160, 80), 7);
    const auto snaps = rolling_graphs(sim.noise, {150, 5});
    std::stringstream buf;
    write_window_series_csv(buf, snaps, {{"DEU", {1.0, 2.0, 3.0}}, {"DEU<-ITA", {0.5, 0.25, 0.125}}});
    const std::string s = buf.str();
    CHECK(contains(s, "window_start,node_or_pair,value\n"));
    CHECK(contains(s, snaps[1].window_start.iso() + ",DEU,2\n"));
    CHECK(contains(s, snaps[2].window_start.iso() + ",DEU<-ITA,0.125\n"));
    std::stringstream bad;
    CHECK_THROWS_AS(write_window_series_csv(bad, snaps, {{"X", {1.0}}}), ValidationError);

    std::stringstream post;
    write_posterior_csv(post, {summarize_posterior("F1", {0.25, 0.75, 0.0})});
    CHECK(post.str() == "# schema_version: 1\nfirm_id,k,probability\nF1,0,0.25\nF1,1,0.75\nF1,2,0\n");

    std::stringstream om;
    write_omega_csv(om, {0.5, 0.3, 0.2}, {2001, 2002});
    CHECK(om.str() == "# schema_version: 1\nk,year,omega_mean\n0,,0.5\n1,2001,0.3\n2,,0.2\n");
}

TEST_CASE("format_double round-trips") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n;
    for (int i = 0; i < 1000; ++i) {
        const double v = n(rng) * std::pow(10.0, i % 20 - 10);
        CHECK(std::stod(format_double(v)) == v);
    }
}
