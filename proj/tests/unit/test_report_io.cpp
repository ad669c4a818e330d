#include <doctest.h>

#include <cmath>

#include "embedgeom/error.hpp"
#include "embedgeom/report_io.hpp"
#include "helpers.hpp"

using namespace embedgeom;
namespace t = embedgeom::testing;

TEST_CASE("format_double round-trips") {
  for (double v : {0.0, 1.0, 0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("CSV quoting") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(parse_csv_line("\"a,b\",c,\"x\"\"y\"") == std::vector<std::string>{"a,b", "c", "x\"y"});
  CHECK(parse_csv_line("") == std::vector<std::string>{""});
  CHECK_THROWS_AS(parse_csv_line("\"open"), InputError);
}

TEST_CASE("metric column order: by cutoff, recall first") {
  const auto r = report_from_ranks("s", {{"u", 3}}, {50, 10, 100});
  CHECK(ordered_metric_names(r) ==
        std::vector<std::string>{"R@10", "N@10", "R@50", "N@50", "R@100", "N@100"});
}

TEST_CASE("report CSV round trip") {
  const auto r = report_from_ranks("s", {{"q,1", 1}, {"q2", 7}, {"q3", 60}}, {10, 50});
  nlohmann::ordered_json prov;
  prov["tool"] = "embedgeom";
  prov["seed"] = 42;
  const std::string csv = report_csv(r, "query_id", prov);
  CHECK(csv.rfind("# tool: embedgeom\n# seed: 42\nquery_id,rank,R@10,N@10,R@50,N@50\n", 0) == 0);
  const auto back = parse_report_csv(csv, "back");
  CHECK(back.per_unit == r.per_unit);
  CHECK(back.rank_of_relevant == r.rank_of_relevant);
  CHECK(back.aggregates == r.aggregates);
}

TEST_CASE("report JSON carries fractions and percentages") {
  const auto r = report_from_ranks("s", {{"a", 1}, {"b", 20}}, {10});
  const auto j = report_json(r);
  CHECK(j["aggregates"]["R@10"] == 0.5);
  CHECK(j["aggregates_percent"]["R@10"] == 50.0);
  CHECK(j["unit_count"] == 2);
}

TEST_CASE("sweep CSV labels epsilon marks") {
  SweepCurve c;
  c.metric_name = "N@100";
  c.component_grid = {2, 5, 8};
  c.metric_at_k = {0.25, 0.5, 0.75};
  c.epsilon_marks[0.8] = {5, 0.5};
  c.epsilon_marks[0.95] = {5, 0.5};
  c.epsilon_marks[1.0] = {8, 0.75};
  const std::string csv = sweep_csv(c, nlohmann::ordered_json::object());
  CHECK(csv == "k,metric,epsilon_mark\n2,0.25,\n5,0.5,0.80;0.95\n8,0.75,1.00\n");
}

TEST_CASE("atomic writes leave no temp files and create directories") {
  t::TempDir dir("atomic");
  const auto target = dir / "nested/deeper/out.txt";
  write_file_atomic(target, "first");
  write_file_atomic(target, "second");
  CHECK(read_file(target) == "second");
  std::size_t entries = 0;
  for (const auto& e : std::filesystem::directory_iterator(target.parent_path())) {
    (void)e;
    ++entries;
  }
  CHECK(entries == 1);
}
