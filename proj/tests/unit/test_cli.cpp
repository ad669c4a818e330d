#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "embedgeom/cli.hpp"
#include "embedgeom/embedding_store.hpp"
#include "embedgeom/pca.hpp"
#include "embedgeom/report_io.hpp"
#include "fixtures.hpp"
#include "helpers.hpp"

using namespace embedgeom;
namespace t = embedgeom::testing;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "embedgeom");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fx(const char* name) { return t::fixture(name).string(); }

std::vector<std::string> search_args(const std::string& out) {
  return {"--items", fx("search_items.evec"), "--queries", fx("search_queries.evec"),
          "--relevance", fx("search_relevance.tsv"), "--out", out};
}

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// CSV body with the "# ..." provenance preamble removed.
std::string csv_body(const fs::path& p) {
  std::istringstream in(read_file(p));
  std::string line, body;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    body += line + "\n";
  }
  return body;
}

nlohmann::json json_file(const fs::path& p) { return nlohmann::json::parse(read_file(p)); }

}  // namespace

TEST_CASE("analyze on the rank-1 fixture") {
  t::TempDir dir("cli_an");
  const auto r = cli({"analyze", "--items", fx("rank1_items.tsv"), "--out", dir.path().string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("d(0.8) = 1") != std::string::npos);
  CHECK(r.out.find("d(1.0) = 1") != std::string::npos);
  const auto doc = json_file(dir / "analysis.json");
  CHECK(doc["rank"] == 1);
  for (const auto& e : doc["effective_dimensions"]) CHECK(e["components"] == 1);
  CHECK(fs::exists(dir / "model.epca"));
  CHECK(load_pca(dir / "model.epca").rank() == 1);
  const std::string csv = read_file(dir / "spectrum.csv");
  CHECK(csv.find("component,eigenvalue,cumulative_ratio\n1,") != std::string::npos);
  CHECK(csv.find("# seed: 42") != std::string::npos);
}

TEST_CASE("analyze on the geometric and uniform fixtures") {
  t::TempDir dir("cli_geo");
  REQUIRE(cli({"analyze", "--items", fx("geometric_items.tsv"), "--out", dir.path().string()}).code == 0);
  auto doc = json_file(dir / "analysis.json");
  CHECK(doc["effective_dimensions"][1]["epsilon"] == 0.95);
  CHECK(doc["effective_dimensions"][1]["components"] == 5);
  CHECK(doc["effective_dimensions"][2]["components"] == 8);
  // 17 rows in d=8: below the 10*d sampling guideline.
  CHECK(doc["warnings"].size() == 1);

  REQUIRE(cli({"analyze", "--items", fx("uniform_items.tsv"), "--epsilon", "0.8",
               "--out", dir.path().string()}).code == 0);
  doc = json_file(dir / "analysis.json");
  CHECK(doc["effective_dimensions"][0]["components"] == 8);
}

TEST_CASE("input errors exit 2 with a field-naming message") {
  auto r = cli({"analyze"});
  CHECK(r.code == 2);
  CHECK(r.err.find("items: path required") != std::string::npos);

  r = cli({"analyze", "--items", "/nonexistent/x.evec"});
  CHECK(r.code == 2);
  CHECK(r.err.find("items: no such file /nonexistent/x.evec") != std::string::npos);

  r = cli({"eval-search", "--items", fx("search_items.evec")});
  CHECK(r.code == 2);
  CHECK(r.err.find("queries: path required") != std::string::npos);

  r = cli(cat({"eval-search"}, cat(search_args("/tmp/x"), {"--measure", "manhattan"})));
  CHECK(r.code == 2);
  CHECK(r.err.find("manhattan") != std::string::npos);

  r = cli(cat({"eval-search"}, cat(search_args("/tmp/x"), {"--components", "3"})));
  CHECK(r.code == 2);
  CHECK(r.err.find("pca-model: required with --components") != std::string::npos);

  r = cli({"analyze", "--items", fx("rank1_items.tsv"), "--sample-size", "many"});
  CHECK(r.code == 2);
  CHECK(r.err.find("sample-size") != std::string::npos);

  r = cli({"frobnicate"});
  CHECK(r.code == 2);
}

TEST_CASE("zero-variance corpus exits 3") {
  t::TempDir dir("cli_zero");
  {
    std::ofstream f(dir / "same.tsv");
    f << "a\t1,2\nb\t1,2\nc\t1,2\n";
  }
  const auto r = cli({"analyze", "--items", (dir / "same.tsv").string(), "--out", (dir / "o").string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("degenerate corpus: zero variance") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "o" / "analysis.json"));
}

TEST_CASE("eval-search is deterministic and matches its own report") {
  t::TempDir dir("cli_es");
  const auto a = cli(cat({"eval-search"}, search_args((dir / "a").string())));
  const auto b = cli(cat({"eval-search"}, cat(search_args((dir / "b").string()), {"--workers", "4"})));
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  for (const char* f : {"per_query.csv", "metrics.json"}) {
    CHECK(read_file(dir / "a" / f) == read_file(dir / "b" / f));
  }
  const auto doc = json_file(dir / "a" / "metrics.json");
  CHECK(doc["tool"] == "embedgeom");
  CHECK(doc["seed"] == 42);
  CHECK(doc["config"]["pool_size"] == 50);
  CHECK(doc["config"]["cutoffs"] == nlohmann::json::array({100}));
  CHECK(doc["report"]["aggregates"]["R@100"] == 1.0);
  const auto parsed = parse_report_csv(read_file(dir / "a" / "per_query.csv"), "a");
  CHECK(parsed.unit_count() == 200);
  CHECK(parsed.aggregates.at("N@100") == doctest::Approx(doc["report"]["aggregates"]["N@100"].get<double>()).epsilon(1e-12));
}

TEST_CASE("full-rank components and center-only agree") {
  t::TempDir dir("cli_rot");
  REQUIRE(cli({"analyze", "--items", fx("search_items.evec"), "--out", (dir / "m").string()}).code == 0);
  const std::string model = (dir / "m" / "model.epca").string();
  const auto rank = load_pca(model).rank();
  REQUIRE(cli(cat({"eval-search"}, cat(search_args((dir / "p").string()),
                                      {"--pca-model", model, "--components", std::to_string(rank)})))
              .code == 0);
  REQUIRE(cli(cat({"eval-search"}, cat(search_args((dir / "c").string()), {"--center-only"}))).code == 0);
  REQUIRE(cli(cat({"eval-search"}, cat(search_args((dir / "cm").string()),
                                      {"--center-only", "--pca-model", model}))).code == 0);
  const auto p = json_file(dir / "p" / "metrics.json")["report"];
  const auto c = json_file(dir / "c" / "metrics.json")["report"];
  const auto cm = json_file(dir / "cm" / "metrics.json")["report"];
  CHECK(p["per_unit"] == cm["per_unit"]);
  CHECK(std::abs(p["aggregates"]["N@100"].get<double>() - c["aggregates"]["N@100"].get<double>()) <= 1e-9);

  const auto too_many = cli(cat({"eval-search"}, cat(search_args((dir / "x").string()),
                                                    {"--pca-model", model, "--components", "65"})));
  CHECK(too_many.code == 2);
  CHECK(too_many.err.find("components") != std::string::npos);
}

TEST_CASE("eval-seq: exp-decay at lambda 1 equals mean") {
  t::TempDir dir("cli_seq");
  const std::vector<std::string> base{"eval-seq", "--items", fx("seq_items.evec"), "--sessions",
                                      fx("seq_sessions.tsv")};
  REQUIRE(cli(cat(base, {"--aggregator", "mean", "--out", (dir / "m").string()})).code == 0);
  REQUIRE(cli(cat(base, {"--aggregator", "exp-decay", "--lambda", "1", "--out", (dir / "e").string()})).code == 0);
  CHECK(csv_body(dir / "m" / "per_session.csv") == csv_body(dir / "e" / "per_session.csv"));
  CHECK(json_file(dir / "m" / "metrics.json")["report"] == json_file(dir / "e" / "metrics.json")["report"]);
  const auto doc = json_file(dir / "m" / "metrics.json");
  CHECK(doc["config"]["cutoffs"] == nlohmann::json::array({10, 50}));
  CHECK(doc["report"]["aggregates"].contains("R@10"));
  CHECK(doc["report"]["aggregates_percent"].contains("N@50"));
}

TEST_CASE("sweep output and grid errors") {
  t::TempDir dir("cli_sw");
  const auto r = cli(cat({"sweep"}, cat(search_args(dir.path().string()), {"--grid", "2,8,64"})));
  REQUIRE(r.code == 0);
  const std::string csv = csv_body(dir / "sweep.csv");
  CHECK(csv.rfind("k,metric,epsilon_mark\n2,", 0) == 0);
  CHECK(csv.find("\n64,") != std::string::npos);
  const auto doc = json_file(dir / "sweep.json");
  REQUIRE(doc["sweep"]["points"].size() == 3);
  CHECK(doc["sweep"]["points"][2]["k"] == 64);
  CHECK(doc["sweep"]["grid"] == "explicit");

  const auto bad = cli(cat({"sweep"}, cat(search_args((dir / "bad").string()), {"--grid", "2,500"})));
  CHECK(bad.code == 2);
  CHECK(bad.err.find("k=500") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "bad" / "sweep.csv"));

  const auto seq = cli({"sweep", "--items", fx("seq_items.evec"), "--sessions", fx("seq_sessions.tsv"),
                        "--grid", "4,32", "--out", (dir / "seq").string()});
  CHECK(seq.code == 0);
  CHECK(json_file(dir / "seq" / "sweep.json")["sweep"]["metric"] == "N@50");
}

TEST_CASE("compare: self, planted improvement, mismatched units") {
  t::TempDir dir("cli_cmp");
  auto write = [&](const std::string& name, int units, double offset, const std::string& prefix) {
    std::string text = "unit,N@10\n";
    for (int i = 0; i < units; ++i) {
      text += prefix + std::to_string(i) + "," + format_double(0.5 + 0.0001 * (i % 100) + offset) + "\n";
    }
    write_file_atomic(dir / name, text);
    return (dir / name).string();
  };
  const auto a = write("a.csv", 2000, 0.1, "u");
  const auto b = write("b.csv", 2000, 0.0, "u");
  auto r = cli({"compare", a, a, "--out", (dir / "self").string()});
  REQUIRE(r.code == 0);
  auto doc = json_file(dir / "self" / "significance.json");
  CHECK(doc["results"][0]["p_value"] == 1.0);
  CHECK_FALSE(doc["results"][0].contains("marker"));

  r = cli({"compare", a, b, "--out", (dir / "planted").string()});
  REQUIRE(r.code == 0);
  doc = json_file(dir / "planted" / "significance.json");
  CHECK(doc["results"][0]["p_value"].get<double>() == 1.0 / 10001.0);
  CHECK(doc["results"][0]["marker"] == "*");
  CHECK(r.out.find(" *") != std::string::npos);

  const auto c = write("c.csv", 30, 0.0, "v");
  r = cli({"compare", a, c, "--out", (dir / "bad").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("unit sets differ") != std::string::npos);

  r = cli({"compare", a, b, "--resamples", "10"});
  CHECK(r.code == 2);
}

TEST_CASE("compare consumes eval-search reports") {
  t::TempDir dir("cli_cmp2");
  REQUIRE(cli(cat({"eval-search"}, search_args((dir / "cos").string()))).code == 0);
  REQUIRE(cli(cat({"eval-search"}, cat(search_args((dir / "neg").string()), {"--measure", "neg-euclidean"}))).code == 0);
  const auto r = cli({"compare", (dir / "cos" / "per_query.csv").string(),
                      (dir / "neg" / "per_query.csv").string(), "--out", dir.path().string()});
  CHECK(r.code == 0);
  const auto doc = json_file(dir / "significance.json");
  CHECK(doc["results"].size() == 2);  // R@100 and N@100
}

TEST_CASE("config file, environment seed, and flag precedence") {
  t::TempDir dir("cli_cfg");
  {
    std::ofstream f(dir / "run.json");
    f << R"({"items": ")" << fx("search_items.evec") << R"(", "queries": ")" << fx("search_queries.evec")
      << R"(", "relevance": ")" << fx("search_relevance.tsv") << R"(", "pool-size": 20, "cutoffs": [1, 10]})";
  }
  const std::string cfg = (dir / "run.json").string();

  ::setenv("EMBEDGEOM_SEED", "7", 1);
  auto config = parse_run_config({"embedgeom", "eval-search", "--config", cfg});
  CHECK(config.pool_size == 20);
  CHECK(config.cutoffs == std::vector<std::size_t>{1, 10});
  CHECK(config.seed == 7);
  config = parse_run_config({"embedgeom", "eval-search", "--config", cfg, "--seed", "9", "--pool-size", "30"});
  CHECK(config.seed == 9);
  CHECK(config.pool_size == 30);
  ::unsetenv("EMBEDGEOM_SEED");
  config = parse_run_config({"embedgeom", "eval-search", "--config", cfg});
  CHECK(config.seed == 42);

  {
    std::ofstream f(dir / "bad.json");
    f << R"({"itmes": "x"})";
  }
  const auto r = cli({"analyze", "--config", (dir / "bad.json").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("unknown key 'itmes'") != std::string::npos);
}

TEST_CASE("protocol parameters echo verbatim") {
  const auto config = parse_run_config(cat({"embedgeom", "eval-search"},
                                           cat(search_args("/tmp/o"), {"--pool-size", "50", "--measure", "cosine",
                                                                       "--sample-size", "100000", "--epsilon",
                                                                       "0.80,0.95,1.00", "--cutoffs", "100"})));
  const auto echo = config_echo(config);
  CHECK(echo["pool_size"] == 50);
  CHECK(echo["measure"] == "cosine");
  CHECK(echo["sample_size"] == 100000);
  CHECK(echo["epsilon"].dump() == "[0.8,0.95,1.0]");
  CHECK(echo["cutoffs"].dump() == "[100]");
  CHECK_FALSE(echo.contains("workers"));
  CHECK_FALSE(echo.contains("out"));
  // Defaults resolve to the same protocol.
  CHECK(config_echo(parse_run_config(cat({"embedgeom", "eval-search"}, search_args("/tmp/o")))) == echo);
}

TEST_CASE("convert round trip") {
  t::TempDir dir("cli_conv");
  REQUIRE(cli({"convert", fx("search_queries.evec"), (dir / "q.tsv").string()}).code == 0);
  REQUIRE(cli({"convert", (dir / "q.tsv").string(), (dir / "q.evec").string()}).code == 0);
  CHECK(read_file(dir / "q.evec") == read_file(fx("search_queries.evec")));
  REQUIRE(cli({"convert", (dir / "q.tsv").string(), (dir / "q.bin").string(), "--to", "tsv"}).code == 0);
  CHECK(read_file(dir / "q.bin") == read_file(dir / "q.tsv"));
}

TEST_CASE("help and version exit 0") {
  CHECK(cli({"--help"}).code == 0);
  const auto v = cli({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find("embedgeom") != std::string::npos);
}
