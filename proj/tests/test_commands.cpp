#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "finmart/commands.hpp"
#include "finmart/errors.hpp"
#include "finmart/rational.hpp"
#include "finmart/scenario.hpp"

#ifndef FINMART_FIXTURE_DIR
#error "FINMART_FIXTURE_DIR must point at tests/fixtures"
#endif

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing file: ", path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fixture(const std::string& name) {
  return read_file(std::string(FINMART_FIXTURE_DIR) + "/" + name);
}

finmart::Scenario load(const std::string& name) {
  return finmart::parse_scenario(fixture(name));
}

}  // namespace

TEST_CASE("fixture files parse and re-emit canonically") {
  for (const char* name : {"binomial.mkt", "two_period.mkt", "trinomial.mkt",
                           "insider.mkt", "dominated.mkt"}) {
    finmart::Scenario s = finmart::parse_scenario(fixture(name));
    std::string canonical = finmart::emit_scenario(s);
    CHECK(finmart::emit_scenario(finmart::parse_scenario(canonical)) == canonical);
  }
}

TEST_CASE("reports match the committed golden files") {
  struct Row {
    const char* scenario;
    const char* command;
    const char* expected;  // basename under fixtures/expected/
    bool verdict;
  };
  const Row rows[] = {
      {"binomial.mkt", "check", "binomial_check", true},
      {"binomial.mkt", "emm", "binomial_emm", true},
      {"binomial.mkt", "gop", "binomial_gop", true},
      {"binomial.mkt", "price", "binomial_price", true},
      {"binomial.mkt", "sensitivity", "binomial_sensitivity", true},
      {"binomial.mkt", "hypothesis", "binomial_hypothesis", true},
      {"two_period.mkt", "price", "two_period_price", true},
      {"trinomial.mkt", "check", "trinomial_check", true},
      {"trinomial.mkt", "gop", "trinomial_gop", true},
      {"insider.mkt", "check", "insider_check", false},
      {"insider.mkt", "sensitivity", "insider_sensitivity", false},
      {"insider.mkt", "hypothesis", "insider_hypothesis", false},
      {"dominated.mkt", "check", "dominated_check", false},
  };
  for (const Row& row : rows) {
    CAPTURE(row.scenario);
    CAPTURE(row.command);
    finmart::Scenario s = load(row.scenario);
    finmart::RunOptions opts;
    opts.claim = "call";
    finmart::RunResult r = finmart::run(row.command, s, opts);
    CHECK(r.verdict == row.verdict);
    CHECK(r.exit_code == 0);  // strict is off
    CHECK(r.text == fixture(std::string("expected/") + row.expected + ".txt"));
    CHECK(r.json == fixture(std::string("expected/") + row.expected + ".json"));
  }
}

TEST_CASE("json reports are well-formed and schema-tagged") {
  finmart::Scenario s = load("binomial.mkt");
  finmart::RunOptions opts;
  for (const char* command : {"check", "emm", "gop", "sensitivity", "hypothesis"}) {
    finmart::RunResult r = finmart::run(command, s, opts);
    auto doc = nlohmann::json::parse(r.json);
    CHECK(doc.at("schema").get<std::string>() == "finmart-report/1");
    CHECK(doc.at("command").get<std::string>() == command);
    CHECK(doc.at("seed").get<std::uint64_t>() == 1);
    CHECK(doc.at("verdict").get<std::string>() == (r.verdict ? "pass" : "negative"));
  }
}

TEST_CASE("runs are deterministic for a fixed seed") {
  finmart::Scenario s = load("insider.mkt");
  finmart::RunOptions opts;
  opts.seed = 42;
  finmart::RunResult a = finmart::run("hypothesis", s, opts);
  finmart::RunResult b = finmart::run("hypothesis", s, opts);
  CHECK(a.text == b.text);
  CHECK(a.json == b.json);
  auto doc = nlohmann::json::parse(a.json);
  CHECK(doc.at("seed").get<std::uint64_t>() == 42);
}

TEST_CASE("strict mode turns negative verdicts into exit code 2") {
  finmart::Scenario dom = load("dominated.mkt");
  finmart::RunOptions opts;
  opts.strict = true;
  finmart::RunResult r = finmart::run("check", dom, opts);
  CHECK_FALSE(r.verdict);
  CHECK(r.exit_code == 2);
  finmart::Scenario bi = load("binomial.mkt");
  CHECK(finmart::run("check", bi, opts).exit_code == 0);
}

TEST_CASE("numeraire override leaves the verdicts alone") {
  finmart::Scenario s = load("binomial.mkt");
  finmart::RunOptions opts;
  opts.numeraire = "stock";
  CHECK(finmart::run("check", s, opts).verdict);
  CHECK(finmart::run("gop", s, opts).verdict);
  opts.numeraire = "gold";  // unknown name -> index -1 -> rejected
  CHECK_THROWS_AS(finmart::run("check", s, opts), finmart::ValidationError);
}

TEST_CASE("pricing requires a claim name and a pricing measure") {
  finmart::Scenario s = load("binomial.mkt");
  finmart::RunOptions opts;
  CHECK_THROWS_AS(finmart::run("price", s, opts), finmart::BadParams);
  opts.claim = "straddle";
  CHECK_THROWS_AS(finmart::run("price", s, opts), finmart::BadParams);
  finmart::Scenario dom = load("dominated.mkt");
  opts.claim = "call";
  CHECK_THROWS_AS(finmart::run("price", dom, opts), finmart::BadParams);
}

TEST_CASE("unknown commands and formats are rejected") {
  finmart::Scenario s = load("binomial.mkt");
  finmart::RunOptions opts;
  CHECK_THROWS_AS(finmart::run("audit", s, opts), finmart::BadParams);
  opts.format = "yaml";
  CHECK_THROWS_AS(finmart::run("check", s, opts), finmart::BadParams);
}

TEST_CASE("hypothesis strategy and partition options") {
  finmart::Scenario s = load("insider.mkt");
  finmart::RunOptions opts;
  opts.strategy = "hold:stock";
  finmart::RunResult held = finmart::run("hypothesis", s, opts);
  CHECK_FALSE(held.verdict);  // a single asset is not the numeraire portfolio
  opts.strategy = "gop";
  opts.partition = "evolution";
  CHECK_NOTHROW(finmart::run("hypothesis", s, opts));
  opts.partition = "trivial";
  CHECK_NOTHROW(finmart::run("hypothesis", s, opts));
  opts.strategy = "hold:gold";
  CHECK_THROWS_AS(finmart::run("hypothesis", s, opts), finmart::BadParams);
}

TEST_CASE("price command values the two-period call on both routes") {
  finmart::Scenario s = load("two_period.mkt");
  finmart::RunOptions opts;
  opts.claim = "call";
  finmart::RunResult r = finmart::run("price", s, opts);
  CHECK(r.verdict);
  auto doc = nlohmann::json::parse(r.json);
  CHECK(doc.at("routes_equal").get<bool>());
  // Same values at a later valuation time re-run through the library.
  opts.t = 1;
  CHECK_NOTHROW(finmart::run("price", s, opts));
}
