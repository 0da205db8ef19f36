#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "finmart/commands.hpp"
#include "finmart/errors.hpp"
#include "finmart/rational.hpp"
#include "finmart/scenario.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw finmart::BadParams("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct ReportArgs {
  std::string file;
  std::string format = "text";
  std::string tol;
  std::string numeraire;
  std::uint64_t seed = 1;
  bool strict = false;
  // price
  std::string claim;
  int t = 0;
  // hypothesis
  std::string strategy = "gop";
  std::string partition = "info";
};

void add_common(CLI::App* cmd, ReportArgs& args) {
  cmd->add_option("scenario", args.file, "scenario file")->required();
  cmd->add_option("--format", args.format, "report format: text or json");
  cmd->add_option("--tol", args.tol, "comparison tolerance (rational or decimal string)");
  cmd->add_option("--seed", args.seed, "seed for randomized suites");
  cmd->add_option("--numeraire", args.numeraire, "switch the numeraire to this asset");
  cmd->add_flag("--strict", args.strict, "exit 2 when the verdict is negative");
}

int run_report(const std::string& command, const ReportArgs& args) {
  finmart::Scenario scenario = finmart::parse_scenario(read_file(args.file));
  finmart::RunOptions opts;
  opts.format = args.format;
  opts.strict = args.strict;
  if (!args.tol.empty()) {
    opts.tol = finmart::parse_rat(args.tol);
    opts.tol_set = true;
  }
  opts.seed = args.seed;
  opts.numeraire = args.numeraire;
  opts.claim = args.claim;
  opts.t = args.t;
  opts.strategy = args.strategy;
  opts.partition = args.partition;
  finmart::RunResult result = finmart::run(command, scenario, opts);
  std::cout << (opts.format == "json" ? result.json : result.text);
  return result.exit_code;
}

struct GenerateArgs {
  std::string kind;
  std::string out;
  int periods = 1;
  std::string u = "2";
  std::string d = "1/2";
  std::string r = "0";
  std::string p = "1/2";
  std::string accuracy = "4/5";
};

int run_generate(const GenerateArgs& args) {
  using finmart::parse_rat;
  finmart::Scenario s;
  if (args.kind == "crr")
    s = finmart::make_crr_scenario(args.periods, parse_rat(args.u), parse_rat(args.d),
                                   parse_rat(args.r), parse_rat(args.p));
  else if (args.kind == "trinomial")
    s = finmart::make_trinomial_scenario(args.periods);
  else if (args.kind == "insider")
    s = finmart::make_insider_scenario(parse_rat(args.accuracy));
  else
    throw finmart::BadParams("unknown generator '" + args.kind +
                             "' (expected crr, trinomial, or insider)");
  std::string text = finmart::emit_scenario(s);
  if (args.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(args.out, std::ios::binary);
    if (!out) throw finmart::BadParams("cannot write '" + args.out + "'");
    out << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-market laboratory: martingale measures, arbitrage, growth-optimal "
               "portfolios, and real-world valuation on finite scenario trees"};
  app.require_subcommand(1);

  ReportArgs report;
  static const char* kReportCommands[] = {"check", "emm",         "gop",
                                          "price", "sensitivity", "hypothesis"};
  for (const char* name : kReportCommands) {
    CLI::App* cmd = app.add_subcommand(name, std::string("run the ") + name + " report");
    add_common(cmd, report);
    if (std::string(name) == "price") {
      cmd->add_option("--claim", report.claim, "claim name from the scenario")->required();
      cmd->add_option("--t", report.t, "valuation time (default 0)");
    }
    if (std::string(name) == "hypothesis") {
      cmd->add_option("--strategy", report.strategy, "numeraire candidate: gop or hold:<asset>");
      cmd->add_option("--partition", report.partition,
                      "conditioning partition: info, trivial, or evolution");
      cmd->add_option("--t", report.t, "conditioning time (default 0)");
    }
  }

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "emit a scenario file");
  generate->add_option("kind", gen.kind, "crr, trinomial, or insider")->required();
  generate->add_option("--out", gen.out, "output file (default stdout)");
  generate->add_option("--periods", gen.periods, "number of periods");
  generate->add_option("--u", gen.u, "up factor");
  generate->add_option("--d", gen.d, "down factor");
  generate->add_option("--r", gen.r, "per-period interest rate");
  generate->add_option("--p", gen.p, "up probability");
  generate->add_option("--accuracy", gen.accuracy, "signal accuracy for insider");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (generate->parsed()) return run_generate(gen);
    for (const char* name : kReportCommands)
      if (app.get_subcommand(name)->parsed()) return run_report(name, report);
    return 1;
  } catch (const finmart::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
