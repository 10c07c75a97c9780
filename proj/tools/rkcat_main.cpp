// rkcat: run verification suites on scenario files.
// Exit codes: 0 all checks pass, 1 some check fails, 2 input error.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rkcat/demos.hpp"

namespace {

struct Options {
  std::string file;
  std::optional<double> tolerance;
  std::uint64_t seed = 1;
  std::string format = "human";
  std::optional<std::string> suite;
  std::string emit;
  bool timing = false;
};

void add_common(CLI::App* cmd, Options& o, bool with_suite) {
  cmd->add_option("--tolerance", o.tolerance, "absolute tolerance for all checks")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "seed for randomized sub-checks");
  cmd->add_option("--format", o.format, "output format")->check(CLI::IsMember({"human", "json"}));
  cmd->add_flag("--timing", o.timing, "print wall time to stderr");
  if (with_suite) cmd->add_option("--suite", o.suite, "run only this suite");
}

int emit(const rkcat::Scenario& s, const std::vector<std::string>& suites, const Options& o) {
  const auto start = std::chrono::steady_clock::now();
  rkcat::RunOptions ro;
  ro.tolerance = o.tolerance;
  ro.seed = o.seed;
  const rkcat::Report r = rkcat::run_suites(s, suites, ro);
  const double tol = rkcat::effective_tolerance(s, ro);
  if (o.format == "json")
    std::cout << rkcat::report_json(r, s.kind, tol).dump(2) << "\n";
  else
    std::cout << rkcat::report_human(r, s.kind, tol);
  if (o.timing) {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    std::cerr << "elapsed " << dt.count() << " s\n";
  }
  return r.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rkcat: reproducing (-*)-kernels, pull-backs and Stinespring dilations"};
  app.require_subcommand(1);
  Options o;

  struct Fixed {
    const char* name;
    const char* help;
    const char* suite;
  };
  const Fixed fixed[] = {{"rkhs", "build H^K and check the reproducing property", "rkhs"},
                         {"pullback", "pull a kernel back along the scenario's morphism", "pullback"},
                         {"universality", "check the universality theorem", "universality"},
                         {"stinespring", "Stinespring dilation of a CP map", "stinespring"},
                         {"gns", "GNS construction and the two commuting squares", "gns"}};
  CLI::App* check = app.add_subcommand("check", "run the scenario's suites (or --suite)");
  check->add_option("file", o.file, "scenario file")->required();
  add_common(check, o, true);
  std::vector<std::pair<CLI::App*, const char*>> fixed_cmds;
  for (const auto& f : fixed) {
    CLI::App* c = app.add_subcommand(f.name, f.help);
    c->add_option("file", o.file, "scenario file")->required();
    add_common(c, o, false);
    fixed_cmds.emplace_back(c, f.suite);
  }
  CLI::App* demo = app.add_subcommand("demo", "run a built-in demo ('list' to enumerate)");
  std::string demo_name;
  demo->add_option("name", demo_name, "demo name")->required();
  demo->add_option("--emit", o.emit, "write the demo scenario to this file instead of running it");
  add_common(demo, o, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (check->parsed()) {
      const rkcat::Scenario s = rkcat::load_scenario(o.file);
      return emit(s, rkcat::suites_for(s, o.suite), o);
    }
    for (const auto& [cmd, suite] : fixed_cmds)
      if (cmd->parsed()) {
        const rkcat::Scenario s = rkcat::load_scenario(o.file);
        return emit(s, {suite}, o);
      }
    if (demo_name == "list") {
      for (const auto& n : rkcat::demo_names()) std::cout << n << "\n";
      return 0;
    }
    const rkcat::Json j = rkcat::demo_scenario(demo_name);
    if (!o.emit.empty()) {
      std::ofstream out(o.emit);
      if (!out) throw rkcat::ScenarioError("cannot write '" + o.emit + "'");
      out << j.dump(2) << "\n";
      return 0;
    }
    const rkcat::Scenario s = rkcat::parse_scenario(j);
    return emit(s, rkcat::suites_for(s, o.suite), o);
  } catch (const rkcat::ScenarioError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
