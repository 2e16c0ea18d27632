// superchem: mean-field / positive-P / exact simulators for rf-coupled
// atom-molecule condensate dynamics, plus the Raman reduction calculator.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "superchem/run.hpp"
#include "superchem/version.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw superchem::IoError("cannot read config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliOptions {
  std::string config_path;
  std::string output;
  std::string format;
  int workers = -1;  // -1 = not given
  bool random_seed = false;
};

int run_mode(superchem::RunMode mode, const CliOptions& cli) {
  using namespace superchem;
  RunSpec spec = parse_config(read_file(cli.config_path), cli.random_seed);
  if (spec.mode != mode) {
    throw ConfigError(std::string("config mode '") + to_string(spec.mode) +
                      "' does not match the '" + to_string(mode) +
                      "' subcommand");
  }
  if (!cli.output.empty()) spec.output = cli.output;
  if (!cli.format.empty()) {
    if (cli.format == "csv") spec.format = OutputFormat::csv;
    else if (cli.format == "json") spec.format = OutputFormat::json;
    else throw ConfigError("--format must be 'csv' or 'json'");
  }
  if (cli.workers >= 0) spec.n_workers = cli.workers;
  if ((spec.mode == RunMode::pp || spec.mode == RunMode::compare) &&
      !spec.master_seed_set) {
    // --random-seed: draw once, announce, and record in the metadata echo
    std::random_device rd;
    spec.master_seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    spec.master_seed_set = true;
    std::cout << "master_seed = " << spec.master_seed << "\n";
  }
  const RunOutputs out = run(spec);
  std::cout << out.summary << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(superchem::kToolName) + " " + superchem::kVersion +
               " - coupled atom-molecule condensate simulator"};
  app.require_subcommand(1);

  struct SubDef {
    const char* name;
    const char* desc;
    superchem::RunMode mode;
    bool stochastic;
  };
  const SubDef defs[] = {
      {"mf", "deterministic mean-field run", superchem::RunMode::mf, false},
      {"pp", "positive-P stochastic ensemble run", superchem::RunMode::pp,
       true},
      {"exact", "truncated Fock-space run (small particle number)",
       superchem::RunMode::exact, false},
      {"compare", "mean-field and positive-P on one grid",
       superchem::RunMode::compare, true},
      {"reduce", "Raman adiabatic-elimination calculator",
       superchem::RunMode::reduce, false},
  };

  CliOptions opts[5];
  superchem::RunMode modes[5];
  int idx = 0;
  for (const SubDef& d : defs) {
    CLI::App* sub = app.add_subcommand(d.name, d.desc);
    CliOptions& o = opts[idx];
    modes[idx] = d.mode;
    sub->add_option("--config", o.config_path, "run configuration file")
        ->required();
    sub->add_option("--output", o.output, "output path override");
    sub->add_option("--format", o.format, "csv or json");
    if (d.stochastic) {
      sub->add_option("--workers", o.workers, "worker thread count");
      sub->add_flag("--random-seed", o.random_seed,
                    "draw master_seed from system entropy when the config "
                    "omits it (the chosen seed is printed and recorded)");
    }
    const int captured = idx;
    sub->callback([&, captured] {
      std::exit(run_mode(modes[captured], opts[captured]));
    });
    ++idx;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const superchem::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(superchem::ExitCode::internal);
  }
  return 0;
}
