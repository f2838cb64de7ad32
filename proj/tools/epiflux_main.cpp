#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "epiflux/config.hpp"
#include "epiflux/study.hpp"

namespace {

struct CliValues {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  bool gate = false;
};

struct SubOptions {
  CLI::Option* config = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* threads = nullptr;
  CLI::Option* gate = nullptr;
};

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw epiflux::ConfigError("cannot read config file " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seasonally forced stochastic epidemic toolkit"};
  app.require_subcommand(1);

  CliValues cli;
  const struct {
    const char* name;
    const char* help;
  } kCommands[] = {
      {"simulate", "one exact stochastic path, events and sampled grid"},
      {"ode", "deterministic mean-field path"},
      {"ensemble", "law-of-large-numbers sweep against the mean field"},
      {"fluctuation", "central-limit check of the scaled fluctuation"},
      {"scaling", "noise-to-mean ratio across population sizes"},
  };
  SubOptions opts[5];
  CLI::App* subs[5];
  for (int k = 0; k < 5; ++k) {
    CLI::App* sub = app.add_subcommand(kCommands[k].name, kCommands[k].help);
    subs[k] = sub;
    opts[k].config = sub->add_option("--config", cli.config_path,
                                     "JSON study description");
    opts[k].seed =
        sub->add_option("--seed", cli.seed, "random seed (overrides file)");
    opts[k].out =
        sub->add_option("--out", cli.out_dir, "output directory");
    opts[k].threads = sub->add_option("--threads", cli.threads,
                                      "worker threads, 0 = all cores");
    opts[k].gate = sub->add_flag("--gate", cli.gate,
                                 "exit 4 when the statistical gate fails");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? epiflux::kExitOk : epiflux::kExitConfigError;
  }

  int chosen = 0;
  for (int k = 0; k < 5; ++k) {
    if (subs[k]->parsed()) chosen = k;
  }

  epiflux::RunConfig cfg;
  try {
    if (opts[chosen].config->count() > 0) {
      cfg = epiflux::parse_config(read_file(cli.config_path));
    }
    cfg.study = epiflux::study_kind_from_string(kCommands[chosen].name);
    if (opts[chosen].seed->count() > 0) cfg.seed = cli.seed;
    if (opts[chosen].out->count() > 0) cfg.out_dir = cli.out_dir;
    if (opts[chosen].threads->count() > 0) {
      if (cli.threads < 0) throw epiflux::ConfigError("--threads must be >= 0");
      cfg.threads = cli.threads;
    }
    if (opts[chosen].gate->count() > 0) cfg.gate = true;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return epiflux::kExitConfigError;
  }

  try {
    return epiflux::run_study(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return epiflux::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return epiflux::kExitRuntimeError;
  }
}
