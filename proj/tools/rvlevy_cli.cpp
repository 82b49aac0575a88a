#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rvlevy/experiment.hpp"
#include "rvlevy/parallel.hpp"

namespace {

enum Exit : int { ok = 0, validation = 1, runtime = 2, io = 3 };

struct Args {
  std::string config;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::optional<std::string> out_dir;
};

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return ss.str();
}

int execute(const std::string& command, const Args& a) {
  const auto text = read_file(a.config);
  if (!text) {
    std::cerr << "error: cannot read config '" << a.config << "'\n";
    return io;
  }
  const auto result = rvlevy::validate_config_text(*text);
  if (!result.ok()) {
    std::cerr << "invalid config '" << a.config << "':\n";
    for (const auto& e : result.errors) std::cerr << "  - " << e << '\n';
    return validation;
  }
  if (command == "validate") {
    std::cout << "ok: " << rvlevy::to_string(result.config->kind) << " config, hash "
              << rvlevy::config_hash(result.config->source) << '\n';
    return ok;
  }

  rvlevy::set_thread_count(a.threads);
  rvlevy::RunOptions opts;
  opts.seed = a.seed ? a.seed : rvlevy::seed_from_environment();
  opts.out_dir = a.out_dir;
  opts.paths_only = command == "paths";
  try {
    const auto manifest = rvlevy::run(*result.config, opts);
    std::cout << rvlevy::to_json_value(manifest).dump(2) << '\n';
  } catch (const rvlevy::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return io;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return runtime;
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo diagnostics for heavy-tailed stochastic integrals"};
  app.set_version_flag("--version", std::string(rvlevy::kVersion));
  app.require_subcommand(1);

  Args args;
  auto add = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", args.config, "Experiment config (JSON)")->required();
    sub->add_option("--seed", args.seed, "Master seed; overrides RVLEVY_SEED and the config");
    sub->add_option("--threads", args.threads, "Worker threads (0 = hardware concurrency)");
    sub->add_option("--out-dir", args.out_dir, "Output directory; overrides output.path");
    return sub;
  };
  add("run", "Run the experiment and write tables plus manifest.json");
  add("validate", "Check a config and list every violation");
  add("paths", "Dump sample trajectories of X, Y and the integral");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : validation;
  }

  try {
    return execute(app.get_subcommands().front()->get_name(), args);
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return runtime;
  }
}
