#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "embz/errors.hpp"
#include "embz/experiment.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  bool force = false;
  unsigned threads = 0;
};

nlohmann::json load_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream f(path);
  if (!f) throw embz::IoError("cannot read config " + path);
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw embz::ConfigError("malformed config " + path + ": " + e.what());
  }
}

int run_experiment(const std::string& name, const Flags& flags) {
  nlohmann::json raw = load_config(flags.config);
  if (!raw.is_object()) throw embz::ConfigError("config must be a JSON object");
  if (flags.seed) raw["seed"] = *flags.seed;
  const embz::cli::ExperimentConfig config = embz::cli::parse_config(raw, name);

  embz::cli::RunOptions options;
  options.out_dir = flags.out.value_or(config.output_path.value_or("out"));
  options.force = flags.force;
  options.threads = flags.threads;

  const embz::cli::ResultRecord record = embz::cli::run(config, options);
  embz::cli::emit_plotdata(record, options.out_dir);
  std::fprintf(stderr, "%s: %zu rows, config %s%s -> %s\n", name.c_str(),
               record.rows.empty() ? record.reports.size() : record.rows.size(), record.config_hash.substr(0, 12).c_str(),
               record.cache_hit ? " (cached)" : "", options.out_dir.string().c_str());
  if (!record.passed()) {
    for (const auto& r : record.reports) {
      if (!r.pass) std::fprintf(stderr, "certification failed: %s max deviation %.3g\n", r.op.c_str(), r.max_abs_deviation);
    }
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Embezzlement-of-entanglement experiments"};
  app.set_version_flag("--version", std::string(embz::cli::kVersion));
  app.require_subcommand(1);

  Flags flags;
  for (const std::string& name : embz::cli::experiment_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", flags.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "output directory (default: config output_path, else ./out)");
    sub->add_option("--seed", flags.seed, "override the config seed");
    sub->add_flag("--force", flags.force, "ignore cached results");
    sub->add_option("--threads", flags.threads, "worker threads (0 = hardware)")->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return run_experiment(name, flags);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "embz %s: %s\n", name.c_str(), e.what());
    return embz::cli::exit_code_for(e);
  }
}
