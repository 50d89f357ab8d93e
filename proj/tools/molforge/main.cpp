// Exit status: 0 success, 1 usage error, 2 data error.

#include <CLI11.hpp>
#include <iostream>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "context.hpp"
#include "molforge/common/error.hpp"

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;

void configure_logging(const std::string& level) {
  auto logger = spdlog::stderr_logger_mt("molforge");
  logger->set_pattern("%Y-%m-%dT%H:%M:%S.%e %l %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(level));
}

}  // namespace

int main(int argc, char** argv) {
  using namespace molforge::cli;
  CLI::App app{"Molecular dataset, baseline and evaluation toolkit", "molforge"};
  app.require_subcommand(1);
  app.fallthrough();
  Context context;
  app.add_option("--config", context.global.config, "YAML run configuration");
  app.add_option("--threads", context.global.threads, "Worker threads for batch stages (0 = all cores)");
  app.add_option("--seed", context.global.seed, "Seed for stochastic subcommands");
  app.add_option("--out", context.global.out, "Output path, written atomically (default: standard output)");
  app.add_option("--log-level", context.global.log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  Registry registry;
  add_chem_commands(app, registry);
  add_forge_commands(app, registry);
  add_model_commands(app, registry);
  add_ground_commands(app, registry);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const auto extras = app.remaining();
    if (app.get_subcommands().empty() && !extras.empty()) {
      std::cerr << "error: unknown subcommand '" << extras.front() << "'\n\n" << app.help();
      return kUsage;
    }
    const auto parsed = app.get_subcommands();
    std::cerr << "error: " << e.what() << "\n\n" << (parsed.empty() ? app.help() : parsed.front()->help());
    return kUsage;
  }

  configure_logging(context.global.log_level);
  try {
    for (const auto& [command, run] : registry.commands) {
      if (command->parsed()) return run(context);
    }
    std::cerr << app.help();
    return kUsage;
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  } catch (const molforge::ArgumentError& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kData;
  }
}
