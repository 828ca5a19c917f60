// qdmet: run or scan DMET / FCI / ESVQE calculations described by a JSON config.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "qdmet/cli.hpp"
#include "qdmet/error.hpp"

namespace {

int execute(const std::string& command, const std::string& config_path, const std::string& method,
            const std::string& output, int parallel, bool allow_unconverged) {
  qdmet::cli::RunConfig cfg = qdmet::cli::load_config(config_path);
  if (!method.empty()) {
    cfg.method = qdmet::cli::parse_method(method);
    cfg.validate();
  }
  if (command == "run" && cfg.inputs.size() != 1)
    throw qdmet::ValidationError("field 'input': 'run' takes exactly one input (use 'scan' for lists)");

  std::ofstream csv_file;
  std::ostream* csv = &std::cout;
  const std::string out_path = !output.empty() ? output : (cfg.output.empty() ? "" : cfg.resolve(cfg.output).string());
  if (!out_path.empty() && out_path != "-") {
    csv_file.open(out_path);
    if (!csv_file) throw qdmet::Error("cannot write " + out_path);
    csv = &csv_file;
  }
  std::ofstream log_file;
  qdmet::cli::LogSink sink;
  if (!cfg.log.empty()) {
    log_file.open(cfg.resolve(cfg.log));
    if (!log_file) throw qdmet::Error("cannot write " + cfg.resolve(cfg.log).string());
    sink = [&](const std::string& line) { log_file << line << '\n'; };
  }
  spdlog::info("{}: {} input(s), method {}", command, cfg.inputs.size(), qdmet::cli::to_string(cfg.method));
  const int status = qdmet::cli::run_scan(cfg, {parallel, allow_unconverged}, *csv, sink);
  if (status != 0) spdlog::warn("at least one row failed or did not converge");
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density matrix embedding with FCI and energy-sorting VQE solvers"};
  app.require_subcommand(1);
  std::string method, output, level = "warn";
  int parallel = 1;
  bool allow_unconverged = false;
  app.add_option("--method", method, "Override the configured method (rhf|fci|vqe|dmet-fci|dmet-esvqe)");
  app.add_option("--output", output, "CSV output path ('-' for stdout)");
  app.add_option("--parallel", parallel, "Concurrent scan entries")->check(CLI::PositiveNumber);
  app.add_flag("--allow-unconverged", allow_unconverged, "Exit 0 even if a row did not converge");
  app.add_option("--log-level", level, "trace|debug|info|warn|error|off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  std::string config;
  for (const char* name : {"run", "scan"}) {
    auto* sub = app.add_subcommand(name, std::string(name) == "run" ? "Run a single input" : "Run every input of the config");
    sub->add_option("config", config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->fallthrough();
  }
  CLI11_PARSE(app, argc, argv);

  spdlog::set_default_logger(spdlog::stderr_color_mt("qdmet"));
  spdlog::set_level(spdlog::level::from_str(level));
  try {
    return execute(app.get_subcommands().front()->get_name(), config, method, output, parallel, allow_unconverged);
  } catch (const qdmet::ValidationError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const qdmet::ParseError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 3;
  }
}
