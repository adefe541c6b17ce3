// mesugaki: simulate, converge, ito-check and validate scenario configs.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "mesugaki/cli/commands.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

unsigned resolve_threads(std::optional<unsigned> flag) {
  if (flag) return std::max(1u, *flag);
  if (const char* env = std::getenv("MESUGAKI_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring MESUGAKI_THREADS=" << env << '\n';
  }
  return mesugaki::default_thread_count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mesugaki process toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<unsigned> threads;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "scenario config (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output.directory)");
    sub->add_option("--seed", seed, "master seed (overrides seed)");
    sub->add_option("--paths", paths, "number of paths (overrides paths)");
    sub->add_option("--threads", threads, "worker threads; results do not depend on it");
  };
  auto* simulate = app.add_subcommand("simulate", "write paths.csv and summary.json");
  auto* converge = app.add_subcommand("converge", "coupled-family convergence report");
  auto* ito = app.add_subcommand("ito-check", "Ito formula residuals");
  auto* validate = app.add_subcommand("validate", "martingale, mean and time-change tests");
  for (auto* sub : {simulate, converge, ito, validate}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  using namespace mesugaki;
  try {
    cli::RunContext ctx;
    ctx.config = cli::load_config(config_path);
    if (seed) ctx.config.seed = *seed;
    if (paths) {
      if (*paths < 1) throw cli::ConfigError("--paths", "must be >= 1");
      ctx.config.paths = *paths;
    }
    if (out_dir) ctx.config.output.directory = *out_dir;
    ctx.out = ctx.config.output.directory;
    ctx.threads = resolve_threads(threads);
    std::filesystem::create_directories(ctx.out);

    int code = kExitPass;
    if (*simulate) code = cli::cmd_simulate(ctx);
    if (*converge) code = cli::cmd_converge(ctx);
    if (*ito) code = cli::cmd_ito_check(ctx);
    if (*validate) code = cli::cmd_validate(ctx);
    if (code != kExitPass) {
      std::cerr << "check failed; see report in " << ctx.out.string() << '\n';
    }
    return code;
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UnsupportedError& e) {
    std::cerr << "unsupported: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}
