#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "yosida/scenario.hpp"
#include "yosida/simd.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Whole-line solutions of functional differential inclusions via the Yosida derivative"};
  app.set_version_flag("--version", std::string(YOSIDA_VERSION));
  app.require_subcommand(1);

  std::string scenario;
  std::string out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string backend;

  auto add = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("scenario", scenario, "Scenario file (JSON)")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides YOSIDA_OUT_DIR and the scenario)");
    sub->add_option("--seed", seed, "Random seed (overrides the scenario)");
    sub->add_option("--threads", threads, "Worker threads (overrides the scenario)")->check(CLI::Range(1u, 1024u));
    sub->add_option("--simd", backend, "Kernel backend")->check(CLI::IsMember({"scalar", "avx2"}));
    return sub;
  };
  auto* solve = add("solve", "Run the outer recursion and the configured checks");
  auto* verify = add("verify", "Sample the operator assumptions");
  auto* oracle = add("oracle", "Cross-check the Volterra resolvent against fixed-point iteration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    // Usage errors share the config-error code.
    return rc == 0 ? 0 : static_cast<int>(yosida::ExitCode::config_error);
  }

  yosida::RunOptions opt;
  if (!out_dir.empty()) opt.out_dir = out_dir;
  if (app.get_subcommands().front()->count("--seed")) opt.seed = seed;
  if (app.get_subcommands().front()->count("--threads")) opt.threads = threads;

  try {
    if (backend == "scalar") {
      yosida::simd::set_backend(yosida::simd::Backend::scalar);
    } else if (backend == "avx2") {
      yosida::simd::set_backend(yosida::simd::Backend::avx2);
    }
    yosida::ExitCode code = yosida::ExitCode::ok;
    if (*solve) {
      code = yosida::cmd_solve(scenario, opt, std::cerr);
    } else if (*verify) {
      code = yosida::cmd_verify(scenario, opt, std::cerr);
    } else if (*oracle) {
      code = yosida::cmd_oracle(scenario, opt, std::cerr);
    }
    return static_cast<int>(code);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(yosida::ExitCode::config_error);
  }
}
