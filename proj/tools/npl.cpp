// npl: posterior bootstrap command-line front end.
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "npl/commands.hpp"

namespace {

std::optional<std::size_t> env_workers() {
  const char* v = std::getenv("NPL_WORKERS");
  if (v == nullptr || *v == '\0') return std::nullopt;
  try {
    std::size_t pos = 0;
    const long long n = std::stoll(v, &pos);
    if (pos != std::string(v).size() || n < 0) throw std::invalid_argument(v);
    return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    throw npl::ConfigError(std::string("NPL_WORKERS: not a non-negative integer: '") + v + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonparametric learning with a Dirichlet process prior"};
  app.require_subcommand(1);

  std::string config_path, out_path, archive_path, test_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  double epsilon = 0.1;

  auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Master seed (overrides config)");
    sub->add_option("--workers", workers, "Worker threads, 0 = all cores (default: $NPL_WORKERS)");
    if (needs_out) sub->add_option("--out", out_path, "Output path")->required();
  };

  auto* sample = app.add_subcommand("sample", "Draw posterior samples into a CSV archive");
  add_common(sample, true);
  auto* sweep = app.add_subcommand("sweep", "Sparsity path over the ARD b grid");
  add_common(sweep, true);
  auto* check = app.add_subcommand("ingest-check", "Validate config and data without sampling");
  add_common(check, false);
  auto* evaluate = app.add_subcommand("evaluate", "Predictive metrics of an archive on held-out data");
  evaluate->add_option("--archive", archive_path, "Sample archive (CSV)")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--test", test_path, "Held-out data (CSV)")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--epsilon", epsilon, "Sparsity threshold")->check(CLI::PositiveNumber);
  evaluate->add_option("--out", out_path, "Also write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : npl::cli::kConfigError;
  }

  return npl::cli::guarded(std::cerr, [&]() -> int {
    npl::cli::Overrides o;
    o.seed = seed;
    o.workers = workers ? workers : env_workers();
    if (*sample) return npl::cli::cmd_sample(config_path, o, out_path, std::cerr);
    if (*sweep) return npl::cli::cmd_sweep(config_path, o, out_path, std::cerr);
    if (*check) return npl::cli::cmd_ingest_check(config_path, o, std::cout);
    return npl::cli::cmd_evaluate({archive_path, test_path, epsilon, out_path}, std::cout);
  });
}
