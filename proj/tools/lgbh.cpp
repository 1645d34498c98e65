// Command-line front-end: reads a JSON run config and writes CSV/JSON artifacts.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lgbh/config.hpp"
#include "lgbh/errors.hpp"
#include "lgbh/parallel.hpp"
#include "lgbh/pipeline.hpp"

namespace {

const char* kExitCodes =
    "Exit codes:\n"
    "  0   success\n"
    "  1   internal error\n"
    "  2   ParseError (malformed config; line and column reported)\n"
    "  3   ValidationError (config violates the schema or an invariant)\n"
    "  4   NonPhysicalDensity (density profile negative somewhere)\n"
    "  5   QuadratureNotConverged\n"
    "  6   BrokenPlaquette (a plaquette hop vanishes)\n"
    "  7   BasisTooLarge (Fock basis above the cap)\n"
    "  8   ConvergenceFailure (eigensolver)\n"
    "  9   CheckFailed (an invariant check failed)\n"
    "  10  IoError (config unreadable or output not writable)\n"
    "  11  DimensionMismatch\n"
    "On failure an error.json record is written to the output directory when possible.\n"
    "Default thread count comes from LGBH_THREADS.";

struct Args {
  std::string config;
  std::string out;
  int threads = lgbh::default_thread_count();
  std::uint64_t seed = 0;
  int photons = -1;
  int count = 6;
};

void write_error(const lgbh::Error& e, const std::string& dir) {
  std::cerr << "lgbh: " << e.kind() << ": " << e.what() << '\n';
  if (dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::ofstream f(std::filesystem::path(dir) / "error.json");
  if (f) f << lgbh::error_record(e).dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bose-Hubbard couplings from structured-light density profiles"};
  app.footer(kExitCodes);
  app.require_subcommand(1);

  Args args;
  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", args.config, "Run config (JSON)")->required();
    sub->add_option("-o,--out", args.out, "Output directory (overrides the config)");
    sub->add_option("-j,--threads", args.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", args.seed, "Seed for randomized checks only");
  };
  auto* run = app.add_subcommand("run", "Run the tasks listed in the config");
  auto* compute = app.add_subcommand("compute", "Export mu, t, U, heatmap and translation report");
  auto* design = app.add_subcommand("design", "Design the profile for the config's target and report fits");
  auto* diag = app.add_subcommand("diagonalize", "Lowest many-body eigenpairs");
  auto* check = app.add_subcommand("check", "Invariant checks; exit 9 when any fails");
  for (auto* sub : {run, compute, design, diag, check}) common(sub);
  diag->add_option("-n,--photons", args.photons, "Photon number (default: from config, else 1)");
  diag->add_option("-k,--count", args.count, "Number of eigenpairs")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  std::string out_dir = args.out;
  try {
    lgbh::RunConfig cfg = lgbh::parse_config(args.config);
    if (out_dir.empty()) out_dir = cfg.output;

    if (compute->parsed()) {
      cfg.tasks = {{lgbh::TaskKind::compute, {}}};
    } else if (design->parsed()) {
      cfg.tasks = {{lgbh::TaskKind::design, {}}};
    } else if (check->parsed()) {
      cfg.tasks = {{lgbh::TaskKind::check, {}}};
    } else if (diag->parsed()) {
      lgbh::Task task{lgbh::TaskKind::diagonalize, {}};
      for (const auto& t : cfg.tasks)
        if (t.kind == lgbh::TaskKind::diagonalize) task = t;
      if (args.photons >= 0) task.diagonalize.photons = args.photons;
      if (diag->count("--count")) task.diagonalize.count = args.count;
      cfg.tasks = {task};
    }

    lgbh::RunOptions opt;
    opt.output = out_dir;
    opt.threads = args.threads;
    opt.seed = args.seed;
    opt.log = &std::cout;
    const auto report = lgbh::run(cfg, opt);
    if (!report.checks_passed) {
      write_error(lgbh::CheckFailed("one or more invariant checks failed; see check_report.csv"), out_dir);
      return lgbh::CheckFailed("").code();
    }
    return 0;
  } catch (const lgbh::Error& e) {
    write_error(e, out_dir);
    return e.code();
  } catch (const std::exception& e) {
    write_error(lgbh::Error(e.what()), out_dir);
    return 1;
  }
}
