#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "brainalign/errors.hpp"
#include "brainalign/pipeline.hpp"
#include "brainalign/synthetic.hpp"

namespace ba = brainalign;

namespace {

struct Args {
  std::string config;
  std::string out;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed_override;
  std::string stage = "run";
};

void add_common(CLI::App* cmd, Args& args) {
  cmd->add_option("--config", args.config, "Run configuration (JSON)")->required();
  cmd->add_option("--out", args.out, "Output directory")->required();
  cmd->add_option("--jobs", args.jobs, "Worker threads (0 = all cores)");
  cmd->add_option("--seed-override", args.seed_override, "Replace the config seed (only for a fresh output directory)");
}

int run_stage(ba::pipeline::Stage stage, const Args& args) {
  ba::pipeline::RunOptions opts;
  opts.config = args.config;
  opts.out_dir = args.out;
  opts.jobs = args.jobs;
  opts.seed_override = args.seed_override;
  const auto report = ba::pipeline::execute(stage, opts);
  for (const auto& s : report.steps) {
    std::cout << s.step << ": " << (s.up_to_date ? "up-to-date" : "wrote");
    if (!s.up_to_date)
      for (const auto& a : s.artifacts) std::cout << ' ' << a;
    std::cout << '\n';
  }
  if (report.all_up_to_date()) std::cout << "up-to-date\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("brainalign");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);

  CLI::App app{"Brain-alignment scoring engine"};
  app.require_subcommand(1);
  app.fallthrough();
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress");

  Args args;
  auto* run = app.add_subcommand("run", "Run the pipeline (or up to one stage)");
  add_common(run, args);
  run->add_option("--stage", args.stage, "validate|localize|ceiling|score|behavioral|analyze|run");

  const std::vector<std::pair<const char*, const char*>> stages = {
      {"score", "Score every model checkpoint on every benchmark"},
      {"ceiling", "Estimate benchmark noise ceilings"},
      {"localize", "Select language-selective units"},
      {"behavioral", "Correlate surprisal with reading times"},
      {"analyze", "Trajectory fits, windowed correlations and tests"},
      {"validate", "Check every input against the data model"}};
  std::vector<CLI::App*> stage_cmds;
  for (const auto& [name, help] : stages) {
    auto* cmd = app.add_subcommand(name, help);
    add_common(cmd, args);
    stage_cmds.push_back(cmd);
  }

  std::string synth_out;
  std::uint64_t synth_seed = 7;
  auto* synth = app.add_subcommand("synth", "Write a synthetic fixture tree with a ready-to-run config");
  synth->add_option("--out", synth_out, "Destination directory")->required();
  synth->add_option("--seed", synth_seed, "Generator seed");

  CLI11_PARSE(app, argc, argv);
  if (verbose) spdlog::set_level(spdlog::level::info);

  try {
    if (synth->parsed()) {
      std::cout << ba::synthetic::write_demo_fixture(synth_out, synth_seed).string() << '\n';
      return 0;
    }
    if (run->parsed()) return run_stage(ba::pipeline::parse_stage(args.stage), args);
    for (auto* cmd : stage_cmds)
      if (cmd->parsed()) return run_stage(ba::pipeline::parse_stage(cmd->get_name()), args);
  } catch (const ba::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ba::pipeline::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
