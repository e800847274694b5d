#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "asyncmetro/harness.hpp"

namespace am = asyncmetro;

namespace {

constexpr const char* kFooter = R"(Per-run CSV columns (run, sweep):
  seed              schedule seed of the run
  scheduler         synchronous | uniform | adversarial | fixed
  n, max_degree     graph size and maximum degree
  model, q          model kind and domain size
  lambda, beta      hardcore fugacity / Ising inverse temperature (0 if n/a)
  T                 simulated horizon
  makespan          virtual time of the last termination
  phase1_end        virtual time at which every node is in Phase II
  max_residence     max over nodes of termination - phase1_end
  max_chain_length  longest dependency chain ending at a node's last update
  messages          Phase-I messages (one per directed edge) + decisions
  bits              accounted bits of all transmissions

Config sections: [model] kind q lambda beta interaction; [graph] file |
generator n rows cols degree seed resample; [chain] T extended y0 y0_values;
[scheduler] policies seed delay; [experiment] seeds repeats n_grid T_grid runs
tv_threshold. Worker threads: ASYNCMETRO_WORKERS.)";

int load(const std::string& path, const std::vector<std::string>& overrides, am::ExperimentConfig& cfg) {
  try {
    cfg = am::load_config(path, overrides);
  } catch (const am::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asynchronous distributed Metropolis sampler simulator"};
  app.footer(kFooter);
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> overrides;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "INI experiment file")->required();
    sub->add_option("--set", overrides, "override, section.key=value");
  };

  auto* run = app.add_subcommand("run", "simulate every (seed, scheduler) and write the run CSV");
  add_common(run);
  std::string csv_path, finals_path, trace_dir;
  run->add_option("-o,--output", csv_path, "CSV file (default stdout)");
  run->add_option("--finals", finals_path, "file for final configurations");
  run->add_option("--trace-dir", trace_dir, "directory for full event traces");

  auto* verify = app.add_subcommand("verify-coupling", "compare the network with the sequential chain");
  add_common(verify);
  bool corrupt = false;
  verify->add_flag("--corrupt-coin", corrupt, "negative control: perturb one coin of the network's schedule");

  auto* tv = app.add_subcommand("tv-test", "total-variation distance of the final state to the target law");
  add_common(tv);

  auto* sweep = app.add_subcommand("sweep", "scaling table over the n and T grids");
  add_common(sweep);

  auto* dump = app.add_subcommand("dump-schedule", "write the update schedule of one seed");
  add_common(dump);
  std::uint64_t dump_seed = 1;
  dump->add_option("--seed", dump_seed, "schedule seed");

  auto* replay = app.add_subcommand("replay-trace", "recompute run statistics from a full trace");
  std::string trace_path;
  replay->add_option("trace", trace_path, "trace file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*replay) {
      std::ifstream in(trace_path);
      if (!in) {
        std::cerr << "cannot open " << trace_path << '\n';
        return 2;
      }
      return am::cmd_replay_trace(in, std::cout, std::cerr);
    }

    am::ExperimentConfig cfg;
    if (int rc = load(config, overrides, cfg)) return rc;

    if (*run) {
      std::ofstream csv_file, finals_file;
      am::RunOutputs outputs;
      outputs.csv = &std::cout;
      if (!csv_path.empty()) {
        csv_file.open(csv_path);
        if (!csv_file) {
          std::cerr << "cannot write " << csv_path << '\n';
          return 2;
        }
        outputs.csv = &csv_file;
      }
      if (!finals_path.empty()) {
        finals_file.open(finals_path);
        if (!finals_file) {
          std::cerr << "cannot write " << finals_path << '\n';
          return 2;
        }
        outputs.finals = &finals_file;
      }
      outputs.trace_dir = trace_dir;
      return am::cmd_run(cfg, outputs, std::cerr);
    }
    if (*verify) return am::cmd_verify_coupling(cfg, std::cout, std::cerr, corrupt);
    if (*tv) return am::cmd_tv_test(cfg, std::cout, std::cerr);
    if (*sweep) return am::cmd_sweep(cfg, std::cout, std::cerr);
    if (*dump) return am::cmd_dump_schedule(cfg, dump_seed, std::cout, std::cerr);
  } catch (const am::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
