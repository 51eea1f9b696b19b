// aep: command-line front end.
//
//   aep <simulate|pde|selfdiff|compare|exactcheck> CONFIG [--out DIR] [--workers K]
//
// Exit status: 0 when every in-run check passes, 1 when a check fails,
// 2 for configuration errors, 3 for other failures.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "aep/app/runs.hpp"

namespace {

int dispatch(const std::string& command, aep::app::RunConfig cfg) {
  using namespace aep::app;
  Report rep;
  if (command == "simulate") rep = run_simulate(cfg);
  else if (command == "pde") rep = run_pde(cfg);
  else if (command == "selfdiff") rep = run_selfdiff(cfg);
  else if (command == "compare") rep = run_compare(cfg);
  else rep = run_exactcheck(cfg);
  std::cout << rep.body.dump(2) << '\n';
  std::cerr << command << ": " << (rep.ok ? "all checks passed" : "some checks failed") << " (output in " << cfg.output_dir
            << ")\n";
  return rep.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active exclusion process: simulation, hydrodynamic PDE and exact checks"};
  app.set_version_flag("--version", std::string(AEP_VERSION));
  app.require_subcommand(1);
  std::string config_path, out_dir;
  unsigned workers = 0;
  for (const char* name : {"simulate", "pde", "selfdiff", "compare", "exactcheck"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--workers", workers, "worker threads (overrides model.workers)");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    aep::app::RunConfig cfg = aep::app::load_config(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (workers) cfg.workers = workers;
    return dispatch(command, std::move(cfg));
  } catch (const aep::app::ConfigError& e) {
    nlohmann::json err = {{"error", "config"}, {"keys", e.keys()}, {"message", e.what()}};
    std::cout << err.dump(2) << '\n';
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return 3;
  }
}
