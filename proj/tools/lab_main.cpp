#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "scatlab/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"scatlab: numerical experiments for spectral geometry and scattering"};
  app.require_subcommand(0, 1);

  std::string config_path, out_dir;
  bool list_only = false;
  app.add_flag("--list", list_only, "list experiment kinds and exit");

  for (const auto& entry : scatlab::list_experiments()) {
    CLI::App* sub = app.add_subcommand(entry.kind, entry.description);
    sub->add_option("--config", config_path, "experiment config (JSON)")
        ->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
  }

  CLI11_PARSE(app, argc, argv);

  if (list_only || app.get_subcommands().empty()) {
    for (const auto& entry : scatlab::list_experiments()) {
      std::cout << entry.kind << "\n  " << entry.description << "\n  keys: kind";
      for (const auto& k : entry.required_keys) std::cout << ", " << k;
      std::cout << "\n";
    }
    return 0;
  }

  const std::string kind = app.get_subcommands().front()->get_name();
  try {
    scatlab::RunRecord rec = scatlab::run_experiment_file(config_path, out_dir);
    // The config file names the experiment; the subcommand must agree.
    if (rec.config_echo.value("kind", "") != kind) {
      std::cerr << "error: config kind '" << rec.config_echo.value("kind", "")
                << "' does not match subcommand '" << kind << "'\n";
      return 1;
    }
    for (const auto& v : rec.verdicts)
      std::cout << (v.pass ? "[pass] " : "[FAIL] ") << v.name << ": " << v.detail
                << "\n";
    std::cout << "record written (" << rec.wall_seconds << " s)\n";
    return rec.all_passed() ? 0 : 2;
  } catch (const scatlab::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
