#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pairsim/experiments.hpp"

namespace {

struct SubArgs {
  CLI::App* app = nullptr;
  std::string config;
  pairsim::experiments::RunContext ctx;
};

SubArgs* add_experiment(CLI::App& app, const std::string& name,
                        const std::string& description,
                        std::vector<SubArgs>& store) {
  store.push_back({});
  SubArgs& args = store.back();
  args.app = app.add_subcommand(name, description);
  args.app->add_option("--config", args.config, "experiment config JSON")
      ->required();
  args.app->add_option("--output", args.ctx.output_dir,
                       "directory for result files")
      ->required();
  args.app->add_option("--jobs", args.ctx.jobs, "sweep worker count")
      ->default_val(1);
  args.app->add_option("--seed", args.ctx.seed, "base random seed")
      ->default_val(1);
  return &args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "pairsim: trapped-ion pair-creation toolkit (pulse simulation, phonon "
      "tomography, two-mode entanglement, cosmology dictionary)"};
  app.require_subcommand(0, 1);
  app.set_version_flag("--version",
                       pairsim::experiments::kToolkitVersion);

  std::vector<SubArgs> subs;
  subs.reserve(6);
  add_experiment(app, "single-pulse",
                 "one frequency pulse: trajectory, final state, P_n", subs);
  add_experiment(app, "echo-sweep",
                 "double pulse vs free-evolution time", subs);
  add_experiment(app, "ramp-study", "final excitation vs ramp duration",
                 subs);
  add_experiment(app, "fit",
                 "phonon tomography: reconstruct P_n, fit the model state",
                 subs);
  add_experiment(app, "entangle",
                 "two-mode vacuum entanglement for a frequency ratio", subs);
  add_experiment(app, "cosmo",
                 "compile a cosmology scenario and report pair creation",
                 subs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }

  for (const SubArgs& args : subs)
    if (args.app->parsed())
      return pairsim::experiments::run_experiment(args.app->get_name(),
                                                  args.config, args.ctx);

  std::cerr << app.help();
  return 2;
}
