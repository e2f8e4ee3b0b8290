#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "rtoa/commands.hpp"

int main(int argc, char **argv) {
  CLI::App app{"Relativistic time-of-arrival simulations"};
  app.require_subcommand(1);

  std::string config_path;
  std::string preset_name;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"initial-state", "|Psi|^2 of the prepared packet over a (t, x) window"},
      {"arrival-scan", "expected arrival time versus momentum"},
      {"density", "arrival-time densities"},
      {"frames", "arrival-time density in moving frames"},
      {"point", "point-detector densities"},
      {"pdp", "continuous-detection trajectory sampling"},
  };
  for (const auto &[name, help] : commands) {
    auto *sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "key = value config file (applied after the preset)");
    sub->add_option("--preset", preset_name, "named parameter set")
        ->check(CLI::IsMember(rtoa::preset_names()));
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--threads", threads, "worker threads (0 = all cores)");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    rtoa::ConfigFile cfg = rtoa::preset(preset_name.empty() ? "scan-desk" : preset_name);
    if (!config_path.empty()) cfg.merge(rtoa::ConfigFile::load(config_path));
    if (seed) cfg.set("run.seed", std::to_string(*seed));
    if (threads) cfg.set("run.threads", std::to_string(*threads));
    const rtoa::RunConfig run = rtoa::resolve(cfg);
    const rtoa::CommandResult res = rtoa::run_command(command, run, out_dir);
    for (const auto &m : res.messages) std::cerr << m << '\n';
    for (const auto &f : res.files) std::cout << f.string() << '\n';
    return res.exit_code();
  } catch (const rtoa::Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
