// pvangle: simulate angle-conditioned Poisson-Voronoi statistics and check
// them against their closed forms.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pvangle/commands.hpp"
#include "pvangle/validation.hpp"

namespace {

using namespace pvangle;
using namespace pvangle::cli;

struct Flags {
  std::string config_path;
  std::vector<std::pair<std::string, CLI::Option*>> scalar;
  std::vector<std::pair<std::string, CLI::Option*>> lists;
  std::map<std::string, std::string> scalar_values;
  std::vector<std::string> thetas, panels;
  bool json = false;
  std::vector<int> criteria;
  bool inject = false;
};

void add_shared(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config_path, "key=value configuration file (flags override it)");
  const std::vector<std::pair<const char*, const char*>> scalars{
      {"dim", "dimension, 2 or 3"},
      {"lambda", "intensity of the point process"},
      {"window", "side length of the sampling window"},
      {"margin-factor", "guard margin multiplier (>= 3)"},
      {"segment-length", "length of the scanned axis segment"},
      {"reps", "number of replications"},
      {"bins", "histogram bins for the angle fit"},
      {"seed", "master seed"},
      {"out", "output directory"},
      {"workers", "worker threads (default: available cores)"}};
  for (const auto& [name, help] : scalars) {
    auto* opt = app.add_option(std::string("--") + name, f.scalar_values[name], help);
    f.scalar.emplace_back(name, opt);
  }
  f.lists.emplace_back("theta", app.add_option("--theta", f.thetas,
                                               "angle, e.g. 1.0472 or pi/3 (repeatable)")
                                    ->delimiter(','));
  f.lists.emplace_back("panels", app.add_option("--panels", f.panels,
                                                "panel exponent m, 2^m panels (repeatable)")
                                     ->delimiter(','));
  app.add_flag("--json", f.json, "machine-readable output only");
}

RunConfig build_config(const std::string& command, const Flags& f) {
  RunConfig cfg;
  cfg.command = command;
  std::vector<std::pair<std::string, std::string>> settings;
  if (!f.config_path.empty()) settings = parse_config_text(read_config_file(f.config_path));

  // flags replace file settings of the same key
  auto given = [&](const std::string& key) {
    for (const auto& [k, opt] : f.scalar)
      if (k == key) return opt->count() > 0;
    for (const auto& [k, opt] : f.lists)
      if (k == key) return opt->count() > 0;
    return false;
  };
  for (const auto& [k, v] : settings)
    if (!given(k)) apply_setting(cfg, k, v);
  for (const auto& [k, opt] : f.scalar)
    if (opt->count()) apply_setting(cfg, k, f.scalar_values.at(k));
  for (const auto& t : f.thetas) apply_setting(cfg, "theta", t);
  for (const auto& m : f.panels) apply_setting(cfg, "panels", m);
  cfg.json = f.json;
  cfg.criteria = f.criteria;
  cfg.inject_wrong_oracle = f.inject;
  validate(cfg);
  return cfg;
}

void print_summary(const Files& files, const RunConfig& cfg) {
  if (cfg.json) {
    for (const auto& [name, content] : files)
      if (name.size() > 5 && name.substr(name.size() - 5) == ".json") std::cout << content;
    return;
  }
  for (const auto& [name, content] : files)
    std::cout << "wrote " << (std::filesystem::path(cfg.out) / name).string() << " (" << content.size()
              << " bytes)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Angle-conditioned Poisson-Voronoi statistics"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags flags;
  add_shared(app, flags);

  auto* psi = app.add_subcommand("psi", "intensity of the facet points seeing their pair at angle theta");
  auto* crossings = app.add_subcommand("crossings", "crossings of the first axis and their angle marks");
  auto* cell = app.add_subcommand("typical-cell", "facet statistics of the typical cell");
  auto* panels = app.add_subcommand("panel-swap", "fraction of handovers needing a panel swap");
  auto* validate_cmd = app.add_subcommand("validate", "run the acceptance suite");
  validate_cmd->add_option("--criteria", flags.criteria, "criterion numbers to run (default all)")
      ->delimiter(',');
  validate_cmd->add_flag("--inject-wrong-oracle", flags.inject, "perturb the oracles to check the suite can fail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const RunConfig cfg = build_config(command, flags);
    if (command == "validate") {
      const auto outcome = cmd_validate(cfg, [&](const CriterionResult& r) {
        if (!cfg.json) std::cout << criterion_line(r) << std::endl;
      });
      write_files(cfg.out, outcome.files);
      if (cfg.json)
        std::cout << outcome.files.at("validation_report.json");
      else
        std::cout << (outcome.all_pass ? "all criteria pass" : "some criteria FAIL") << "\n";
      return outcome.all_pass ? exit_ok : exit_validation_failed;
    }
    Files files;
    if (command == "psi") files = cmd_psi(cfg);
    else if (command == "crossings") files = cmd_crossings(cfg);
    else if (command == "typical-cell") files = cmd_typical_cell(cfg);
    else files = cmd_panel_swap(cfg);
    write_files(cfg.out, files);
    print_summary(files, cfg);
    return exit_ok;
  } catch (const DegenerateConfiguration& e) {
    std::cerr << "pvangle: " << e.what() << "\n";
    return exit_degenerate;
  } catch (const std::exception& e) {
    std::cerr << "pvangle: " << e.what() << "\n";
    return exit_config;
  }
  (void)psi;
  (void)crossings;
  (void)cell;
  (void)panels;
}
