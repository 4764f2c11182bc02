// Runs every acceptance criterion at seed 42 and prints one line per
// criterion. Exit status is nonzero when any criterion fails.

#include <cstdio>
#include <iostream>

#include "pvangle/validation.hpp"

int main(int argc, char** argv) {
  using namespace pvangle::cli;
  RunConfig cfg;
  cfg.command = "validate";
  cfg.workers = 1;
  const std::string out_dir = argc > 1 ? argv[1] : ".";
  try {
    const auto outcome = cmd_validate(cfg, [](const CriterionResult& r) {
      std::cout << criterion_line(r) << std::endl;
    });
    write_files(out_dir, outcome.files);
    std::cout << (outcome.all_pass ? "all criteria passed" : "some criteria failed") << std::endl;
    return outcome.all_pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << std::endl;
    return 2;
  }
}
