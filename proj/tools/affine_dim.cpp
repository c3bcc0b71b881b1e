// affine-dim: command-line front end to the affdim library.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "affdim/cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Dimension theory of planar self-affine systems"};
  app.name("affine-dim");

  std::string command;
  std::string spec_path;
  affdim::cli::CommandOptions opts;
  std::string out_dir;
  std::size_t depth = 0;
  double tol = 0.0;
  std::string s_grid;
  std::string words;

  app.add_option("command", command, "dimension | pressure | directions | transversality | render")
      ->required()
      ->check(CLI::IsMember({"dimension", "pressure", "directions", "transversality", "render"}));
  app.add_option("--spec", spec_path, "system spec (JSON)")->required();
  app.add_option("--seed", opts.seed, "seed for all sampled checks")->default_val(0);
  app.add_option("--out", out_dir, "write outputs into this directory");
  auto* depth_opt = app.add_option("--depth", depth, "depth override for the command");
  auto* tol_opt = app.add_option("--tol", tol, "affinity dimension tolerance")->check(CLI::PositiveNumber);
  app.add_flag("--relaxed-bound", opts.relaxed_bound, "also test the 3/2 bound on s0");
  app.add_option("--s-grid", s_grid, "pressure grid: lo:hi:step or a comma list");
  app.add_option("--words", words, "directions: comma-separated words, symbols 1-based");
  app.add_option("--samples", opts.samples, "random words for the Pi cross-check")->default_val(50);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (!out_dir.empty()) {
    opts.out_dir = out_dir;
  }
  if (depth_opt->count() > 0) {
    opts.depth = depth;
  }
  if (tol_opt->count() > 0) {
    opts.tol = tol;
  }
  try {
    if (!s_grid.empty()) {
      opts.s_grid = affdim::cli::parse_s_grid(s_grid);
    }
  } catch (const std::exception& e) {
    std::cerr << "bad --s-grid: " << e.what() << '\n';
    return 1;
  }
  if (!words.empty()) {
    std::string item;
    for (char ch : words + ",") {
      if (ch == ',') {
        if (!item.empty()) {
          opts.words.push_back(item);
        }
        item.clear();
      } else {
        item += ch;
      }
    }
  }
  return affdim::cli::run_command(command, spec_path, opts, std::cout, std::cerr);
}
