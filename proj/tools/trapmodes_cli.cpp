// trapmodes: certify / solve / verify / report from a JSON config.

#include <CLI11.hpp>
#include <iostream>
#include <sstream>

#include "trapmodes/errors.hpp"
#include "trapmodes/workflow.hpp"

namespace {

trapmodes::GridSpec parse_grid(const std::string& text, trapmodes::GridSpec base) {
  std::stringstream ss(text);
  std::string part;
  std::vector<double> vals;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw trapmodes::SpecError("--grid expects hx,hy,L");
    }
  }
  if (vals.size() != 3) throw trapmodes::SpecError("--grid expects hx,hy,L");
  base.hx = vals[0];
  base.hy = vals[1];
  base.l = vals[2];
  return base;
}

int report(const trapmodes::CommandResult& r) {
  for (const auto& n : r.notices) std::cout << "notice: " << n << '\n';
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trapped-mode certificates and finite-difference checks for obstructed waveguides"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  int budget = -1;
  int k = -1;
  std::string grid;
  bool coarse = false;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config_path, "JSON run configuration");
    if (needs_config) opt->required();
    sub->add_option("--out", out_dir, "output directory");
  };
  auto* certify = app.add_subcommand("certify", "optimize trial functions and certify each class");
  add_common(certify, true);
  certify->add_option("--budget", budget, "simplex evaluations per class");
  auto* solve = app.add_subcommand("solve", "finite-difference eigenvalues per symmetry class");
  add_common(solve, true);
  solve->add_option("--budget", budget, "simplex evaluations per class");
  solve->add_option("--grid", grid, "hx,hy,L");
  solve->add_option("--k", k, "eigenpairs per class");
  auto* verify = app.add_subcommand("verify", "identity and decomposition residuals");
  add_common(verify, true);
  verify->add_flag("--coarse", coarse, "loose quadrature; failures become warnings");
  auto* rep = app.add_subcommand("report", "markdown summary and plot data from earlier runs");
  add_common(rep, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (rep->parsed()) return report(trapmodes::run_report(out_dir));
    trapmodes::RunConfig cfg = trapmodes::load_config(config_path);
    if (budget >= 0) {
      if (budget < 1) throw trapmodes::SpecError("--budget must be at least 1");
      cfg.budget = budget;
    }
    if (k >= 0) {
      if (k < 1) throw trapmodes::SpecError("--k must be at least 1");
      cfg.k = k;
    }
    if (!grid.empty()) cfg.grid = parse_grid(grid, cfg.grid);
    trapmodes::renormalize(cfg);
    if (certify->parsed()) return report(trapmodes::run_certify(cfg, out_dir));
    if (solve->parsed()) {
      trapmodes::check_grid(cfg.spec, cfg.grid);
      return report(trapmodes::run_solve(cfg, out_dir));
    }
    return report(trapmodes::run_verify(cfg, out_dir, coarse));
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
