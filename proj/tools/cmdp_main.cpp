#include "cmdp/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace cmdp;

int main(int argc, char** argv) {
  CLI::App app{"Finite-state approximation toolkit for constrained MDPs"};
  app.require_subcommand(1);

  std::string model_path, fm_path, out_dir = "out", out_path, policy_path, states_path;
  std::string criterion_str = "discounted", eps_str, ladder_str;
  int resolution = 64, cell_nodes = 4;
  double build_tol = 1e-6, tol = 1e-3, eps = 0.0;
  McParams mc;

  auto criterion_of = [](const std::string& s) {
    if (s == "discounted") return Criterion::discounted;
    if (s == "average") return Criterion::average;
    throw CLI::ValidationError("--criterion must be discounted or average");
  };
  auto ladder_of = [](const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
  };

  auto* v = app.add_subcommand("validate", "audit a model specification");
  v->add_option("--model", model_path)->required();
  v->add_option("--tol", tol);
  v->add_option("--seed", mc.seed);

  auto* d = app.add_subcommand("discretize", "build and store a finite model");
  d->add_option("--model", model_path)->required();
  d->add_option("--resolution", resolution)->required();
  d->add_option("--nodes", cell_nodes);
  d->add_option("--build-tol", build_tol);
  d->add_option("--out", out_path)->required();
  bool as_json = false;
  d->add_flag("--json", as_json, "store the artifact as JSON instead of binary");

  auto* s = app.add_subcommand("solve", "solve the finite constrained problem");
  s->add_option("--model", model_path)->required();
  s->add_option("--fm", fm_path, "replay a stored finite model");
  s->add_option("--resolution", resolution)->required();
  s->add_option("--nodes", cell_nodes);
  s->add_option("--build-tol", build_tol);
  s->add_option("--criterion", criterion_str);
  s->add_option("--eps", eps, "constraint perturbation");
  s->add_option("--out", out_dir);

  auto* x = app.add_subcommand("extend", "solve and extend the policy to the continuum");
  x->add_option("--model", model_path)->required();
  x->add_option("--resolution", resolution)->required();
  x->add_option("--nodes", cell_nodes);
  x->add_option("--build-tol", build_tol);
  x->add_option("--criterion", criterion_str);
  x->add_option("--eps", eps);
  x->add_option("--out", out_path)->required();

  auto* e = app.add_subcommand("evaluate", "Monte Carlo evaluation of a stored policy");
  e->add_option("--model", model_path)->required();
  e->add_option("--policy", policy_path)->required();
  e->add_option("--criterion", criterion_str);
  e->add_option("--T", mc.horizon);
  e->add_option("--N", mc.replications);
  e->add_option("--burn-in", mc.burn_in);
  e->add_option("--seed", mc.seed);
  e->add_option("--confidence", mc.confidence);
  e->add_option("--out", out_path);

  auto* r = app.add_subcommand("rates", "rate constants and bound curves");
  r->add_option("--model", model_path)->required();
  r->add_option("--ladder", ladder_str)->required();
  r->add_option("--nodes", cell_nodes);
  r->add_option("--out", out_path)->required();

  auto* w = app.add_subcommand("sweep", "n-ladder experiment with reports");
  ExperimentConfig cfg;
  w->add_option("--model", cfg.model_path)->required();
  w->add_option("--criterion", criterion_str);
  w->add_option("--ladder", ladder_str)->required();
  w->add_option("--eps", eps_str, "fixed:<v> | kappa:<v> | escalate");
  w->add_option("--seed", cfg.mc.seed);
  w->add_option("--T", cfg.mc.horizon);
  w->add_option("--N", cfg.mc.replications);
  w->add_option("--burn-in", cfg.mc.burn_in);
  w->add_option("--nodes", cfg.cell_nodes);
  w->add_option("--build-tol", cfg.build_tol);
  w->add_option("--out", cfg.out_dir);
  w->set_config("--config", "", "config file (flags given on the command line win)");

  auto* ap = app.add_subcommand("apply", "map states to action distributions");
  ap->add_option("--policy", policy_path)->required();
  ap->add_option("--states", states_path)->required();
  ap->add_option("--out", out_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (v->parsed()) return run_validate(model_path, tol, mc.seed, std::cout);
    if (d->parsed())
      return run_discretize(model_path, resolution, cell_nodes, build_tol, out_path, !as_json,
                            std::cout);
    if (s->parsed())
      return run_solve(model_path, fm_path, resolution, cell_nodes, build_tol,
                       criterion_of(criterion_str), eps, out_dir, std::cout);
    if (x->parsed())
      return run_extend(model_path, resolution, cell_nodes, build_tol,
                        criterion_of(criterion_str), eps, out_path, std::cout);
    if (e->parsed())
      return run_evaluate(model_path, policy_path, criterion_of(criterion_str), mc, out_path,
                          std::cout);
    if (r->parsed())
      return run_rates(model_path, ladder_of(ladder_str), cell_nodes, out_path, std::cout);
    if (w->parsed()) {
      cfg.criterion = criterion_of(criterion_str);
      cfg.ladder = ladder_of(ladder_str);
      if (eps_str.empty() || eps_str == "escalate") {
        cfg.eps_policy = eps_str.empty() ? EpsPolicy::fixed : EpsPolicy::escalate;
        cfg.eps_value = 0.0;
      } else if (eps_str.rfind("fixed:", 0) == 0) {
        cfg.eps_policy = EpsPolicy::fixed;
        cfg.eps_value = std::stod(eps_str.substr(6));
      } else if (eps_str.rfind("kappa:", 0) == 0) {
        cfg.eps_policy = EpsPolicy::from_kappa;
        cfg.eps_value = std::stod(eps_str.substr(6));
      } else {
        throw CLI::ValidationError("--eps must be fixed:<v>, kappa:<v> or escalate");
      }
      return run_sweep(cfg, std::cout);
    }
    if (ap->parsed()) return run_apply(policy_path, states_path, out_path, std::cout);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}
