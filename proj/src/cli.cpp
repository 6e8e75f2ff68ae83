#include "cmdp/cli.hpp"

#include "cmdp/artifacts.hpp"
#include "cmdp/model_io.hpp"
#include "cmdp/rates.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace cmdp {

namespace {

using nlohmann::json;

const char* status_name(CheckStatus st) {
  switch (st) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::warn: return "warn";
    case CheckStatus::fail: return "fail";
    case CheckStatus::unchecked: return "unchecked";
    case CheckStatus::hard_error: return "hard_error";
  }
  return "?";
}

Grid grid_for(const ContinuousCMDP& model, int resolution, int cell_nodes) {
  return build_grid(model.space, IVector::Constant(model.space.dim(), resolution), cell_nodes);
}

struct SolveOutcome {
  double value = 0.0;
  double dual_value = 0.0;
  double duality_gap = 0.0;
  double mass_residual = 0.0;
  double balance_residual = 0.0;
  StationaryPolicy policy;
  Matrix zeta;
  Vector delta;
  Vector u;
};

SolveOutcome solve_criterion(const FiniteCMDP& fm, Criterion criterion) {
  SolveOutcome out;
  if (criterion == Criterion::discounted) {
    DiscountedSolution sol = solve_discounted(fm);
    out.value = sol.value;
    out.dual_value = sol.dual.objective;
    out.duality_gap = sol.lp.duality_gap;
    out.mass_residual = std::abs(sol.occupation.mass() - 1.0);
    out.balance_residual = sol.occupation.balance_residual(fm);
    out.policy = sol.policy;
    out.zeta = sol.occupation.zeta;
    out.delta = sol.dual.delta;
    out.u = sol.dual.u;
  } else {
    AverageSolution sol = solve_average(fm);
    out.value = sol.value;
    out.dual_value = sol.delta0 + fm.k.dot(sol.delta);
    out.duality_gap = sol.lp.duality_gap;
    out.mass_residual = std::abs(sol.occupation.mass() - 1.0);
    out.balance_residual = sol.occupation.flow_residual(fm);
    out.policy = sol.policy;
    out.zeta = sol.occupation.zeta;
    out.delta = sol.delta;
    out.u = sol.h;
  }
  return out;
}

double default_escalation_eps(const ContinuousCMDP& model) {
  if (model.reg.alpha_slater.size() > 0 && model.reg.alpha_slater.minCoeff() > 0.0)
    return 0.2 * model.reg.alpha_slater.minCoeff();
  return 0.05 * model.cost.k.minCoeff();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (model_path.empty()) throw std::invalid_argument("config: model path required");
  if (ladder.empty()) throw std::invalid_argument("config: empty n-ladder");
  for (std::size_t i = 0; i + 1 < ladder.size(); ++i)
    if (ladder[i] >= ladder[i + 1])
      throw std::invalid_argument("config: n-ladder must be strictly increasing");
  for (int r : ladder)
    if (r < 1) throw std::invalid_argument("config: ladder resolutions must be >= 1");
  if (eps_policy == EpsPolicy::fixed && eps_value < 0.0)
    throw std::invalid_argument("config: fixed eps must be nonnegative");
  if (eps_policy == EpsPolicy::from_kappa && eps_value <= 0.0)
    throw std::invalid_argument("config: kappa must be positive");
  if (mc.horizon < 1 || mc.replications < 2)
    throw std::invalid_argument("config: MC parameters out of range");
}

int run_sweep(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  const ContinuousCMDP model = load_model(config.model_path);
  const int q = model.cost.q();
  std::filesystem::create_directories(config.out_dir);

  std::vector<std::string> cols = {"model_digest", "grid_digest", "seed",     "version",
                                   "criterion",    "resolution",  "n_states", "eps",
                                   "finite_value", "dual_value",  "duality_gap",
                                   "mass_residual", "balance_residual",
                                   "mc_value",     "mc_value_ci"};
  for (int l = 0; l < q; ++l) {
    cols.push_back("mc_d" + std::to_string(l));
    cols.push_back("mc_d" + std::to_string(l) + "_ci");
    cols.push_back("margin" + std::to_string(l));
  }
  cols.push_back("value_bound");
  cols.push_back("policy_bound");
  cols.push_back("feasible");
  cols.push_back("status");
  CsvWriter csv(config.out_dir + "/sweep.csv", cols);

  json manifest;
  manifest["version"] = kVersion;
  manifest["model"] = config.model_path;
  manifest["model_digest"] = model.digest();
  manifest["criterion"] = to_string(config.criterion);
  manifest["seed"] = config.mc.seed;
  manifest["eps_policy"] = config.eps_policy == EpsPolicy::fixed       ? "fixed"
                           : config.eps_policy == EpsPolicy::from_kappa ? "kappa"
                                                                        : "escalate";
  manifest["eps_value"] = config.eps_value;
  json rows = json::array();
  bool all_ok = true;

  // Resolve the perturbation once.
  double eps = 0.0;
  double kappa = 0.0;
  if (config.eps_policy == EpsPolicy::fixed) {
    eps = config.eps_value;
  } else if (config.eps_policy == EpsPolicy::from_kappa) {
    kappa = config.eps_value;
    const Grid g0 = grid_for(model, config.ladder.front(), config.cell_nodes);
    const RateConstants rc = derive_rate_constants(model, g0);
    const EpsChoice choice = choose_eps(kappa, rc, config.criterion);
    eps = choice.eps;
    manifest["eps_clipped"] = choice.clipped;
  } else {
    eps = default_escalation_eps(model);
  }
  manifest["eps"] = eps;

  for (int r : config.ladder) {
    json row;
    row["resolution"] = r;
    std::string status = "ok";
    std::vector<std::string> cells;
    try {
      const Grid grid = grid_for(model, r, config.cell_nodes);
      FiniteCMDP fm = build_finite_model(model, grid, config.build_tol);
      fm.k.array() -= eps;
      if (fm.k.minCoeff() <= 0.0) throw InfeasibleError("grid too coarse for this eps");
      const SolveOutcome sol = solve_criterion(fm, config.criterion);
      const ExtendedPolicy pol = extend_policy(sol.policy, grid);
      McParams mc = config.mc;
      mc.seed = Rng::mix(config.mc.seed, static_cast<std::uint64_t>(r));
      const EvaluationReport ev = mc_eval_original(model, pol, config.criterion, mc);

      std::string value_bound = "";
      std::string policy_bound = "";
      try {
        const RateConstants rc = derive_rate_constants(model, grid);
        if (config.criterion == Criterion::discounted) {
          value_bound = CsvWriter::num(discounted_value_bound(grid.size(), rc));
        } else {
          value_bound = CsvWriter::num(average_value_bound(grid.size(), rc));
        }
        policy_bound = CsvWriter::num(policy_eval_bound(grid.size(), rc, rc.K_c, rc.sup_c));
      } catch (const std::exception&) {
        // Bounds stay blank when constants are missing or the grid is below
        // the admissible range.
      }

      bool feasible = true;
      for (int l = 0; l < q; ++l) feasible = feasible && ev.feasible[l];

      cells.push_back(u64_hex(model.digest()));
      cells.push_back(u64_hex(grid.digest()));
      cells.push_back(std::to_string(config.mc.seed));
      cells.push_back(kVersion);
      cells.push_back(to_string(config.criterion));
      cells.push_back(std::to_string(r));
      cells.push_back(std::to_string(grid.size()));
      cells.push_back(CsvWriter::num(eps));
      cells.push_back(CsvWriter::num(sol.value));
      cells.push_back(CsvWriter::num(sol.dual_value));
      cells.push_back(CsvWriter::num(sol.duality_gap));
      cells.push_back(CsvWriter::num(sol.mass_residual));
      cells.push_back(CsvWriter::num(sol.balance_residual));
      cells.push_back(CsvWriter::num(ev.value));
      cells.push_back(CsvWriter::num(ev.value_ci));
      for (int l = 0; l < q; ++l) {
        cells.push_back(CsvWriter::num(ev.constraints[l]));
        cells.push_back(CsvWriter::num(ev.constraint_ci[l]));
        cells.push_back(CsvWriter::num(model.cost.k[l] - ev.constraints[l]));
      }
      cells.push_back(value_bound);
      cells.push_back(policy_bound);
      cells.push_back(feasible ? "1" : "0");
      cells.push_back(status);

      row["n_states"] = grid.size();
      row["finite_value"] = sol.value;
      row["mc_value"] = ev.value;
      row["feasible"] = feasible;
      row["status"] = status;
    } catch (const std::exception& e) {
      status = e.what();
      all_ok = false;
      cells.assign(cols.size(), "");
      cells[4] = to_string(config.criterion);
      cells[5] = std::to_string(r);
      cells[2] = std::to_string(config.mc.seed);
      cells[3] = kVersion;
      cells.back() = status;
      row["status"] = status;
    }
    csv.row(cells);
    rows.push_back(std::move(row));
    log << "sweep r=" << r << " " << status << "\n";
  }
  manifest["rows"] = std::move(rows);
  manifest["all_ok"] = all_ok;
  std::ofstream mf(config.out_dir + "/manifest.json");
  mf << manifest.dump(2) << "\n";
  return all_ok ? 0 : 1;
}

int run_validate(const std::string& model_path, double tol, std::uint64_t seed,
                 std::ostream& log) {
  const ContinuousCMDP model = load_model(model_path);
  const ValidationReport rep = validate_model(model, tol, seed);
  for (const auto& c : rep.checks)
    log << status_name(c.status) << "  " << c.name
        << (c.detail.empty() ? "" : "  (" + c.detail + ", worst " + format_double(c.worst) + ")")
        << "\n";
  return rep.hard_errors() ? 1 : 0;
}

int run_discretize(const std::string& model_path, int resolution, int cell_nodes,
                   double build_tol, const std::string& out_path, bool binary,
                   std::ostream& log) {
  const ContinuousCMDP model = load_model(model_path);
  const Grid grid = grid_for(model, resolution, cell_nodes);
  const FiniteCMDP fm = build_finite_model(model, grid, build_tol);
  save_finite_model(fm, out_path, binary);
  log << "n_states " << fm.n_states << " quad_defect " << format_double(fm.quad_defect)
      << " digest " << fm.digest() << "\n";
  return 0;
}

int run_solve(const std::string& model_path, const std::string& fm_path, int resolution,
              int cell_nodes, double build_tol, Criterion criterion, double eps,
              const std::string& out_dir, std::ostream& log) {
  std::filesystem::create_directories(out_dir);
  const ContinuousCMDP model = load_model(model_path);
  Grid grid = grid_for(model, resolution, cell_nodes);
  FiniteCMDP fm =
      fm_path.empty() ? build_finite_model(model, grid, build_tol) : load_finite_model(fm_path);
  if (fm.n_states != grid.size())
    throw std::invalid_argument("solve: finite-model artifact does not match the resolution");
  fm.k.array() -= eps;
  const SolveOutcome sol = solve_criterion(fm, criterion);

  SolutionArtifact art;
  art.criterion = criterion;
  art.value = sol.value;
  art.zeta = sol.zeta;
  art.policy = sol.policy.prob;
  art.delta = sol.delta;
  art.u = sol.u;
  art.dual_objective = sol.dual_value;
  art.mass_residual = sol.mass_residual;
  art.balance_residual = sol.balance_residual;
  art.duality_gap = sol.duality_gap;
  art.model_digest = model.digest();
  art.grid_digest = grid.digest();
  save_solution(art, out_dir + "/solution.json");
  save_extended_policy(extend_policy(sol.policy, grid), out_dir + "/policy.json");
  log << "value " << format_double(sol.value) << " dual " << format_double(sol.dual_value)
      << " gap " << format_double(sol.duality_gap) << "\n";
  return 0;
}

int run_extend(const std::string& model_path, int resolution, int cell_nodes, double build_tol,
               Criterion criterion, double eps, const std::string& out_path, std::ostream& log) {
  const ContinuousCMDP model = load_model(model_path);
  const Grid grid = grid_for(model, resolution, cell_nodes);
  auto [pol, rep] = perturbed_solve(model, grid, eps, criterion);
  save_extended_policy(pol, out_path);
  log << "finite_value " << format_double(rep.finite_value) << " eps " << format_double(rep.eps)
      << "\n";
  return 0;
}

int run_evaluate(const std::string& model_path, const std::string& policy_path,
                 Criterion criterion, const McParams& mc, const std::string& out_path,
                 std::ostream& log) {
  const ContinuousCMDP model = load_model(model_path);
  const ExtendedPolicy pol = load_extended_policy(policy_path);
  const EvaluationReport ev = mc_eval_original(model, pol, criterion, mc);
  json j;
  j["criterion"] = to_string(criterion);
  j["value"] = ev.value;
  j["value_ci"] = ev.value_ci;
  j["bias_bound"] = ev.bias_bound;
  j["horizon"] = ev.horizon;
  j["replications"] = ev.replications;
  j["burn_in"] = ev.burn_in;
  j["seed"] = ev.seed;
  j["confidence"] = ev.confidence;
  json cons = json::array();
  for (int l = 0; l < ev.constraints.size(); ++l) {
    json cl;
    cl["estimate"] = ev.constraints[l];
    cl["ci"] = ev.constraint_ci[l];
    cl["k"] = ev.k[l];
    cl["feasible"] = static_cast<bool>(ev.feasible[l]);
    cons.push_back(std::move(cl));
  }
  j["constraints"] = std::move(cons);
  if (!out_path.empty()) {
    std::ofstream os(out_path);
    os << j.dump(2) << "\n";
  }
  log << j.dump(2) << "\n";
  return 0;
}

int run_rates(const std::string& model_path, const std::vector<int>& ladder, int cell_nodes,
              const std::string& out_path, std::ostream& log) {
  const ContinuousCMDP model = load_model(model_path);
  if (ladder.empty()) throw std::invalid_argument("rates: need a ladder of resolutions");
  const Grid g0 = grid_for(model, ladder.front(), cell_nodes);
  const RateConstants rc = derive_rate_constants(model, g0);
  log << "dim " << rc.dim << " q " << rc.q << " beta " << rc.beta << "\n"
      << "alpha_cov " << format_double(rc.alpha_cov) << " K_c " << format_double(rc.K_c)
      << " K_p " << format_double(rc.K_p) << " G_p " << format_double(rc.G_p) << "\n"
      << "sup_c " << format_double(rc.sup_c) << " slater_min "
      << format_double(rc.alpha_slater_min) << "\n";
  if (rc.alpha_slater_min > 0.0) log << "K " << format_double(rc.K()) << "\n";
  if (rc.kappa_erg > 0.0)
    log << "R " << rc.R << " kappa_erg " << format_double(rc.kappa_erg) << "\n";

  CsvWriter csv(out_path, {"resolution", "n_states", "discounted_value_bound",
                           "policy_bound_c", "eps_c", "eps_max", "average_value_bound"});
  for (int r : ladder) {
    const Grid grid = grid_for(model, r, cell_nodes);
    const long n = grid.size();
    std::vector<std::string> cells = {std::to_string(r), std::to_string(n)};
    auto guarded = [&](auto&& f) {
      try {
        return CsvWriter::num(f());
      } catch (const std::exception&) {
        return std::string("");
      }
    };
    cells.push_back(guarded([&] { return discounted_value_bound(n, rc); }));
    cells.push_back(guarded([&] { return policy_eval_bound(n, rc, rc.K_c, rc.sup_c); }));
    cells.push_back(guarded([&] { return average_eps_curves(n, rc).eps_c; }));
    cells.push_back(guarded([&] { return average_eps_curves(n, rc).eps_max; }));
    cells.push_back(guarded([&] { return average_value_bound(n, rc); }));
    csv.row(cells);
  }
  return 0;
}

int run_apply(const std::string& policy_path, const std::string& states_path,
              const std::string& out_path, std::ostream& log) {
  const ExtendedPolicy pol = load_extended_policy(policy_path);
  std::ifstream in(states_path);
  if (!in) throw std::runtime_error("cannot open states file: " + states_path);
  const int na = pol.base.n_actions();
  std::vector<std::string> cols;
  for (int ax = 0; ax < pol.grid.dim(); ++ax) cols.push_back("x" + std::to_string(ax));
  cols.push_back("cell");
  for (int a = 0; a < na; ++a) cols.push_back("p_action" + std::to_string(a));
  CsvWriter csv(out_path, cols);
  std::string line;
  long rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0])))
      continue;  // skip headers/comments
    std::stringstream ss(line);
    Vector x(pol.grid.dim());
    std::string cell;
    for (int ax = 0; ax < pol.grid.dim(); ++ax) {
      if (!std::getline(ss, cell, ',')) throw std::runtime_error("states file: short row");
      x[ax] = std::stod(cell);
    }
    const int idx = quantize_point(pol.grid, x);
    std::vector<std::string> out;
    for (int ax = 0; ax < pol.grid.dim(); ++ax) out.push_back(CsvWriter::num(x[ax]));
    out.push_back(std::to_string(idx));
    for (int a = 0; a < na; ++a) out.push_back(CsvWriter::num(pol.base.prob(idx, a)));
    csv.row(out);
    ++rows;
  }
  log << "applied policy to " << rows << " states\n";
  return 0;
}

}  // namespace cmdp
