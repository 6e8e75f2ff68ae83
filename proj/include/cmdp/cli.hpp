#pragma once

#include "cmdp/evaluate.hpp"

#include <iosfwd>

namespace cmdp {

enum class EpsPolicy { fixed, from_kappa, escalate };

struct ExperimentConfig {
  std::string model_path;
  Criterion criterion = Criterion::discounted;
  std::vector<int> ladder;  // per-axis resolutions, strictly increasing
  EpsPolicy eps_policy = EpsPolicy::fixed;
  double eps_value = 0.0;  // eps for "fixed", kappa for "from_kappa"
  McParams mc;
  std::string out_dir = "out";
  int cell_nodes = 4;
  double build_tol = 1e-6;
  int escalate_cap = 4096;

  void validate() const;
};

/// Run the n-ladder experiment; emits <out>/sweep.csv and
/// <out>/manifest.json. Per-n failures are recorded and the sweep continues;
/// the return value is 0 iff every requested stage succeeded.
int run_sweep(const ExperimentConfig& config, std::ostream& log);

int run_validate(const std::string& model_path, double tol, std::uint64_t seed,
                 std::ostream& log);
int run_discretize(const std::string& model_path, int resolution, int cell_nodes,
                   double build_tol, const std::string& out_path, bool binary,
                   std::ostream& log);
int run_solve(const std::string& model_path, const std::string& fm_path, int resolution,
              int cell_nodes, double build_tol, Criterion criterion, double eps,
              const std::string& out_dir, std::ostream& log);
int run_extend(const std::string& model_path, int resolution, int cell_nodes, double build_tol,
               Criterion criterion, double eps, const std::string& out_path, std::ostream& log);
int run_evaluate(const std::string& model_path, const std::string& policy_path,
                 Criterion criterion, const McParams& mc, const std::string& out_path,
                 std::ostream& log);
int run_rates(const std::string& model_path, const std::vector<int>& ladder, int cell_nodes,
              const std::string& out_path, std::ostream& log);
int run_apply(const std::string& policy_path, const std::string& states_path,
              const std::string& out_path, std::ostream& log);

}  // namespace cmdp
