#pragma once

#include "cmdp/average.hpp"
#include "cmdp/policy.hpp"

#include <fstream>

namespace cmdp {

/// FiniteCMDP replay artifact. Binary layout: magic "CMDPFM1\0", int64 dims,
/// then little-endian doubles row-major; JSON alternative for inspection.
void save_finite_model(const FiniteCMDP& fm, const std::string& path, bool binary = true);
FiniteCMDP load_finite_model(const std::string& path);

/// Solution artifact (JSON): value, occupation table, policy, duals and
/// residual diagnostics, stamped with the model digest.
struct SolutionArtifact {
  Criterion criterion = Criterion::discounted;
  double value = 0.0;
  Matrix zeta;
  Matrix policy;
  Vector delta;
  Vector u;  // discounted value duals, or relative values for average
  double dual_objective = 0.0;
  double mass_residual = 0.0;
  double balance_residual = 0.0;
  double duality_gap = 0.0;
  std::uint64_t model_digest = 0;
  std::uint64_t grid_digest = 0;
};

void save_solution(const SolutionArtifact& art, const std::string& path);
SolutionArtifact load_solution(const std::string& path);

/// Extended policy artifact: (grid digest, resolution, box, policy table).
void save_extended_policy(const ExtendedPolicy& pol, const std::string& path);
ExtendedPolicy load_extended_policy(const std::string& path);

/// Deterministic CSV emitter: fixed column order, %.17g doubles, "\n" ends.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::vector<std::string> columns);
  void row(const std::vector<std::string>& cells);
  static std::string num(double v) { return format_double(v); }

 private:
  std::ofstream out_;
  std::size_t n_cols_;
};

}  // namespace cmdp
