#pragma once

#include <sda/rates.hpp>

#include <optional>
#include <string>
#include <vector>

namespace sda {

struct IterationEstimate {
  double epsilon = 0.0;
  std::optional<long> iterations;  // none when rho >= 1
};

struct AnalysisReport {
  Index m = 0;
  Index n = 0;
  bool h_nonsingular = false;
  Index h_rank = 0;
  double rho = 0.0;
  double lower_bound = 0.0;
  Index rank_A = 0;
  double expected_sketch_rank = 0.0;
  std::vector<IterationEstimate> estimates;
  std::vector<std::string> warnings;
};

/// ceil(log(eps) / log(rho)); 1 when rho == 0.
std::optional<long> iterations_for(double rho, double epsilon);

/// H verdict, rho, lower bound and k(eps) for eps in {1e-2, 1e-4, 1e-8}.
/// Throws ContractViolation("analysis unavailable for this sampler") for
/// samplers without an explicit finite support.
AnalysisReport analyze(const ProjectionProblem& problem, const SamplerSpec& spec);

std::string to_text(const AnalysisReport& report);
std::string to_json(const AnalysisReport& report);

}  // namespace sda
