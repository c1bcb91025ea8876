#include <sda/analyze.hpp>

#include <sda/io.hpp>

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace sda {

std::optional<long> iterations_for(double rho, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ContractViolation("epsilon must lie in (0, 1)");
  if (rho <= 0.0) return 1;
  if (rho >= 1.0) return std::nullopt;
  return static_cast<long>(std::ceil(std::log(epsilon) / std::log(rho)));
}

AnalysisReport analyze(const ProjectionProblem& problem, const SamplerSpec& spec) {
  if (!spec.has_finite_support()) throw ContractViolation("analysis unavailable for this sampler");
  if (spec.m != problem.rows()) throw ContractViolation("analyze: sampler m does not match A");
  const RateReport rates = rate_report(to_discrete(spec), problem);

  AnalysisReport out;
  out.m = problem.rows();
  out.n = problem.cols();
  out.h_nonsingular = rates.h_nonsingular;
  out.h_rank = rates.h_rank;
  out.rho = rates.rho;
  out.lower_bound = rates.lower_bound;
  out.rank_A = rates.rank_A;
  out.expected_sketch_rank = rates.expected_sketch_rank;
  for (double eps : {1e-2, 1e-4, 1e-8}) out.estimates.push_back({eps, iterations_for(out.rho, eps)});
  if (!out.h_nonsingular) {
    out.warnings.push_back("H is singular (rank " + std::to_string(out.h_rank) + " < m = " +
                           std::to_string(out.m) + "): rho carries no convergence guarantee");
  }
  return out;
}

std::string to_text(const AnalysisReport& r) {
  std::ostringstream os;
  os << "problem: m = " << r.m << ", n = " << r.n << ", rank(A) = " << r.rank_A << '\n';
  os << "H: " << (r.h_nonsingular ? "nonsingular" : "SINGULAR") << " (rank " << r.h_rank << ")\n";
  os << "rho = " << io::format_double(r.rho) << '\n';
  os << "lower bound = " << io::format_double(r.lower_bound)
     << "  (E[rank(S^T A)] = " << io::format_double(r.expected_sketch_rank) << ")\n";
  for (const auto& e : r.estimates) {
    os << "k(" << e.epsilon << ") = ";
    if (e.iterations) {
      os << *e.iterations;
    } else {
      os << "unbounded";
    }
    os << '\n';
  }
  for (const auto& w : r.warnings) os << "warning: " << w << '\n';
  return os.str();
}

std::string to_json(const AnalysisReport& r) {
  nlohmann::ordered_json j;
  j["m"] = r.m;
  j["n"] = r.n;
  j["rank_A"] = r.rank_A;
  j["h_nonsingular"] = r.h_nonsingular;
  j["h_rank"] = r.h_rank;
  j["rho"] = r.rho;
  j["lower_bound"] = r.lower_bound;
  j["expected_sketch_rank"] = r.expected_sketch_rank;
  auto& est = j["iteration_estimates"] = nlohmann::ordered_json::array();
  for (const auto& e : r.estimates) {
    nlohmann::ordered_json item;
    item["epsilon"] = e.epsilon;
    item["iterations"] = e.iterations ? nlohmann::ordered_json(*e.iterations) : nullptr;
    est.push_back(item);
  }
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

}  // namespace sda
