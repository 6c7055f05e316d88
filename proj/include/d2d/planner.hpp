#pragma once

#include <span>
#include <string>
#include <vector>

#include "d2d/access.hpp"
#include "d2d/analytic.hpp"
#include "d2d/simkit.hpp"

namespace d2d {

/// Principal branch W0 of the Lambert function, x >= -1/e.
double lambert_w0(double x);

/// Solves p^(a x + b) = c x + d for x on the principal branch.
double solve_exp_linear(double p, double a, double b, double c, double d);

/// Coverage-degradation constraint: coverage >= (1 - mu) * max coverage.
struct ConstraintSpec {
  double mu = 0.3;
  double gamma = 1.0;

  void validate() const;
};

/// Approximately ASE-optimal activation probability, capped at 1. As
/// lambda_d -> 0 this tends to its continuous limit rather than jumping to 1.
double optimal_access_prob(const SystemParams& params);

/// SIR threshold that activates a fraction p_s of candidates.
double optimal_sir_threshold(double p_s, const SystemParams& params);

/// Smallest guard radius (0.1 m resolution) meeting the coverage constraint
/// with p_s * lambda_d active links. `delta_max` <= 0 picks 3/sqrt(pi lambda_m).
/// Throws InfeasibleError when even delta_max is not enough.
double solve_guard_radius(double p_s, const ConstraintSpec& constraint, const SystemParams& params,
                          const QuadratureSettings& quad = {}, double delta_max = 0.0);

struct PlanResult {
  double delta_star = 0.0;
  double p_s_star = 1.0;
  double G_star = 0.0;
  double predicted_ase = 0.0;
  double predicted_coverage = 0.0;
  /// predicted_coverage - target; non-negative up to quadrature error.
  double constraint_residual = 0.0;
  double p_max = 0.0;
  double target = 0.0;
  std::vector<std::string> warnings;
};

/// Access probability first, then the guard radius, then the threshold.
PlanResult decoupled_optimize(const SystemParams& params, const ConstraintSpec& constraint,
                              const QuadratureSettings& quad = {});

struct SearchResult {
  PlanResult plan;
  GridPoint best;
  std::vector<GridPoint> grid;
};

/// Monte Carlo grid search over (delta, p_s) with the top-fraction scheme.
/// A point is feasible when its coverage estimate reaches `target_coverage`.
/// Throws InfeasibleError if no grid point is feasible.
SearchResult exhaustive_search(const ExperimentConfig& base, std::span<const double> deltas,
                               std::span<const double> fractions, double target_coverage);

/// Scheme parameters for a comparison run under the coverage constraint.
///   proposed_threshold / proposed_top_fraction  decoupled plan
///   guard_zone_only                              guard radius for p_s = 1
///   no_ac                                        nothing to tune
///   channel_aware                                Monte Carlo pick over `fractions`, each with
///                                                its own guard radius; uses `base` for the runs
SchemeSpec tune_scheme(SchemeKind kind, const ExperimentConfig& base,
                       const ConstraintSpec& constraint, std::span<const double> fractions = {},
                       const QuadratureSettings& quad = {});

}  // namespace d2d
