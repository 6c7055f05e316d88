#include "d2d/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "d2d/errors.hpp"

namespace d2d {

namespace {

constexpr double kInvE = 1.0 / std::numbers::e;
constexpr double kDeltaResolution = 0.1;

double initial_guess(double x) {
  if (x < -0.25) {
    // Series about the branch point.
    const double p = std::sqrt(2.0 * (std::numbers::e * x + 1.0));
    return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  }
  if (x < 3.0) return std::log1p(x) * (1.0 - std::log1p(std::log1p(x)) / (2.0 + std::log1p(x)));
  const double l1 = std::log(x);
  const double l2 = std::log(l1);
  return l1 - l2 + l2 / l1;
}

SystemParams with_gamma(SystemParams params, double gamma) {
  params.gamma = gamma;
  return params;
}

}  // namespace

double lambert_w0(double x) {
  if (std::isnan(x) || x < -kInvE) throw std::domain_error("lambert_w0: x < -1/e");
  if (x == 0.0) return 0.0;
  if (x == -kInvE) return -1.0;
  if (std::isinf(x)) return x;
  double w = initial_guess(x);
  for (int it = 0; it < 100; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    w -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(w)))
      break;
  }
  return w;
}

double solve_exp_linear(double p, double a, double b, double c, double d) {
  if (!(p > 0.0) || p == 1.0 || a == 0.0 || c == 0.0)
    throw ParameterError("solve_exp_linear: need p > 0, p != 1, a != 0, c != 0");
  const double lp = std::log(p);
  const double arg = -(a * lp / c) * std::pow(p, b - a * d / c);
  return -lambert_w0(arg) / (a * lp) - d / c;
}

void ConstraintSpec::validate() const {
  if (!(mu >= 0.0 && mu <= 1.0)) throw ParameterError("mu must lie in [0,1]");
  if (!(gamma > 0.0)) throw ParameterError("gamma must be positive");
}

double optimal_access_prob(const SystemParams& params) {
  params.validate();
  const auto [xi, kappa] = derive(params);
  const double scale = xi * std::pow(params.beta, 2.0 / params.alpha);
  const double k = params.lambda_d * scale;
  const double floor_term = std::exp(-scale * kappa * params.lambda_m);
  if (k == 0.0) return std::min(floor_term, 1.0);
  return std::min(lambert_w0(k * floor_term) / k, 1.0);
}

double optimal_sir_threshold(double p_s, const SystemParams& params) {
  params.validate();
  return threshold_from_access_prob(p_s, params);
}

double solve_guard_radius(double p_s, const ConstraintSpec& constraint, const SystemParams& params,
                          const QuadratureSettings& quad, double delta_max) {
  constraint.validate();
  params.validate();
  if (!(p_s >= 0.0 && p_s <= 1.0)) throw ParameterError("p_s must lie in [0,1]");
  if (delta_max <= 0.0) delta_max = 3.0 / std::sqrt(std::numbers::pi * params.lambda_m);
  const SystemParams p = with_gamma(params, constraint.gamma);
  const double target = (1.0 - constraint.mu) * max_cellular_coverage(p, quad);
  const double density = p_s * p.lambda_d;
  auto coverage = [&](double delta) {
    return cellular_coverage(p.gamma, density, delta, p, quad);
  };
  if (density == 0.0 || coverage(0.0) >= target) return 0.0;
  const double at_max = coverage(delta_max);
  if (at_max < target) {
    std::ostringstream msg;
    msg << "coverage constraint infeasible: " << at_max << " at delta " << delta_max
        << " m, need " << target;
    throw InfeasibleError(msg.str(), at_max, target);
  }
  double lo = 0.0;
  double hi = delta_max;
  while (hi - lo > kDeltaResolution) {
    const double mid = 0.5 * (lo + hi);
    (coverage(mid) >= target ? hi : lo) = mid;
  }
  return hi;
}

PlanResult decoupled_optimize(const SystemParams& params, const ConstraintSpec& constraint,
                              const QuadratureSettings& quad) {
  PlanResult r;
  const SystemParams p = with_gamma(params, constraint.gamma);
  r.p_s_star = optimal_access_prob(p);
  r.delta_star = solve_guard_radius(r.p_s_star, constraint, p, quad);
  r.G_star = optimal_sir_threshold(r.p_s_star, p);
  r.p_max = max_cellular_coverage(p, quad);
  r.target = (1.0 - constraint.mu) * r.p_max;
  r.predicted_coverage =
      cellular_coverage(p.gamma, r.p_s_star * p.lambda_d, r.delta_star, p, quad);
  r.constraint_residual = r.predicted_coverage - r.target;
  r.predicted_ase = d2d_ase_two_stage(r.delta_star, r.p_s_star, p, AseRegime::piecewise);
  if (!guard_zone_is_tight(r.delta_star, p.lambda_m)) {
    std::ostringstream msg;
    msg << "guard radius " << r.delta_star
        << " m is beyond half the typical cell radius; hole-process approximations loosen";
    r.warnings.push_back(msg.str());
  }
  return r;
}

SearchResult exhaustive_search(const ExperimentConfig& base, std::span<const double> deltas,
                               std::span<const double> fractions, double target_coverage) {
  if (deltas.empty() || fractions.empty()) throw ParameterError("exhaustive_search: empty grid");
  SearchResult out;
  out.grid = evaluate_top_fraction_grid(base, deltas, fractions);
  const GridPoint* best = nullptr;
  double best_coverage = 0.0;
  for (const auto& g : out.grid) {
    best_coverage = std::max(best_coverage, g.cellular_coverage.mean);
    if (g.cellular_coverage.mean < target_coverage) continue;
    if (best == nullptr || g.ase.mean > best->ase.mean) best = &g;
  }
  if (best == nullptr)
    throw InfeasibleError("no feasible grid point", best_coverage, target_coverage);
  out.best = *best;
  PlanResult& plan = out.plan;
  plan.delta_star = best->delta;
  plan.p_s_star = best->p_s;
  plan.G_star = best->p_s > 0.0 ? threshold_from_access_prob(best->p_s, base.system)
                                 : std::numeric_limits<double>::infinity();
  plan.predicted_ase = best->ase.mean;
  plan.predicted_coverage = best->cellular_coverage.mean;
  plan.target = target_coverage;
  plan.constraint_residual = plan.predicted_coverage - target_coverage;
  return out;
}

SchemeSpec tune_scheme(SchemeKind kind, const ExperimentConfig& base,
                       const ConstraintSpec& constraint, std::span<const double> fractions,
                       const QuadratureSettings& quad) {
  const SystemParams& params = base.system;
  SchemeSpec spec;
  spec.kind = kind;
  switch (kind) {
    case SchemeKind::proposed_threshold: {
      const PlanResult plan = decoupled_optimize(params, constraint, quad);
      spec.delta = plan.delta_star;
      spec.sir_threshold = plan.G_star;
      break;
    }
    case SchemeKind::proposed_top_fraction: {
      const PlanResult plan = decoupled_optimize(params, constraint, quad);
      spec.delta = plan.delta_star;
      spec.access_fraction = plan.p_s_star;
      break;
    }
    case SchemeKind::guard_zone_only:
      spec.delta = solve_guard_radius(1.0, constraint, params, quad);
      break;
    case SchemeKind::no_ac:
      break;
    case SchemeKind::channel_aware: {
      if (fractions.empty()) throw ParameterError("channel-aware tuning needs candidate fractions");
      double best_ase = -1.0;
      for (double p : fractions) {
        ExperimentConfig c = base;
        c.collect_sir_samples = false;
        c.ccdf_db.clear();
        c.scheme = SchemeSpec{SchemeKind::channel_aware,
                              solve_guard_radius(p, constraint, params, quad), std::nullopt, p,
                              std::nullopt};
        const double ase = run_experiment(c).ase.mean;
        if (ase > best_ase) {
          best_ase = ase;
          spec = c.scheme;
        }
      }
      break;
    }
  }
  spec.validate();
  return spec;
}

}  // namespace d2d
