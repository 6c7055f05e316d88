#include "d2d/access.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "d2d/errors.hpp"

namespace d2d {

std::string_view to_string(SchemeKind kind) noexcept {
  switch (kind) {
    case SchemeKind::proposed_threshold: return "proposed_threshold";
    case SchemeKind::proposed_top_fraction: return "proposed_top_fraction";
    case SchemeKind::channel_aware: return "channel_aware";
    case SchemeKind::guard_zone_only: return "guard_zone_only";
    case SchemeKind::no_ac: return "no_ac";
  }
  return "unknown";
}

SchemeKind scheme_kind_from_string(std::string_view name) {
  for (auto k : {SchemeKind::proposed_threshold, SchemeKind::proposed_top_fraction,
                 SchemeKind::channel_aware, SchemeKind::guard_zone_only, SchemeKind::no_ac})
    if (to_string(k) == name) return k;
  throw ParameterError("unknown scheme kind '" + std::string(name) + "'");
}

namespace {

void check_fraction(double p_s) {
  if (!(p_s >= 0.0 && p_s <= 1.0)) throw ParameterError("access fraction must lie in [0,1]");
}

}  // namespace

void SchemeSpec::validate() const {
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw ParameterError("guard zone radius must be >= 0");
  switch (kind) {
    case SchemeKind::proposed_threshold:
      if (!sir_threshold) throw ParameterError("proposed_threshold requires an SIR threshold G");
      if (!(*sir_threshold > 0.0)) throw ParameterError("SIR threshold G must be positive");
      break;
    case SchemeKind::proposed_top_fraction:
      if (!access_fraction) throw ParameterError("proposed_top_fraction requires p_s");
      check_fraction(*access_fraction);
      break;
    case SchemeKind::channel_aware:
      if (access_fraction.has_value() == gain_threshold.has_value())
        throw ParameterError("channel_aware requires exactly one of G_min or p_s");
      if (access_fraction) check_fraction(*access_fraction);
      if (gain_threshold && !(*gain_threshold >= 0.0))
        throw ParameterError("gain threshold G_min must be >= 0");
      break;
    case SchemeKind::guard_zone_only:
      break;
    case SchemeKind::no_ac:
      if (delta != 0.0) throw ParameterError("no_ac uses no guard zone; delta must be 0");
      break;
  }
}

bool ActiveSet::is_active(Index id) const {
  return std::binary_search(active_ids.begin(), active_ids.end(), id);
}

double ActiveSet::estimated(Index id) const {
  const auto it = std::lower_bound(candidate_ids.begin(), candidate_ids.end(), id);
  if (it == candidate_ids.end() || *it != id || estimated_sir.empty())
    throw ParameterError("no estimated SIR for link " + std::to_string(id));
  return estimated_sir[static_cast<std::size_t>(it - candidate_ids.begin())];
}

std::vector<Index> stage1_guard_zone(const D2DPairSet& pairs, const PointSet& bs_points,
                                     double delta) {
  return outside_holes(pairs.transmitters, bs_points, delta);
}

std::vector<double> estimation_phase(std::span<const Index> candidates, const LinkBudget& budget) {
  std::vector<double> out;
  out.reserve(candidates.size());
  for (Index i : candidates) out.push_back(budget.sir_d2d(i, candidates).sir);
  return out;
}

ActiveSet stage2_threshold(std::vector<Index> candidates, std::vector<double> estimated, double G) {
  if (!(G > 0.0)) throw ParameterError("SIR threshold G must be positive");
  if (candidates.size() != estimated.size())
    throw ParameterError("estimated SIRs must align with candidates");
  ActiveSet out;
  for (std::size_t k = 0; k < candidates.size(); ++k)
    if (estimated[k] > G) out.active_ids.push_back(candidates[k]);
  out.candidate_ids = std::move(candidates);
  out.estimated_sir = std::move(estimated);
  return out;
}

ActiveSet stage2_top_fraction(std::vector<Index> candidates, std::vector<double> estimated,
                              double p_s) {
  check_fraction(p_s);
  if (candidates.size() != estimated.size())
    throw ParameterError("estimated SIRs must align with candidates");
  const auto n = candidates.size();
  // Guard against p_s * n landing a hair above an integer through rounding.
  const auto keep = static_cast<std::size_t>(std::ceil(p_s * static_cast<double>(n) - 1e-9));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (estimated[a] != estimated[b]) return estimated[a] > estimated[b];
    return candidates[a] < candidates[b];
  });

  ActiveSet out;
  out.active_ids.reserve(keep);
  for (std::size_t k = 0; k < std::min(keep, n); ++k) out.active_ids.push_back(candidates[order[k]]);
  std::sort(out.active_ids.begin(), out.active_ids.end());
  out.candidate_ids = std::move(candidates);
  out.estimated_sir = std::move(estimated);
  return out;
}

double gain_threshold_from_fraction(double p_s, double d, double alpha) {
  check_fraction(p_s);
  if (p_s == 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(p_s) / std::pow(d, alpha);
}

ActiveSet channel_aware_activate(std::vector<Index> candidates, const FadingTable& fading,
                                 double d, double alpha, std::optional<double> gain_threshold,
                                 std::optional<double> access_fraction) {
  if (gain_threshold.has_value() == access_fraction.has_value())
    throw ParameterError("channel_aware requires exactly one of G_min or p_s");
  const double g_min =
      gain_threshold ? *gain_threshold : gain_threshold_from_fraction(*access_fraction, d, alpha);
  if (!(g_min >= 0.0)) throw ParameterError("gain threshold G_min must be >= 0");
  const double loss = std::pow(d, -alpha);

  ActiveSet out;
  for (Index i : candidates)
    if (fading.gain(i, i) * loss > g_min) out.active_ids.push_back(i);
  out.candidate_ids = std::move(candidates);
  return out;
}

ActiveSet apply_scheme(const SchemeSpec& spec, const D2DPairSet& pairs,
                       const CellAssociation& cells, const LinkBudget& budget,
                       const FadingTable& fading, const RadioParams& params) {
  spec.validate();
  const double delta = spec.kind == SchemeKind::no_ac ? 0.0 : spec.delta;
  auto candidates = stage1_guard_zone(pairs, cells.base_stations, delta);

  switch (spec.kind) {
    case SchemeKind::proposed_threshold: {
      auto est = estimation_phase(candidates, budget);
      return stage2_threshold(std::move(candidates), std::move(est), *spec.sir_threshold);
    }
    case SchemeKind::proposed_top_fraction: {
      auto est = estimation_phase(candidates, budget);
      return stage2_top_fraction(std::move(candidates), std::move(est), *spec.access_fraction);
    }
    case SchemeKind::channel_aware:
      return channel_aware_activate(std::move(candidates), fading, pairs.link_length,
                                    params.alpha, spec.gain_threshold, spec.access_fraction);
    case SchemeKind::guard_zone_only:
    case SchemeKind::no_ac: {
      ActiveSet out;
      out.active_ids = candidates;
      out.candidate_ids = std::move(candidates);
      return out;
    }
  }
  throw ParameterError("unhandled scheme kind");
}

}  // namespace d2d
