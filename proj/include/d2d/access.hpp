#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "d2d/radio.hpp"
#include "d2d/spatial.hpp"

namespace d2d {

enum class SchemeKind { proposed_threshold, proposed_top_fraction, channel_aware, guard_zone_only, no_ac };

std::string_view to_string(SchemeKind kind) noexcept;
/// Accepts the enumerator names; throws ParameterError otherwise.
SchemeKind scheme_kind_from_string(std::string_view name);

/// Access-control scheme and its parameters.
///   proposed_threshold     delta, sir_threshold (G)
///   proposed_top_fraction  delta, access_fraction (p_s)
///   channel_aware          delta, exactly one of gain_threshold (G_min) or access_fraction
///   guard_zone_only        delta
///   no_ac                  nothing (delta is forced to 0)
struct SchemeSpec {
  SchemeKind kind = SchemeKind::proposed_threshold;
  double delta = 0.0;
  std::optional<double> sir_threshold;
  std::optional<double> access_fraction;
  std::optional<double> gain_threshold;

  void validate() const;

  friend bool operator==(const SchemeSpec&, const SchemeSpec&) = default;
};

/// Outcome of access control for one realization. Ids index D2D pairs.
/// `estimated_sir` is aligned with `candidate_ids` when an estimation phase ran.
struct ActiveSet {
  std::vector<Index> active_ids;
  std::vector<Index> candidate_ids;
  std::vector<double> estimated_sir;

  bool is_active(Index id) const;
  /// Estimated SIR of candidate `id`; throws if absent.
  double estimated(Index id) const;
};

/// Stage 1: D2D transmitters strictly outside every BS guard zone of radius delta.
std::vector<Index> stage1_guard_zone(const D2DPairSet& pairs, const PointSet& bs_points,
                                     double delta);

/// Test-signal phase: every candidate transmits at once and measures its SIR,
/// including all uplink interference. Output aligned with `candidates`.
std::vector<double> estimation_phase(std::span<const Index> candidates, const LinkBudget& budget);

/// Stage 2 by SIR threshold: activate candidates with estimated SIR > G.
ActiveSet stage2_threshold(std::vector<Index> candidates, std::vector<double> estimated, double G);

/// Stage 2 by ranking: activate the ceil(p_s * |candidates|) best estimated SIRs,
/// ties to the smaller link id.
ActiveSet stage2_top_fraction(std::vector<Index> candidates, std::vector<double> estimated,
                              double p_s);

/// Threshold that makes exp(-G_min d^alpha) = p_s.
double gain_threshold_from_fraction(double p_s, double d, double alpha);

/// Channel-aware activation: candidate i is active iff |h_ii|^2 d^-alpha > G_min.
/// Supply exactly one of `gain_threshold` or `access_fraction`.
ActiveSet channel_aware_activate(std::vector<Index> candidates, const FadingTable& fading,
                                 double d, double alpha, std::optional<double> gain_threshold,
                                 std::optional<double> access_fraction);

/// Runs the whole scheme. `budget` and `fading` are the estimation-phase channel.
ActiveSet apply_scheme(const SchemeSpec& spec, const D2DPairSet& pairs,
                       const CellAssociation& cells, const LinkBudget& budget,
                       const FadingTable& fading, const RadioParams& params);

}  // namespace d2d
