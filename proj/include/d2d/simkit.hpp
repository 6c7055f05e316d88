#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "d2d/access.hpp"
#include "d2d/analytic.hpp"
#include "d2d/radio.hpp"
#include "d2d/spatial.hpp"

namespace d2d {

struct ExperimentConfig {
  SystemParams system;
  SchemeSpec scheme;
  Window window;
  Index n_realizations = 4000;
  std::uint64_t seed = 1;
  /// Worker threads; 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
  bool refresh_fading_between_phases = false;
  /// Shannon rate assigned to links with unbounded SIR, bit/s/Hz.
  double rate_ceiling = 30.0;
  bool collect_sir_samples = false;
  /// CCDF abscissae in dB; requires collect_sir_samples.
  std::vector<double> ccdf_db;

  RadioParams radio() const;
  void validate() const;
};

/// One sampled network. `data_fading` is set only when fading is refreshed
/// between the estimation and data phases.
struct Realization {
  CellAssociation cells;
  D2DPairSet pairs;
  FadingTable estimation_fading;
  std::optional<FadingTable> refreshed_fading;
  Index resampled = 0;

  const FadingTable& data_fading() const {
    return refreshed_fading ? *refreshed_fading : estimation_fading;
  }
};

struct RealizationMetrics {
  Index n_potential = 0;
  Index n_candidates = 0;
  Index n_active = 0;
  Index d2d_successes = 0;
  double d2d_shannon_sum = 0.0;
  Index cellular_covered = 0;
  Index n_cells = 0;
  double cellular_shannon_sum = 0.0;
  Index capped_d2d = 0;
  Index capped_cellular = 0;
  Index resampled = 0;
  std::vector<double> sir_samples_d2d;
  std::vector<double> sir_samples_cell;

  friend bool operator==(const RealizationMetrics&, const RealizationMetrics&) = default;
};

/// Mean with a 95% normal-approximation confidence interval.
struct Estimate {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  Index n = 0;

  double half_width() const noexcept { return 0.5 * (ci_high - ci_low); }
  friend bool operator==(const Estimate&, const Estimate&) = default;
};

/// Pooled ratio sum(num)/sum(den) with a linearized (delta-method) CI.
Estimate ratio_estimate(std::span<const double> numerators, std::span<const double> denominators);
/// Sample mean with CI over per-realization values.
Estimate mean_estimate(std::span<const double> values);

struct MetricsReport {
  Index n_realizations = 0;
  double window_area = 0.0;
  Estimate d2d_success;
  Estimate cellular_coverage;
  /// Fixed-rate ASE: successful links per m^2 times log2(1 + beta).
  Estimate ase;
  /// Shannon sum-rate densities, bit/s/Hz/m^2.
  Estimate rate_d2d;
  Estimate rate_cellular;
  Estimate candidate_fraction;
  Estimate active_fraction;
  Estimate active_density;
  std::vector<double> ccdf_db;
  std::vector<double> ccdf_d2d;
  std::vector<double> ccdf_cellular;
  Index capped_d2d = 0;
  Index capped_cellular = 0;
  Index resampled = 0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Samples BSs, users, D2D pairs and fading for realization `index`.
/// Realizations without any BS are redrawn from the next substream attempt.
Realization generate_realization(const ExperimentConfig& config, Index index);

/// Data-phase measurement of a given activation decision.
RealizationMetrics measure(const ActiveSet& active, const LinkBudget& data_budget,
                           const ExperimentConfig& config);

RealizationMetrics run_realization(const ExperimentConfig& config, Index index);

MetricsReport aggregate(std::span<const RealizationMetrics> metrics, const ExperimentConfig& config);

MetricsReport run_experiment(const ExperimentConfig& config);

/// Fraction of samples strictly above each abscissa. Abscissae must be sorted.
std::vector<double> empirical_ccdf(std::span<const double> samples,
                                   std::span<const double> abscissae);

/// Runs fn(i) for i in [0, n) on `threads` workers (0 = hardware concurrency).
void parallel_for(Index n, unsigned threads, const std::function<void(Index)>& fn);

/// Proposed top-fraction scheme evaluated on a (delta x p_s) grid, every
/// point on the same realizations.
struct GridPoint {
  double delta = 0.0;
  double p_s = 0.0;
  Estimate ase;
  Estimate cellular_coverage;
  Estimate d2d_success;
  Estimate rate_d2d;
};

std::vector<GridPoint> evaluate_top_fraction_grid(const ExperimentConfig& base,
                                                  std::span<const double> deltas,
                                                  std::span<const double> fractions);

enum class SweepAxis { delta, p_s, G, lambda_d, mu };

std::string_view to_string(SweepAxis axis) noexcept;
SweepAxis sweep_axis_from_string(std::string_view name);

/// Re-plans a configuration after the axis value was applied (used for the
/// lambda_d and mu axes). Receives the axis and its value.
using ConfigTuner = std::function<ExperimentConfig(const ExperimentConfig&, SweepAxis, double)>;

struct SweepPoint {
  double value = 0.0;
  ExperimentConfig config;
  MetricsReport report;
};

/// One experiment per value, all sharing the base seed.
std::vector<SweepPoint> sweep(const ExperimentConfig& base, SweepAxis axis,
                              std::span<const double> values, const ConfigTuner& tuner = {});

// Report output. CSV schema: axis,value,metric,mean,ci_low,ci_high,n
void write_sweep_csv(std::ostream& out, SweepAxis axis, std::span<const SweepPoint> points);
void write_report_json(std::ostream& out, const MetricsReport& report);

}  // namespace d2d
