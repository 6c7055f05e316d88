#include "d2d/simkit.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>

#include "d2d/errors.hpp"

namespace d2d {

namespace {

constexpr double kZ95 = 1.959963984540054;

Estimate clamp_probability(Estimate e) {
  e.mean = std::clamp(e.mean, 0.0, 1.0);
  e.ci_low = std::clamp(e.ci_low, 0.0, 1.0);
  e.ci_high = std::clamp(e.ci_high, 0.0, 1.0);
  return e;
}

double shannon(double sir, double ceiling, Index& capped) {
  if (std::isinf(sir)) {
    ++capped;
    return ceiling;
  }
  return std::log2(1.0 + sir);
}

Realization generate_from_attempt(const ExperimentConfig& config, Index index, Index attempt) {
  for (;; ++attempt) {
    Rng rng = substream(config.seed, static_cast<std::uint64_t>(index),
                        static_cast<std::uint64_t>(attempt));
    PointSet bs = sample_ppp(config.system.lambda_m, config.window, rng);
    if (bs.empty()) continue;
    CellAssociation cells = place_uplink_users(bs, rng);
    PointSet tx = sample_ppp(config.system.lambda_d, config.window, rng);
    D2DPairSet pairs = place_d2d_pairs(tx, config.system.d, rng);
    const Index total = pairs.size() + cells.size();
    FadingTable est = draw_fading(total, total, rng, FadingPhase::estimation);
    std::optional<FadingTable> refreshed;
    if (config.refresh_fading_between_phases)
      refreshed = draw_fading(total, total, rng, FadingPhase::data);
    return Realization{std::move(cells), std::move(pairs), std::move(est), std::move(refreshed),
                       attempt};
  }
}

struct Budgets {
  Realization realization;
  LinkBudget estimation;
  std::optional<LinkBudget> data;

  const LinkBudget& data_budget() const { return data ? *data : estimation; }
};

// Realizations whose geometry is singular (a transmitter exactly on a
// receiver) are redrawn like empty ones; both are counted in `resampled`.
Budgets realize(const ExperimentConfig& config, Index index) {
  const RadioParams radio = config.radio();
  Index attempt = 0;
  for (;;) {
    Realization r = generate_from_attempt(config, index, attempt);
    try {
      LinkBudget est(r.pairs, r.cells, r.estimation_fading, radio);
      std::optional<LinkBudget> data;
      if (r.refreshed_fading) data.emplace(r.pairs, r.cells, *r.refreshed_fading, radio);
      return Budgets{std::move(r), std::move(est), std::move(data)};
    } catch (const SingularGeometryError&) {
      attempt = r.resampled + 1;
    }
  }
}

}  // namespace

RadioParams ExperimentConfig::radio() const {
  return RadioParams{system.alpha, system.p_c, system.p_d, 0.0};
}

void ExperimentConfig::validate() const {
  system.validate();
  scheme.validate();
  window.validate();
  if (n_realizations < 1) throw ParameterError("n_realizations must be >= 1");
  if (!(rate_ceiling > 0.0)) throw ParameterError("rate_ceiling must be positive");
  if (!ccdf_db.empty() && !collect_sir_samples)
    throw ParameterError("ccdf abscissae require collect_sir_samples");
  if (!std::is_sorted(ccdf_db.begin(), ccdf_db.end()))
    throw ParameterError("ccdf abscissae must be sorted");
}

Estimate ratio_estimate(std::span<const double> numerators, std::span<const double> denominators) {
  if (numerators.size() != denominators.size())
    throw ParameterError("ratio_estimate: mismatched spans");
  const auto n = static_cast<Index>(numerators.size());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < numerators.size(); ++i) {
    num += numerators[i];
    den += denominators[i];
  }
  if (den == 0.0) return Estimate{0.0, 0.0, 0.0, 0};
  const double ratio = num / den;
  if (n < 2) return Estimate{ratio, ratio, ratio, n};
  double ss = 0.0;
  for (std::size_t i = 0; i < numerators.size(); ++i) {
    const double z = numerators[i] - ratio * denominators[i];
    ss += z * z;
  }
  const double var = static_cast<double>(n) / static_cast<double>(n - 1) * ss / (den * den);
  const double half = kZ95 * std::sqrt(var);
  return Estimate{ratio, ratio - half, ratio + half, n};
}

Estimate mean_estimate(std::span<const double> values) {
  const auto n = static_cast<Index>(values.size());
  if (n == 0) return Estimate{};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(n);
  if (n < 2) return Estimate{mean, mean, mean, n};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double half = kZ95 * std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  return Estimate{mean, mean - half, mean + half, n};
}

Realization generate_realization(const ExperimentConfig& config, Index index) {
  return generate_from_attempt(config, index, 0);
}

RealizationMetrics measure(const ActiveSet& active, const LinkBudget& data_budget,
                           const ExperimentConfig& config) {
  RealizationMetrics m;
  m.n_potential = data_budget.n_d2d();
  m.n_candidates = static_cast<Index>(active.candidate_ids.size());
  m.n_active = static_cast<Index>(active.active_ids.size());
  m.n_cells = data_budget.n_cells();
  const double beta = config.system.beta;
  const double gamma = config.system.gamma;

  for (Index i : active.active_ids) {
    const double sir = data_budget.sir_d2d(i, active.active_ids).sir;
    if (sir > beta) ++m.d2d_successes;
    m.d2d_shannon_sum += shannon(sir, config.rate_ceiling, m.capped_d2d);
    if (config.collect_sir_samples) m.sir_samples_d2d.push_back(sir);
  }
  for (Index b = 0; b < m.n_cells; ++b) {
    const double sir = data_budget.sir_cellular(b, active.active_ids).sir;
    if (sir > gamma) ++m.cellular_covered;
    m.cellular_shannon_sum += shannon(sir, config.rate_ceiling, m.capped_cellular);
    if (config.collect_sir_samples) m.sir_samples_cell.push_back(sir);
  }
  return m;
}

RealizationMetrics run_realization(const ExperimentConfig& config, Index index) {
  config.validate();
  const Budgets b = realize(config, index);
  const ActiveSet active = apply_scheme(config.scheme, b.realization.pairs, b.realization.cells,
                                        b.estimation, b.realization.estimation_fading,
                                        config.radio());
  RealizationMetrics m = measure(active, b.data_budget(), config);
  m.resampled = b.realization.resampled;
  return m;
}

MetricsReport aggregate(std::span<const RealizationMetrics> metrics,
                        const ExperimentConfig& config) {
  const std::size_t n = metrics.size();
  const double area = config.window.area();
  const double rate = std::log2(1.0 + config.system.beta);
  std::vector<double> succ(n), active(n), covered(n), cells(n), cand(n), potential(n), ase(n),
      rd(n), rc(n), dens(n);
  MetricsReport r;
  r.n_realizations = static_cast<Index>(n);
  r.window_area = area;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = metrics[i];
    succ[i] = static_cast<double>(m.d2d_successes);
    active[i] = static_cast<double>(m.n_active);
    covered[i] = static_cast<double>(m.cellular_covered);
    cells[i] = static_cast<double>(m.n_cells);
    cand[i] = static_cast<double>(m.n_candidates);
    potential[i] = static_cast<double>(m.n_potential);
    ase[i] = succ[i] / area * rate;
    rd[i] = m.d2d_shannon_sum / area;
    rc[i] = m.cellular_shannon_sum / area;
    dens[i] = active[i] / area;
    r.capped_d2d += m.capped_d2d;
    r.capped_cellular += m.capped_cellular;
    r.resampled += m.resampled;
  }
  r.d2d_success = clamp_probability(ratio_estimate(succ, active));
  r.cellular_coverage = clamp_probability(ratio_estimate(covered, cells));
  r.candidate_fraction = clamp_probability(ratio_estimate(cand, potential));
  r.active_fraction = clamp_probability(ratio_estimate(active, cand));
  r.ase = mean_estimate(ase);
  r.rate_d2d = mean_estimate(rd);
  r.rate_cellular = mean_estimate(rc);
  r.active_density = mean_estimate(dens);

  if (config.collect_sir_samples && !config.ccdf_db.empty()) {
    std::vector<double> all_d2d;
    std::vector<double> all_cell;
    for (const auto& m : metrics) {
      all_d2d.insert(all_d2d.end(), m.sir_samples_d2d.begin(), m.sir_samples_d2d.end());
      all_cell.insert(all_cell.end(), m.sir_samples_cell.begin(), m.sir_samples_cell.end());
    }
    std::vector<double> linear;
    for (double db : config.ccdf_db) linear.push_back(db_to_linear(db));
    r.ccdf_db = config.ccdf_db;
    if (!all_d2d.empty()) r.ccdf_d2d = empirical_ccdf(all_d2d, linear);
    if (!all_cell.empty()) r.ccdf_cellular = empirical_ccdf(all_cell, linear);
  }
  return r;
}

MetricsReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::vector<RealizationMetrics> metrics(static_cast<std::size_t>(config.n_realizations));
  parallel_for(config.n_realizations, config.threads,
               [&](Index i) { metrics[static_cast<std::size_t>(i)] = run_realization(config, i); });
  return aggregate(metrics, config);
}

std::vector<double> empirical_ccdf(std::span<const double> samples,
                                   std::span<const double> abscissae) {
  if (samples.empty()) throw ParameterError("empirical_ccdf: no samples");
  if (!std::is_sorted(abscissae.begin(), abscissae.end()))
    throw ParameterError("empirical_ccdf: abscissae must be sorted");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(abscissae.size());
  const double n = static_cast<double>(sorted.size());
  for (double a : abscissae) {
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), a);
    out.push_back(static_cast<double>(above) / n);
  }
  return out;
}

void parallel_for(Index n, unsigned threads, const std::function<void(Index)>& fn) {
  unsigned workers = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  if (n <= 0) return;
  workers = static_cast<unsigned>(std::min<Index>(workers, n));
  if (workers <= 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const Index i = next.fetch_add(1);
          if (i >= n) return;
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next.store(n);
            return;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

namespace {

struct GridTally {
  double successes = 0.0;
  double active = 0.0;
  double covered = 0.0;
  double cells = 0.0;
  double shannon_d2d = 0.0;
};

}  // namespace

std::vector<GridPoint> evaluate_top_fraction_grid(const ExperimentConfig& base,
                                                  std::span<const double> deltas,
                                                  std::span<const double> fractions) {
  ExperimentConfig config = base;
  config.collect_sir_samples = false;
  config.ccdf_db.clear();
  config.scheme = SchemeSpec{SchemeKind::proposed_top_fraction, 0.0, std::nullopt, 1.0, std::nullopt};
  config.validate();
  for (double d : deltas)
    if (!(d >= 0.0)) throw ParameterError("grid deltas must be >= 0");
  for (double p : fractions)
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("grid fractions must lie in [0,1]");

  const std::size_t points = deltas.size() * fractions.size();
  const auto n = static_cast<std::size_t>(config.n_realizations);
  std::vector<std::vector<GridTally>> tallies(n, std::vector<GridTally>(points));

  parallel_for(config.n_realizations, config.threads, [&](Index index) {
    const Budgets b = realize(config, index);
    auto& row = tallies[static_cast<std::size_t>(index)];
    for (std::size_t di = 0; di < deltas.size(); ++di) {
      const auto candidates = stage1_guard_zone(b.realization.pairs,
                                                b.realization.cells.base_stations, deltas[di]);
      const auto estimated = estimation_phase(candidates, b.estimation);
      for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
        const ActiveSet active = stage2_top_fraction(candidates, estimated, fractions[fi]);
        const RealizationMetrics m = measure(active, b.data_budget(), config);
        row[di * fractions.size() + fi] = GridTally{
            static_cast<double>(m.d2d_successes), static_cast<double>(m.n_active),
            static_cast<double>(m.cellular_covered), static_cast<double>(m.n_cells),
            m.d2d_shannon_sum};
      }
    }
  });

  const double area = config.window.area();
  const double rate = std::log2(1.0 + config.system.beta);
  std::vector<GridPoint> out;
  out.reserve(points);
  std::vector<double> succ(n), active(n), covered(n), cells(n), ase(n), rd(n);
  for (std::size_t di = 0; di < deltas.size(); ++di) {
    for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
      const std::size_t k = di * fractions.size() + fi;
      for (std::size_t i = 0; i < n; ++i) {
        const GridTally& t = tallies[i][k];
        succ[i] = t.successes;
        active[i] = t.active;
        covered[i] = t.covered;
        cells[i] = t.cells;
        ase[i] = t.successes / area * rate;
        rd[i] = t.shannon_d2d / area;
      }
      out.push_back(GridPoint{deltas[di], fractions[fi], mean_estimate(ase),
                              clamp_probability(ratio_estimate(covered, cells)),
                              clamp_probability(ratio_estimate(succ, active)), mean_estimate(rd)});
    }
  }
  return out;
}

std::string_view to_string(SweepAxis axis) noexcept {
  switch (axis) {
    case SweepAxis::delta: return "delta";
    case SweepAxis::p_s: return "p_s";
    case SweepAxis::G: return "G";
    case SweepAxis::lambda_d: return "lambda_D";
    case SweepAxis::mu: return "mu";
  }
  return "unknown";
}

SweepAxis sweep_axis_from_string(std::string_view name) {
  for (auto a : {SweepAxis::delta, SweepAxis::p_s, SweepAxis::G, SweepAxis::lambda_d, SweepAxis::mu})
    if (to_string(a) == name) return a;
  throw ParameterError("unknown sweep axis '" + std::string(name) + "'");
}

std::vector<SweepPoint> sweep(const ExperimentConfig& base, SweepAxis axis,
                              std::span<const double> values, const ConfigTuner& tuner) {
  if (values.empty()) throw ParameterError("sweep: empty value list");
  if (axis == SweepAxis::mu && !tuner)
    throw ParameterError("sweep over mu needs a tuner to re-plan the scheme");
  std::vector<SweepPoint> out;
  out.reserve(values.size());
  for (double v : values) {
    ExperimentConfig c = base;
    switch (axis) {
      case SweepAxis::delta: c.scheme.delta = v; break;
      case SweepAxis::p_s:
        c.scheme.access_fraction = v;
        c.scheme.gain_threshold.reset();
        break;
      case SweepAxis::G: c.scheme.sir_threshold = v; break;
      case SweepAxis::lambda_d: c.system.lambda_d = v; break;
      case SweepAxis::mu: break;
    }
    if (tuner) c = tuner(c, axis, v);
    out.push_back(SweepPoint{v, c, run_experiment(c)});
  }
  return out;
}

void write_sweep_csv(std::ostream& out, SweepAxis axis, std::span<const SweepPoint> points) {
  const auto old_precision = out.precision(10);
  out << "axis,value,metric,mean,ci_low,ci_high,n\n";
  for (const auto& p : points) {
    const auto row = [&](std::string_view metric, const Estimate& e) {
      out << to_string(axis) << ',' << p.value << ',' << metric << ',' << e.mean << ','
          << e.ci_low << ',' << e.ci_high << ',' << e.n << '\n';
    };
    row("d2d_success", p.report.d2d_success);
    row("cellular_coverage", p.report.cellular_coverage);
    row("ase", p.report.ase);
    row("rate_d2d", p.report.rate_d2d);
    row("rate_cellular", p.report.rate_cellular);
    row("active_fraction", p.report.active_fraction);
  }
  out.precision(old_precision);
}

namespace {

nlohmann::json to_json(const Estimate& e) {
  return {{"mean", e.mean}, {"ci_low", e.ci_low}, {"ci_high", e.ci_high}, {"n", e.n}};
}

}  // namespace

void write_report_json(std::ostream& out, const MetricsReport& r) {
  nlohmann::json j;
  j["n_realizations"] = r.n_realizations;
  j["window_area"] = r.window_area;
  j["d2d_success"] = to_json(r.d2d_success);
  j["cellular_coverage"] = to_json(r.cellular_coverage);
  j["ase"] = to_json(r.ase);
  j["rate_d2d"] = to_json(r.rate_d2d);
  j["rate_cellular"] = to_json(r.rate_cellular);
  j["candidate_fraction"] = to_json(r.candidate_fraction);
  j["active_fraction"] = to_json(r.active_fraction);
  j["active_density"] = to_json(r.active_density);
  j["ccdf_db"] = r.ccdf_db;
  j["ccdf_d2d"] = r.ccdf_d2d;
  j["ccdf_cellular"] = r.ccdf_cellular;
  j["capped_d2d"] = r.capped_d2d;
  j["capped_cellular"] = r.capped_cellular;
  j["resampled"] = r.resampled;
  out << j.dump(2) << '\n';
}

}  // namespace d2d
