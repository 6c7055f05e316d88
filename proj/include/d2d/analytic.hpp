#pragma once

#include "d2d/quadrature.hpp"

namespace d2d {

/// Gamma shape of the Voronoi cell-area law behind the d_min density.
/// 3.5 is the classical Gamma fit of the Poisson-Voronoi cell area; 1.0 is
/// the exponential-area law, under which d_min is Rayleigh distributed.
inline constexpr double kGammaFitAreaShape = 3.5;
inline constexpr double kExponentialAreaShape = 1.0;

double db_to_linear(double db) noexcept;
double linear_to_db(double linear) noexcept;

/// Network-level parameters of the analytic model (SI units, powers in mW,
/// thresholds linear).
struct SystemParams {
  double lambda_m = 1e-6;
  double lambda_d = 6e-5;
  double d = 50.0;
  double alpha = 4.0;
  double p_c = 10.0;
  double p_d = 0.1;
  double beta = 3.1622776601683795;  // 5 dB
  double gamma = 1.0;                 // 0 dB
  double cell_area_shape = kExponentialAreaShape;

  void validate() const;

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

/// xi = pi d^2 / sinc(2/alpha), kappa = (Pc/Pd)^(2/alpha).
struct DerivedConstants {
  double xi;
  double kappa;
};

DerivedConstants derive(const SystemParams& params);

/// Normalized sinc, sin(pi x)/(pi x).
double sinc_norm(double x) noexcept;

/// Laplace transform of Rayleigh-faded interference from a PPP of density `lambda`.
double laplace_ppp(double s, double lambda, double alpha);

/// Mean density left after removing points within `delta` of a PPP of density lambda_m.
double hole_density(double lambda_d, double lambda_m, double delta);

/// D2D success probability P(SIR > beta) with all lambda_d links active.
double d2d_success_prob(double beta, const SystemParams& params);

/// ASE after the guard-zone stage alone, bit/s/Hz/m^2.
double d2d_ase_step1(double beta, double delta, const SystemParams& params);

/// Laplace transform of PPP interference restricted to distances >= r_min.
/// alpha = 4 uses the closed form; other exponents use quadrature.
double modified_laplace(double s, double lambda, double r_min, double alpha,
                        const QuadratureSettings& quad = {});

/// Same quantity, always by quadrature (reference path for the closed form).
double modified_laplace_quadrature(double s, double lambda, double r_min, double alpha,
                                   const QuadratureSettings& quad = {});

/// Density of the equal-area radius of the typical Voronoi cell.
double pdf_dmin(double r, double lambda_m, double area_shape = kGammaFitAreaShape);

/// Upper limit of f_dmin beyond which `tail_mass` of probability remains.
double dmin_quantile_upper(double lambda_m, double area_shape, double tail_mass);

/// Rayleigh density of the nearest-BS link distance.
double pdf_link_distance(double x, double lambda_m);

/// Upper limit of f_l beyond which `tail_mass` of probability remains.
double link_distance_quantile_upper(double lambda_m, double tail_mass);

/// Uplink coverage with active D2D density `active_density` outside guard zones
/// of radius `delta`. Nested quadrature, truncated at the (1 - tail_mass)
/// quantiles of the link-distance and d_min densities.
double cellular_coverage(double gamma, double active_density, double delta,
                         const SystemParams& params, const QuadratureSettings& quad = {});

/// Coverage without D2D interference.
double max_cellular_coverage(const SystemParams& params, const QuadratureSettings& quad = {});

/// Activation probability induced by SIR threshold G (uses lambda_d of params).
double access_prob_from_threshold(double G, const SystemParams& params);

/// Inverse of access_prob_from_threshold. p_s = 1 gives 0; p_s = 0 throws.
double threshold_from_access_prob(double p_s, const SystemParams& params);

enum class AseRegime { low_ps, high_ps, piecewise };

/// ASE of the two-stage scheme as a function of (delta, p_s), using the
/// conditional-success approximation selected by `regime`.
double d2d_ase_two_stage(double delta, double p_s, const SystemParams& params, AseRegime regime);

/// True when delta is below 1/(2 sqrt(pi lambda_m)), where the guard zones
/// rarely overlap and the hole-process approximations stay tight.
bool guard_zone_is_tight(double delta, double lambda_m) noexcept;

}  // namespace d2d
