#include "d2d/analytic.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "d2d/errors.hpp"

namespace d2d {

namespace {

constexpr double kPi = std::numbers::pi;

void require_non_negative(double v, const char* what) {
  if (!(v >= 0.0)) throw ParameterError(std::string(what) + " must be >= 0");
}

// 2 pi lambda s^(2/alpha) J(t0) with J(t0) = int_{t0}^inf t/(1+t^alpha) dt.
double restricted_exponent_quadrature(double s, double lambda, double r_min, double alpha,
                                      const QuadratureSettings& quad) {
  const double scale = std::pow(s, 1.0 / alpha);
  const double t0 = r_min / scale;
  auto integrand = [alpha](double t) { return t / (1.0 + std::pow(t, alpha)); };
  // Bulk on [t0, 1]; beyond max(t0, 1) substitute w = t^(2 - alpha), which
  // turns the slowly decaying tail into a smooth integral over a finite range.
  double j = 0.0;
  const double knee = std::max(t0, 1.0);
  if (t0 < knee) j += integrate(integrand, t0, knee, quad);
  const double q = alpha / (alpha - 2.0);
  auto tail = [q](double w) { return 1.0 / (1.0 + std::pow(w, q)); };
  j += integrate(tail, 0.0, std::pow(knee, 2.0 - alpha), quad) / (alpha - 2.0);
  return 2.0 * kPi * lambda * scale * scale * j;
}

}  // namespace

double db_to_linear(double db) noexcept { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) noexcept { return 10.0 * std::log10(linear); }

void SystemParams::validate() const {
  if (!(lambda_m > 0.0)) throw ParameterError("lambda_m must be positive");
  if (!(lambda_d >= 0.0)) throw ParameterError("lambda_d must be >= 0");
  if (!(d > 0.0)) throw ParameterError("link length d must be positive");
  if (!(alpha > 2.0)) throw ParameterError("alpha must exceed 2");
  if (!(p_c > 0.0) || !(p_d > 0.0)) throw ParameterError("transmit powers must be positive");
  if (!(beta > 0.0)) throw ParameterError("beta must be positive");
  if (!(gamma > 0.0)) throw ParameterError("gamma must be positive");
  if (!(cell_area_shape > 0.0)) throw ParameterError("cell_area_shape must be positive");
}

DerivedConstants derive(const SystemParams& params) {
  return DerivedConstants{kPi * params.d * params.d / sinc_norm(2.0 / params.alpha),
                          std::pow(params.p_c / params.p_d, 2.0 / params.alpha)};
}

double sinc_norm(double x) noexcept {
  if (x == 0.0) return 1.0;
  const double px = kPi * x;
  return std::sin(px) / px;
}

double laplace_ppp(double s, double lambda, double alpha) {
  require_non_negative(s, "s");
  require_non_negative(lambda, "lambda");
  if (s == 0.0 || lambda == 0.0) return 1.0;
  return std::exp(-kPi * lambda * std::pow(s, 2.0 / alpha) / sinc_norm(2.0 / alpha));
}

double hole_density(double lambda_d, double lambda_m, double delta) {
  require_non_negative(delta, "delta");
  return lambda_d * std::exp(-lambda_m * kPi * delta * delta);
}

double d2d_success_prob(double beta, const SystemParams& params) {
  require_non_negative(beta, "beta");
  const auto [xi, kappa] = derive(params);
  return std::exp(-xi * std::pow(beta, 2.0 / params.alpha) *
                  (params.lambda_d + kappa * params.lambda_m));
}

double d2d_ase_step1(double beta, double delta, const SystemParams& params) {
  return hole_density(params.lambda_d, params.lambda_m, delta) * d2d_success_prob(beta, params) *
         std::log2(1.0 + beta);
}

double modified_laplace(double s, double lambda, double r_min, double alpha,
                        const QuadratureSettings& quad) {
  require_non_negative(s, "s");
  require_non_negative(lambda, "lambda");
  require_non_negative(r_min, "r_min");
  if (s == 0.0 || lambda == 0.0) return 1.0;
  if (alpha == 4.0) {
    const double root = std::sqrt(s);
    return std::exp(-kPi * lambda * root * (kPi / 2.0 - std::atan(r_min * r_min / root)));
  }
  return std::exp(-restricted_exponent_quadrature(s, lambda, r_min, alpha, quad));
}

double modified_laplace_quadrature(double s, double lambda, double r_min, double alpha,
                                   const QuadratureSettings& quad) {
  require_non_negative(s, "s");
  require_non_negative(lambda, "lambda");
  require_non_negative(r_min, "r_min");
  if (!(alpha > 2.0)) throw ParameterError("alpha must exceed 2");
  if (s == 0.0 || lambda == 0.0) return 1.0;
  return std::exp(-restricted_exponent_quadrature(s, lambda, r_min, alpha, quad));
}

double pdf_dmin(double r, double lambda_m, double area_shape) {
  require_non_negative(r, "r");
  const double c = area_shape * kPi * lambda_m;
  // Evaluated in log space; the normalizer overflows for large shapes otherwise.
  if (r == 0.0) return area_shape > 0.5 ? 0.0 : std::numeric_limits<double>::infinity();
  const double log_pdf = std::log(2.0) + area_shape * std::log(c) - std::lgamma(area_shape) +
                         (2.0 * area_shape - 1.0) * std::log(r) - c * r * r;
  return std::exp(log_pdf);
}

double dmin_quantile_upper(double lambda_m, double area_shape, double tail_mass) {
  // pi d_min^2 ~ Gamma(shape, rate shape * lambda_m).
  const double t = boost::math::gamma_q_inv(area_shape, tail_mass);
  return std::sqrt(t / (area_shape * kPi * lambda_m));
}

double pdf_link_distance(double x, double lambda_m) {
  require_non_negative(x, "x");
  return 2.0 * kPi * lambda_m * x * std::exp(-kPi * lambda_m * x * x);
}

double link_distance_quantile_upper(double lambda_m, double tail_mass) {
  return std::sqrt(-std::log(tail_mass) / (kPi * lambda_m));
}

double cellular_coverage(double gamma, double active_density, double delta,
                         const SystemParams& params, const QuadratureSettings& quad) {
  params.validate();
  quad.validate();
  if (!(gamma > 0.0)) throw ParameterError("gamma must be positive");
  require_non_negative(active_density, "active D2D density");
  require_non_negative(delta, "delta");

  const double alpha = params.alpha;
  const double power_ratio = params.p_d / params.p_c;
  const double x_max = link_distance_quantile_upper(params.lambda_m, quad.tail_mass);
  const double r_max =
      dmin_quantile_upper(params.lambda_m, params.cell_area_shape, quad.tail_mass);

  auto outer = [&](double x) {
    if (x == 0.0) return 0.0;
    const double s = gamma * std::pow(x, alpha);
    auto inner = [&](double r) {
      return pdf_dmin(r, params.lambda_m, params.cell_area_shape) *
             modified_laplace(s, params.lambda_m, r, alpha, quad);
    };
    const double cellular = integrate(inner, 0.0, r_max, quad);
    const double d2d = modified_laplace(s * power_ratio, active_density, delta, alpha, quad);
    return pdf_link_distance(x, params.lambda_m) * cellular * d2d;
  };
  return std::clamp(integrate(outer, 0.0, x_max, quad), 0.0, 1.0);
}

double max_cellular_coverage(const SystemParams& params, const QuadratureSettings& quad) {
  return cellular_coverage(params.gamma, 0.0, 0.0, params, quad);
}

double access_prob_from_threshold(double G, const SystemParams& params) {
  require_non_negative(G, "G");
  const auto [xi, kappa] = derive(params);
  return std::exp(-xi * std::pow(G, 2.0 / params.alpha) *
                  (params.lambda_d + kappa * params.lambda_m));
}

double threshold_from_access_prob(double p_s, const SystemParams& params) {
  if (!(p_s > 0.0 && p_s <= 1.0))
    throw ParameterError("p_s must lie in (0,1]; p_s = 0 needs an infinite threshold");
  if (p_s == 1.0) return 0.0;
  const auto [xi, kappa] = derive(params);
  return std::pow(-std::log(p_s) / (xi * (params.lambda_d + kappa * params.lambda_m)),
                  params.alpha / 2.0);
}

double d2d_ase_two_stage(double delta, double p_s, const SystemParams& params, AseRegime regime) {
  if (!(p_s >= 0.0 && p_s <= 1.0)) throw ParameterError("p_s must lie in [0,1]");
  if (p_s == 0.0) return 0.0;
  const double base = hole_density(params.lambda_d, params.lambda_m, delta) *
                      std::log2(1.0 + params.beta);
  const auto [xi, kappa] = derive(params);
  const double low = p_s * base;
  const double high = base * std::exp(-xi * std::pow(params.beta, 2.0 / params.alpha) *
                                      (p_s * params.lambda_d + kappa * params.lambda_m));
  switch (regime) {
    case AseRegime::low_ps: return low;
    case AseRegime::high_ps: return high;
    case AseRegime::piecewise: return std::min(low, high);
  }
  return std::min(low, high);
}

bool guard_zone_is_tight(double delta, double lambda_m) noexcept {
  return delta < 1.0 / (2.0 * std::sqrt(kPi * lambda_m));
}

}  // namespace d2d
