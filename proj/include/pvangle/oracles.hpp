#pragma once

// Closed forms for the angle-conditioned processes, and numerical
// evaluations of the integrals they come from.

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "pvangle/geometry.hpp"

namespace pvangle::oracles {

struct OracleValue {
  double value = 0.0;
  std::string formula_id;
  std::map<std::string, double> inputs;
};

/// Adaptive Gauss–Kronrod quadrature on [a, b]; either bound may be infinite.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, tol, &error);
}

/// P(χ²_dof > x).
inline double chi_square_sf(double x, double dof) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

inline void require_positive(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Error("intensity must be positive");
}

/// Intensity of Ψ_θ: 2λ sin²(θ/2).
inline double gamma_theta(double lambda, double theta) {
  require_positive(lambda);
  const double s = std::sin(0.5 * OrientedAngle(theta).radians());
  return 2.0 * lambda * s * s;
}

/// Palm density of the crossing mark in the plane: ¼ sin(t/2) on (0, 2π).
inline double angle_density_2d(double t) {
  if (!(t > 0.0 && t < two_pi)) return 0.0;
  return 0.25 * std::sin(0.5 * t);
}

/// Density of β = min(Θ, 2π − Θ) in the plane: ½ sin(β/2) on (0, π).
inline double folded_density_2d(double beta) {
  if (!(beta > 0.0 && beta < pi)) return 0.0;
  return 0.5 * std::sin(0.5 * beta);
}

/// P(Θ ∈ (t, π)) for t ∈ (0, π): ½ cos(t/2).
inline double angle_ccdf_2d(double t) { return 0.5 * std::cos(0.5 * t); }

/// Palm density of the crossing mark in space: ¾ |cos(t/2)| sin²(t/2).
inline double angle_density_3d(double t) {
  if (!(t > 0.0 && t < two_pi)) return 0.0;
  const double s = std::sin(0.5 * t);
  return 0.75 * std::abs(std::cos(0.5 * t)) * s * s;
}

inline double folded_density_3d(double beta) {
  if (!(beta > 0.0 && beta < pi)) return 0.0;
  const double s = std::sin(0.5 * beta);
  return 1.5 * std::cos(0.5 * beta) * s * s;
}

/// P(Θ ∈ (t, π)) for t ∈ (0, π) in space: ½(1 − sin³(t/2)).
inline double angle_ccdf_3d(double t) {
  const double s = std::sin(0.5 * t);
  return 0.5 * (1.0 - s * s * s);
}

/// Mean number of facet crossings per unit length of a line.
inline double crossing_intensity(double lambda, int dim) {
  require_positive(lambda);
  if (dim == 2) return 4.0 * std::sqrt(lambda) / pi;
  if (dim == 3) return std::cbrt(4.0 * pi / 3.0) * std::tgamma(5.0 / 3.0) * std::cbrt(lambda);
  throw Error("dimension must be 2 or 3");
}

/// L_θ = 4π (6/(πλ))^{1/3} Γ(4/3) |cos(θ/2)| sin³(θ/2), θ ≠ π.
inline double arc_length_L(double lambda, double theta) {
  require_positive(lambda);
  const double t = OrientedAngle(theta).radians();
  if (t == pi) throw Error("use N_pi at theta = pi");
  const double s = std::sin(0.5 * t);
  return 4.0 * pi * std::cbrt(6.0 / (pi * lambda)) * std::tgamma(4.0 / 3.0) *
         std::abs(std::cos(0.5 * t)) * s * s * s;
}

/// Probability of a panel swap at a handover with 2^m panels.
inline double panel_swap_probability(int m) {
  if (m < 1) throw Error("panel exponent m must be >= 1");
  const double k = std::ldexp(1.0, m);
  return k / pi * std::sin(pi / k);
}

/// The same probability, by integrating the mark density over the swap
/// conditions: marks in (π/2^{m−1}, 2π − π/2^{m−1}) always swap, smaller
/// marks swap with probability 2^m t / (2π) for each of the two symmetric sides.
inline double panel_swap_integral(int m) {
  if (m < 1) throw Error("panel exponent m must be >= 1");
  const double k = std::ldexp(1.0, m);
  const double edge = pi / std::ldexp(1.0, m - 1);
  const double partial = integrate(
      [](double t) { return angle_density_2d(t) * t / two_pi; }, 0.0, edge);
  const double certain =
      edge < two_pi - edge ? integrate(angle_density_2d, edge, two_pi - edge) : 0.0;
  return 2.0 * k * partial + certain;
}

struct Constants {
  double unit_ball_volume_3d = 4.0 * pi / 3.0;
  double mean_facets_2d = 6.0;
  double n_pi = 8.0;
  double midpoint_facets_2d = 4.0;
  double non_midpoint_facets_2d = 2.0;
};

inline Constants constants() { return {}; }

// Campbell-formula integrals behind the closed forms, evaluated numerically.

/// πλ² ∫ exp(−λπ R_{θ,r}²) r dr over r > 0.
inline double gamma_theta_integral(double lambda, double theta) {
  const double s = std::abs(std::sin(0.5 * OrientedAngle(theta).radians()));
  return pi * lambda * lambda * integrate(
      [&](double r) {
        const double R = r / (2.0 * s);
        return std::exp(-lambda * pi * R * R) * r;
      },
      0.0, std::numeric_limits<double>::infinity());
}

/// πλ ∫_{R³} ρ(x) exp(−λ ν(3) R(x)³) dx, in spherical coordinates.
inline double arc_length_L_integral(double lambda, double theta) {
  const double half = 0.5 * OrientedAngle(theta).radians();
  const double cot = std::abs(std::cos(half) / std::sin(half));
  const double sin_half = std::abs(std::sin(half));
  const double nu = 4.0 * pi / 3.0;
  return pi * lambda * 4.0 * pi * integrate(
      [&](double r) {
        const double R = 0.5 * r / sin_half;
        return 0.5 * r * cot * std::exp(-lambda * nu * R * R * R) * r * r;
      },
      0.0, std::numeric_limits<double>::infinity());
}

/// λ ∫_{R³} exp(−λ ν(3) (|x|/2)³) dx: mean number of midpoint-containing
/// facets of the typical spatial cell.
inline double midpoint_facets_3d_integral(double lambda) {
  const double nu = 4.0 * pi / 3.0;
  return lambda * 4.0 * pi * integrate(
      [&](double r) {
        const double h = 0.5 * r;
        return std::exp(-lambda * nu * h * h * h) * r * r;
      },
      0.0, std::numeric_limits<double>::infinity());
}

/// Planar analogue: λ ∫_{R²} exp(−λπ |x|²/4) dx.
inline double midpoint_facets_2d_integral(double lambda) {
  return lambda * two_pi * integrate(
      [&](double r) { return std::exp(-lambda * pi * 0.25 * r * r) * r; },
      0.0, std::numeric_limits<double>::infinity());
}

inline OracleValue make(std::string id, double value, std::map<std::string, double> inputs = {}) {
  return {value, std::move(id), std::move(inputs)};
}

}  // namespace pvangle::oracles
