#pragma once

// Sobolev optimizers, the best constant S and the energy quantum
// c_inf = S^{N/p} / N, together with the Nehari fibre maps and dilations.

#include <cstddef>

#include "critlab/radial.hpp"

namespace critlab {

/// U(r) = [alpha + beta r^{p/(p-1)}]^{1 - N/p}.
struct TalentiProfile {
  double alpha = 1.0;
  double beta = 1.0;
  Exponents exps;

  [[nodiscard]] double transition_radius() const;
};

/// Throws DomainError for r < 0.
double talenti_eval(const TalentiProfile& profile, double r);
/// dU/dr.
double talenti_slope(const TalentiProfile& profile, double r);

/// Samples U on `grid` (no Dirichlet flag).
RadialFunction sample_profile(const TalentiProfile& profile, const RadialGrid& grid);

/// Grid on which calibrate_talenti measures the ODE residual: log-spaced over
/// [1e-3, 1e3] * alpha with kResidualCells cells.
RadialGrid talenti_residual_grid(int dim, double p, double alpha);
inline constexpr std::size_t kResidualCells = 40000;

/// Signed, normalised sum of the nodal weak residual of U_{alpha,beta}.
/// Its sign is the sign of beta - beta*(alpha).
double talenti_signed_residual(int dim, double p, double alpha, double beta);

/// Root-finds beta so that U_{alpha,beta} solves -Delta_p U = U^{p*-1} on R^N.
/// Throws DomainError for alpha <= 0, NumericError if no bracket is found.
TalentiProfile calibrate_talenti(int dim, double p, double alpha = 1.0);

struct SobolevReport {
  double S = 0.0;
  double c_infty = 0.0;
  double truncation_radius = 0.0;
  std::size_t grid_size = 0;
  Exponents exps;
};

inline constexpr std::size_t kDefaultSobolevCells = 2048;

/// max(1e4, 10^{4(p-1)/(N-p)}): the profile tail r^{(p-N)/(p-1)} leaves a
/// relative truncation error of roughly 1e-4 at this radius.
double default_truncation(int dim, double p);

/// Rayleigh quotient of the calibrated profile sampled on a log grid over
/// [1/T, T] with a linear taper to zero over [T/10, T]. T <= 0 selects
/// default_truncation.
SobolevReport sobolev_constant(int dim, double p, double truncation_radius = 0.0,
                               std::size_t cells = kDefaultSobolevCells);

/// t* = (a / b)^{1/(p* - p)}, the maximiser of t -> J(t u) when
/// a = int |grad u|^p and b = int |u|^{p*}.
double nehari_scale(double a, double b, double p, double p_star);

/// t* u. Throws DomainError for u == 0.
RadialFunction nehari_project(const RadialFunction& u);

/// u_l(r) = l^{(p-N)/p} u(r / l), carried on the dilated grid l * r_i.
RadialFunction dilate(const RadialFunction& u, double lambda);

}  // namespace critlab
