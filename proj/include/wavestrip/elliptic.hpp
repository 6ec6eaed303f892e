#pragma once

#include "wavestrip/laminar.hpp"
#include "wavestrip/strip_field.hpp"

namespace wavestrip {

/// Poisson solve on the periodic strip with homogeneous Dirichlet conditions
/// at y = 0 and y = -h: per x-mode, u_k'' - (k nu)^2 u_k = r_k through a
/// fourth-order compact (Numerov) tridiagonal system. Mode solves are
/// independent; the parallel version runs them under OpenMP and is bitwise
/// identical to the serial one.
StripField poisson_strip(const StripField& rhs);
StripField poisson_strip_serial(const StripField& rhs);

/// The vorticity-coupled field A(lambda, w, phi): unique solution of
///   Delta A = -gamma(phi + psi^lambda) |grad V|^2 + gamma(psi^lambda),
/// A = 0 on both boundaries, with V the harmonic extension of w + h.
/// The nonlinear right-hand side is evaluated on the dealiased grid.
StripField compute_A(const VorticityModel& gamma, const LaminarFlow& laminar,
                     const PeriodicScalar& w, const StripField& phi);

/// Boundary trace of dA/dy at y = 0 by one-sided fourth-order differencing.
PeriodicScalar surface_normal_derivative(const StripField& a);

} // namespace wavestrip
