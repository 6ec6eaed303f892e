#pragma once

#include <utility>
#include <vector>

#include "wavestrip/fourier.hpp"
#include "wavestrip/strip_field.hpp"

namespace wavestrip {

/// Periodic Hilbert transform on a strip of depth h: Fourier multiplier
/// -i coth(k nu h) on zero-mean input. In the real basis,
///   cos(k nu x) -> coth(k nu h) sin(k nu x),
///   sin(k nu x) -> -coth(k nu h) cos(k nu x).
/// Reverses parity.
PeriodicScalar hilbert_strip(const PeriodicScalar& u, double h);

/// Inverse transform, multiplier i tanh(k nu h):
///   cos -> -tanh sin,  sin -> tanh cos.
PeriodicScalar hilbert_strip_inverse(const PeriodicScalar& u, double h);

double mean(const PeriodicScalar& u);
PeriodicScalar project_zero_mean(const PeriodicScalar& u);

/// Zero-mean antiderivative, symbol 1/(i k nu). Input must have zero mean.
PeriodicScalar antiderivative(const PeriodicScalar& u);

PeriodicScalar differentiate(const PeriodicScalar& u);

/// Harmonic extension V of the boundary data w + h: V = w + h on y = 0,
/// V = 0 on y = -h, with mode-k profile sinh(k nu (y+h)) / sinh(k nu h) and
/// the linear part y + h carried by mode 0.
StripField harmonic_extension(const PeriodicScalar& w, double h, int y_cells);

/// Harmonic extension with Dirichlet data v at y = 0 and 0 at y = -h,
/// without the laminar linear part (mode 0 extends as v0 (y+h)/h).
StripField dirichlet_extension(const PeriodicScalar& v, double h, int y_cells);

/// Surface gradient of the harmonic extension: (w', 1 + C_h^L w').
std::pair<PeriodicScalar, PeriodicScalar> surface_gradient(const PeriodicScalar& w, double h);

struct MetricResult {
    PeriodicScalar values;   // projection of the pointwise values
    double min_on_grid = 0.0;
    std::vector<double> grid_values;
};

/// Conformal factor K(w) = sqrt((1 + C_h^L w')^2 + w'^2) on the dealiased
/// collocation grid, re-projected; K(0) = 1.
MetricResult metric_K(const PeriodicScalar& w, double h);

struct SurfaceCurve {
    std::vector<double> x;  // X = x + (C_h^L w)(x)
    std::vector<double> y;  // Y = w(x) + h
};

/// Samples of the surface parametrization over one period.
SurfaceCurve surface_curve(const PeriodicScalar& w, double h, int n_samples);

/// Brute-force segment-pair test for self-intersection of the periodic curve
/// (two adjacent copies are examined so intersections across the seam are
/// caught as well).
bool curve_self_intersects(const SurfaceCurve& c, double period);

} // namespace wavestrip
