#pragma once

#include <vector>

#include "wavestrip/fourier.hpp"
#include "wavestrip/vorticity.hpp"

namespace wavestrip {

/// Laminar (x-independent, flat surface) flow profile for a given surface
/// velocity lambda, on the shared y-grid y_j = -h + j h / M. Carries the
/// lambda-derivative of the profile alongside, and the mass flux m(lambda).
struct LaminarFlow {
    double lambda = 0.0;
    double h = 0.0;
    int M = 0;
    std::vector<double> psi;       // psi(y_j), psi(0) = 0
    std::vector<double> psi_y;     // psi_y(y_j), psi_y(0) = lambda
    std::vector<double> dpsi;      // d/dlambda psi
    std::vector<double> dpsi_y;    // d/dlambda psi_y
    double mass_flux = 0.0;        // m(lambda) = -psi(-h)

    double dy() const { return h / M; }
    double y(int j) const { return j == M ? 0.0 : -h + j * (h / M); }
    /// m'(lambda) = -d/dlambda psi(-h)
    double mass_flux_slope() const { return -dpsi.front(); }
};

/// Integrates psi'' = -gamma(psi), psi(0) = 0, psi_y(0) = lambda downward,
/// together with the variational equation for the lambda-derivative.
/// Step count adapts to the stiffness of gamma'.
LaminarFlow solve_laminar(const VorticityModel& gamma, double lambda, double h, int y_cells);

/// Solution record of the Sturm-Liouville shot and the dispersion relation.
struct DispersionResult {
    double mu = 0.0;
    double lambda = 0.0;
    double d = 0.0;                  // infinity when mu is in the spectrum
    double d_lambda = 0.0;
    double beta_y0 = 0.0;            // beta'(0)
    double dbeta_y0_dlambda = 0.0;   // d/dlambda of beta'(0)
    bool in_dirichlet_spectrum = false;
    std::vector<double> beta;        // beta(y_j); the unscaled shot when in spectrum
};

/// Shooting solve of beta'' + (gamma'(psi^lambda) + mu) beta = 0,
/// beta(-h) = 0, beta(0) = 1: shoot from the bed with unit slope and rescale.
/// If the shot vanishes at y = 0 (relative to its sup), mu is flagged as a
/// Dirichlet eigenvalue instead of rescaling. d and d_lambda are not filled.
DispersionResult solve_beta(const VorticityModel& gamma, double lambda, double mu,
                            double h, const LaminarFlow& laminar);

/// Full dispersion evaluation d(mu, lambda) = beta'(0) + gamma(0)/lambda
/// - g/lambda^2, with d_lambda from the variational equation.
DispersionResult dispersion(const VorticityModel& gamma, double lambda, double mu,
                            double h, double g);

struct BifurcationRoot {
    double lambda0 = 0.0;
    int k = 0;
    double d_lambda = 0.0;
    int multiplicity = 0;
    std::vector<int> kernel_modes;
};

/// All roots of lambda -> d(-(k nu)^2, lambda) inside [lo, hi], located by a
/// sign-change scan plus bisection. The bracket must not contain lambda = 0.
std::vector<BifurcationRoot> find_bifurcation(const VorticityModel& gamma, double g,
                                              double h, double L, int k,
                                              double lo, double hi,
                                              int scan_points = 400);

struct KernelScan {
    int multiplicity = 0;
    std::vector<int> modes;
    bool spectrum_assumption_ok = true;  // 0 not a Dirichlet eigenvalue
};

/// Counts wavenumbers k in 1..k_max whose dispersion value vanishes at this
/// lambda (within a scale-aware tolerance).
KernelScan kernel_multiplicity(const VorticityModel& gamma, double lambda, double g,
                               double h, double L, int k_max = 64,
                               double rel_tol = 1e-7);

struct PruferBoundsRow {
    double mu = 0.0;
    double beta_y0 = 0.0;
    double lower = 0.0;      // v(mu + sup gamma')
    double upper = 0.0;      // v(mu + inf gamma')
    bool in_spectrum = false;
    bool ok = true;
};

struct PruferBoundsReport {
    std::vector<PruferBoundsRow> rows;
    int violations = 0;
    bool all_ok = true;
};

/// Checks v(mu + sup gamma') <= beta'(0) <= v(mu + inf gamma') with
/// v(z) = sqrt(-z) coth(h sqrt(-z)) (continued through z = 0) on sampled mu.
PruferBoundsReport prufer_bounds_check(const VorticityModel& gamma, double lambda,
                                       double mu_lo, double mu_hi, int samples,
                                       double h);

/// The comparison function of the Sturm-Liouville bounds.
double prufer_bound_v(double z, double h);

} // namespace wavestrip
