#pragma once

#include <utility>
#include <vector>

#include "wavestrip/elliptic.hpp"
#include "wavestrip/laminar.hpp"
#include "wavestrip/linalg.hpp"
#include "wavestrip/spectral.hpp"

namespace wavestrip {

struct Physics {
    double g = 9.81;
    double h = 1.0;
    double L = 2.0 * M_PI;
    double nu() const { return 2.0 * M_PI / L; }
};

struct Resolution {
    int N = 32;   // x-truncation order
    int M = 128;  // y-cells
};

struct Problem {
    Physics phys;
    Resolution res;
    VorticityModel gamma;
};

/// Solver unknown (lambda, q, w, phi). w is even with zero mean (cosine-only
/// storage), phi is even with structurally zero traces. `sign` is the sign of
/// S dA/dy + lambda, fixed once per branch.
struct State {
    double lambda = 0.0;
    double q = 0.0;
    PeriodicScalar w;
    StripField phi;
    int sign = 1;

    static State trivial(const Problem& p, double lambda);
};

/// Everything derived from a state that both the residual and the monitors
/// need. Margins may be non-positive here; admissibility is enforced by the
/// operations that require it.
struct OperatorEval {
    LaminarFlow laminar;
    StripField V;
    StripField A;
    PeriodicScalar surf_dyA;       // S dA/dy, even
    Margins margins;
    std::vector<double> w_grid;    // on the dealiased grid
    std::vector<double> k_grid;    // K(w)
    std::vector<double> b_grid;    // S dA/dy + lambda
    std::vector<double> den_grid;  // 2q + lambda^2 - 2 g w
};

OperatorEval evaluate_state(const Problem& p, const State& s);

/// R on the dealiased grid; requires admissibility.
std::vector<double> bernoulli_R_grid(const Problem& p, const State& s,
                                     const OperatorEval& ev);

/// R projected back onto modes (even). Throws AdmissibilityError with the
/// three margins when the state leaves the admissible set.
PeriodicScalar bernoulli_R(const Problem& p, const State& s);

struct MValue {
    double m1 = 0.0;
    PeriodicScalar m2;
    StripField m3;
};

MValue apply_M(const Problem& p, const State& s);

/// Packed residual F = (q, w, phi) - M. Layout of the flat vector:
/// [ f1 | f2 cosine modes 1..N | f3 interior values, mode-major, modes 0..N ].
struct ResidualVector {
    double f1 = 0.0;
    PeriodicScalar f2;
    StripField f3;

    std::vector<double> pack() const;
    double max_norm() const;
};

int packed_dim(const Resolution& r);

std::vector<double> pack_state(const State& s);
State unpack_state(const Problem& p, double lambda, int sign,
                   const std::vector<double>& v);

ResidualVector apply_F(const Problem& p, const State& s);
ResidualVector apply_F(const Problem& p, const State& s, const OperatorEval& ev);

/// Max-norm of K(w) - R over the collocation grid; zero on exact solutions.
double flattened_bernoulli_gap(const Problem& p, const State& s);

/// Residuals of the original water-wave system, checked in the physical
/// domain through the conformal map with finite differences on the strip.
struct PhysicalOracleReport {
    bool mapping_injective = true;
    bool map_nondegenerate = true;
    bool above_bed = true;
    double res_poisson = 0.0;
    double res_bernoulli = 0.0;
    double res_surface = 0.0;
    double res_bottom = 0.0;
};

PhysicalOracleReport physical_oracle(const Problem& p, const State& s);

/// Frechet derivative of F at the trivial solution (lambda, 0, 0, 0),
/// assembled from the closed-form building blocks (the auxiliary solves for
/// the w- and phi-directions are diagonal in the x-modes).
class TrivialLinearization {
public:
    TrivialLinearization(const Problem& p, double lambda);

    std::vector<double> apply(const std::vector<double>& packed) const;
    /// Dense assembly, intended for small resolutions.
    Matrix dense() const;

    const LaminarFlow& laminar() const { return laminar_; }

private:
    Problem prob_;
    double lambda_;
    LaminarFlow laminar_;
};

/// The good-unknown isomorphism at a laminar flow:
///   theta -> (-S theta / lambda, theta - (psi_y / lambda) V[S theta]).
std::pair<PeriodicScalar, StripField> t_isomorphism(double lambda,
                                                    const LaminarFlow& laminar,
                                                    const StripField& theta);

/// Its inverse: (dw, dphi) -> dphi - psi_y V[dw].
StripField t_isomorphism_inverse(double lambda, const LaminarFlow& laminar,
                                 const PeriodicScalar& dw, const StripField& dphi);

/// The reduced linearized operator in the good unknown, (L1 theta, L2 theta).
std::pair<PeriodicScalar, StripField> linearized_L(const Problem& p, double lambda,
                                                   const LaminarFlow& laminar,
                                                   const StripField& theta);

/// Carries a state to another resolution: surface modes are zero-padded or
/// truncated, field profiles are interpolated (cubic) onto the new y-grid.
State resample_state(const Problem& to, const State& s);

} // namespace wavestrip
