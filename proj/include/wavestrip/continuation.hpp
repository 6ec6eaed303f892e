#pragma once

#include <string>
#include <vector>

#include "wavestrip/wave_operator.hpp"

namespace wavestrip {

struct ContinuationConfig {
    double initial_step = 0.0;        // 0: use 0.01 * h
    double min_step = 1e-7;
    double max_step = 0.5;
    double newton_tol = 1e-11;
    int max_newton_iter = 10;
    int max_points = 200;

    // monitor thresholds for the termination alternatives
    double lambda_bound = 50.0;
    double wnorm_bound = 1e3;             // discrete C^{0,7/8} quotient
    double vorticity_lp_bound = 1e6;
    double vorticity_p = 2.0;
    double greatest_height_threshold = 0.0;  // 0: use 0.15 * lambda0^2 / 2
    double min_k_threshold = 0.05;
    double bed_clearance_threshold = 0.0;    // 0: use 1e-3 * h
    double return_trivial_wnorm = 1e-8;
    bool check_self_intersection = true;
    bool enforce_nodal = false;   // abort when a point fails the nodal checks

    int snapshot_every = 10;
    int grow_iters = 3;
    int shrink_iters = 7;
};

enum class Verdict {
    None,
    LambdaUnbounded,        // (i)(a)
    SurfaceNormUnbounded,   // (i)(b)
    VorticityUnbounded,     // (i)(c)
    ReturnedToTrivial,      // (ii)
    FlatSurfaceNonzeroPhi,  // (ii), but with a nontrivial field
    GreatestHeight,         // (iii)
    ConformalDegeneracy,    // (iv)
    SelfIntersection,       // (v)
    BedIntersection,        // (vi)
    BudgetExhausted,
    Stalled,
    NodalViolation,
};

const char* verdict_name(Verdict v);

struct Monitors {
    Margins margins;
    double bed_clearance = 0.0;   // min w + h
    bool self_intersect = false;
    double wave_height = 0.0;     // max w - min w
    double vorticity_lp = 0.0;
    double wnorm_sup = 0.0;
    double wprime_sup = 0.0;
    double holder_quotient = 0.0; // exponent 7/8
    double norm_q = 0.0, norm_lambda = 0.0, norm_w = 0.0, norm_phi = 0.0;
};

struct BranchPoint {
    State state;
    double s = 0.0;
    int newton_iters = 0;
    Monitors monitors;
    int det_sign = 0;
    double log_abs_det = 0.0;
    double bernoulli_gap = 0.0;
};

struct BranchResult {
    std::vector<BranchPoint> points;
    Verdict verdict = Verdict::None;
    std::string detail;
};

/// Kernel direction at a simple bifurcation point, mapped through the
/// good-unknown isomorphism and normalized so the surface component has unit
/// amplitude in mode k0 (oriented by -sign(lambda0)).
struct Tangent {
    double dlambda = 0.0;
    double dq = 0.0;
    PeriodicScalar dw;
    StripField dphi;

    std::vector<double> pack() const;
};

Tangent bifurcation_tangent(const Problem& p, double lambda0, int k0);

struct Constraint {
    enum class Type { FixedLambda, FixedAmplitude, PseudoArclength };
    Type type = Type::FixedLambda;

    // FixedAmplitude: require sign * w_k = target
    int amp_mode = 1;
    double amp_sign = 1.0;
    double amp_target = 0.0;

    // PseudoArclength: weighted secant condition <W(z - ref), W t> = ds
    std::vector<double> ref_u;
    double ref_lambda = 0.0;
    std::vector<double> tangent_u;  // unweighted direction, lambda slot separate
    double tangent_lambda = 0.0;
    double ds = 0.0;

    static Constraint fixed_lambda();
    static Constraint fixed_amplitude(int mode, double sign, double target);
};

struct NewtonResult {
    State state;
    int iters = 0;
    bool converged = false;
    double residual_norm = 0.0;
    int det_sign = 0;
    double log_abs_det = 0.0;
    double rcond = 0.0;
    std::string failure;
};

/// Damped Newton on [F; constraint] with a forward-difference Jacobian,
/// columns assembled in parallel. Lambda joins the unknowns unless the
/// constraint pins it. Admissibility is re-verified on every trial step.
NewtonResult newton_correct(const Problem& p, const State& guess,
                            const Constraint& constraint,
                            const ContinuationConfig& cfg);

/// Weight per packed slot for the arclength metric (the field entries are
/// down-weighted so phi does not dominate).
std::vector<double> arclength_weights(const Problem& p, bool slaved_phi);

/// Whether the phi block can be slaved (gamma' identically zero, so A does
/// not depend on phi and the phi rows of the system are trivial).
bool phi_is_slaved(const Problem& p);

Monitors compute_monitors(const Problem& p, const State& s, const OperatorEval& ev,
                          double vorticity_p);

/// Pseudo-arclength predictor-corrector from a validated bifurcation point.
/// `half` selects the branch half: +1 follows +s, -1 the x-shifted mirror.
BranchResult continue_branch(const Problem& p, double lambda0, int k0,
                             const ContinuationConfig& cfg, int half = +1);

/// Continues from two already-computed consecutive branch points (resume).
BranchResult continue_from(const Problem& p, const BranchPoint& prev,
                           const BranchPoint& last, const ContinuationConfig& cfg);

/// Sign changes of the bordered-Jacobian determinant along a branch segment.
/// Reporting only; returns the arclengths where the character flips.
std::vector<double> detect_secondary_bifurcation(const std::vector<BranchPoint>& segment);

/// Forward-difference Jacobian of the packed square system at a state with
/// lambda held fixed. The parallel assembly is bitwise identical to the
/// serial one; exposed for the kernel tests and the benchmark.
Matrix newton_jacobian(const Problem& p, const State& s, bool parallel);

} // namespace wavestrip
