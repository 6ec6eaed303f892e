#include "wavestrip/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "wavestrip/diagnostics.hpp"

namespace wavestrip {

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::None: return "none";
        case Verdict::LambdaUnbounded: return "lambda_unbounded";
        case Verdict::SurfaceNormUnbounded: return "surface_norm_unbounded";
        case Verdict::VorticityUnbounded: return "vorticity_unbounded";
        case Verdict::ReturnedToTrivial: return "returned_to_trivial";
        case Verdict::FlatSurfaceNonzeroPhi: return "flat_surface_nonzero_phi";
        case Verdict::GreatestHeight: return "greatest_height";
        case Verdict::ConformalDegeneracy: return "conformal_degeneracy";
        case Verdict::SelfIntersection: return "self_intersection";
        case Verdict::BedIntersection: return "bed_intersection";
        case Verdict::BudgetExhausted: return "budget_exhausted";
        case Verdict::Stalled: return "stalled";
        case Verdict::NodalViolation: return "nodal_violation";
    }
    return "unknown";
}

bool phi_is_slaved(const Problem& p) {
    // gamma' == 0 means A does not depend on phi, so phi = A(lambda, w)
    // closes the field equation identically.
    return p.gamma.kind() == VorticityModel::Kind::Constant;
}

std::vector<double> arclength_weights(const Problem& p, bool slaved_phi) {
    const int N = p.res.N, M = p.res.M;
    std::vector<double> w;
    if (slaved_phi) {
        w.assign(static_cast<size_t>(1 + N), 1.0);
    } else {
        w.assign(static_cast<size_t>(packed_dim(p.res)), 1.0);
        const double fw = 1.0 / std::sqrt(static_cast<double>(N) * M);
        for (size_t i = static_cast<size_t>(1 + N); i < w.size(); ++i) w[i] = fw;
    }
    w.push_back(1.0);  // lambda slot
    return w;
}

namespace {

struct SystemEval {
    std::vector<double> f;
    Margins margins;
    State state;
};

/// Residual of the packed system, in full or phi-slaved form.
class System {
public:
    System(const Problem& p, int sign) : p_(p), sign_(sign), slaved_(phi_is_slaved(p)) {}

    bool slaved() const { return slaved_; }
    int dim() const { return slaved_ ? 1 + p_.res.N : packed_dim(p_.res); }

    std::vector<double> pack(const State& s) const {
        if (!slaved_) return pack_state(s);
        std::vector<double> u(static_cast<size_t>(dim()));
        u[0] = s.q;
        for (int k = 1; k <= p_.res.N; ++k) u[static_cast<size_t>(k)] = s.w.cos_coeff(k);
        return u;
    }

    State build_state(double lambda, const std::vector<double>& u) const {
        if (!slaved_) return unpack_state(p_, lambda, sign_, u);
        State s = State::trivial(p_, lambda);
        s.sign = sign_;
        s.q = u[0];
        for (int k = 1; k <= p_.res.N; ++k) s.w.set_cos(k, u[static_cast<size_t>(k)]);
        return s;
    }

    SystemEval residual(double lambda, const std::vector<double>& u) const {
        State s = build_state(lambda, u);
        OperatorEval ev = evaluate_state(p_, s);
        if (slaved_) s.phi = ev.A;  // closes F3 = phi - A exactly
        ResidualVector rv = apply_F(p_, s, ev);
        SystemEval out;
        out.margins = ev.margins;
        out.state = std::move(s);
        if (slaved_) {
            out.f.resize(static_cast<size_t>(dim()));
            out.f[0] = rv.f1;
            for (int k = 1; k <= p_.res.N; ++k)
                out.f[static_cast<size_t>(k)] = rv.f2.cos_coeff(k);
        } else {
            out.f = rv.pack();
        }
        return out;
    }

private:
    const Problem& p_;
    int sign_;
    bool slaved_;
};

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double constraint_residual(const Constraint& c, const std::vector<double>& u,
                           double lambda, const std::vector<double>& weights) {
    switch (c.type) {
        case Constraint::Type::FixedLambda:
            return 0.0;
        case Constraint::Type::FixedAmplitude:
            return c.amp_sign * u[static_cast<size_t>(c.amp_mode)] - c.amp_target;
        case Constraint::Type::PseudoArclength: {
            double s = 0.0;
            for (size_t i = 0; i < u.size(); ++i) {
                const double wi = weights[i];
                s += wi * wi * (u[i] - c.ref_u[i]) * c.tangent_u[i];
            }
            const double wl = weights.back();
            s += wl * wl * (lambda - c.ref_lambda) * c.tangent_lambda;
            return s - c.ds;
        }
    }
    return 0.0;
}

void constraint_row(const Constraint& c, const std::vector<double>& weights,
                    int dim, double* row, double* dlambda) {
    for (int i = 0; i < dim; ++i) row[i] = 0.0;
    *dlambda = 0.0;
    if (c.type == Constraint::Type::FixedAmplitude) {
        row[c.amp_mode] = c.amp_sign;
    } else if (c.type == Constraint::Type::PseudoArclength) {
        for (int i = 0; i < dim; ++i) {
            const double wi = weights[static_cast<size_t>(i)];
            row[i] = wi * wi * c.tangent_u[static_cast<size_t>(i)];
        }
        const double wl = weights.back();
        *dlambda = wl * wl * c.tangent_lambda;
    }
}

/// Forward-difference Jacobian of [F; constraint]; columns are independent
/// and run in parallel. Bitwise identical to the serial assembly.
template <bool Parallel>
Matrix jacobian_impl(const System& sys, const Constraint& c,
                     const std::vector<double>& weights,
                     const std::vector<double>& u, double lambda,
                     const std::vector<double>& f0, bool with_lambda,
                     bool* column_failed) {
    const int d = sys.dim();
    const int n = d + (with_lambda ? 1 : 0);
    Matrix jac(n, n);
    *column_failed = false;
    bool failed = false;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (Parallel)
#endif
    for (int col = 0; col < n; ++col) {
        try {
            std::vector<double> up = u;
            double lam = lambda;
            double step;
            if (col < d) {
                step = std::sqrt(std::numeric_limits<double>::epsilon())
                       * (1.0 + std::abs(u[static_cast<size_t>(col)]));
                up[static_cast<size_t>(col)] += step;
            } else {
                step = std::sqrt(std::numeric_limits<double>::epsilon())
                       * (1.0 + std::abs(lambda));
                lam += step;
            }
            const SystemEval ep = sys.residual(lam, up);
            for (int r = 0; r < d; ++r)
                jac(r, col) = (ep.f[static_cast<size_t>(r)] - f0[static_cast<size_t>(r)]) / step;
        } catch (const Error&) {
            failed = true;
        }
    }
    if (failed) {
        *column_failed = true;
        return jac;
    }
    if (with_lambda) {
        double dl = 0.0;
        std::vector<double> row(static_cast<size_t>(d));
        constraint_row(c, weights, d, row.data(), &dl);
        for (int i = 0; i < d; ++i) jac(d, i) = row[static_cast<size_t>(i)];
        jac(d, d) = dl;
    }
    return jac;
}

} // namespace

Constraint Constraint::fixed_lambda() { return Constraint{}; }

Constraint Constraint::fixed_amplitude(int mode, double sign, double target) {
    Constraint c;
    c.type = Type::FixedAmplitude;
    c.amp_mode = mode;
    c.amp_sign = sign;
    c.amp_target = target;
    return c;
}

NewtonResult newton_correct(const Problem& p, const State& guess,
                            const Constraint& constraint,
                            const ContinuationConfig& cfg) {
    System sys(p, guess.sign);
    const bool with_lambda = constraint.type != Constraint::Type::FixedLambda;
    const std::vector<double> weights = arclength_weights(p, sys.slaved());
    const int d = sys.dim();

    std::vector<double> u = sys.pack(guess);
    double lambda = guess.lambda;

    // an inadmissible initial guess is the caller's problem
    SystemEval cur = sys.residual(lambda, u);
    if (!cur.margins.admissible())
        throw AdmissibilityError("newton_correct: guess outside the admissible set",
                                 cur.margins);

    NewtonResult res;
    auto total_norm = [&](const SystemEval& e, double lam, const std::vector<double>& uu) {
        double n = inf_norm(e.f);
        if (with_lambda)
            n = std::max(n, std::abs(constraint_residual(constraint, uu, lam, weights)));
        return n;
    };

    double fnorm = total_norm(cur, lambda, u);
    for (int iter = 0; iter <= cfg.max_newton_iter; ++iter) {
        if (fnorm <= cfg.newton_tol) {
            res.converged = true;
            res.iters = iter;
            res.residual_norm = fnorm;
            res.state = cur.state;
            // bordered determinant at the solution, for branch monitors
            bool colfail = false;
            Matrix jac = jacobian_impl<true>(sys, constraint, weights, u, lambda,
                                             cur.f, with_lambda, &colfail);
            if (!colfail) {
                LuFactors lu = lu_factor(std::move(jac));
                res.det_sign = lu.det_sign;
                res.log_abs_det = lu.log_abs_det;
                res.rcond = lu_rcond_estimate(lu);
            }
            return res;
        }
        if (iter == cfg.max_newton_iter) break;

        bool colfail = false;
        Matrix jac = jacobian_impl<true>(sys, constraint, weights, u, lambda,
                                         cur.f, with_lambda, &colfail);
        if (colfail) {
            res.failure = "jacobian column left the admissible set";
            res.iters = iter;
            res.residual_norm = fnorm;
            res.state = cur.state;
            return res;
        }
        LuFactors lu = lu_factor(std::move(jac));
        if (lu.det_sign == 0 || lu_rcond_estimate(lu) < 1e-15) {
            res.failure = "jacobian numerically singular";
            res.iters = iter;
            res.residual_norm = fnorm;
            res.state = cur.state;
            return res;
        }

        std::vector<double> rhs(static_cast<size_t>(d + (with_lambda ? 1 : 0)));
        for (int i = 0; i < d; ++i) rhs[static_cast<size_t>(i)] = -cur.f[static_cast<size_t>(i)];
        if (with_lambda)
            rhs[static_cast<size_t>(d)] = -constraint_residual(constraint, u, lambda, weights);
        const std::vector<double> delta = lu_solve(lu, std::move(rhs));

        // damped update; admissibility violations shrink the step
        bool accepted = false;
        for (double t = 1.0; t >= 1.0 / 64.0; t *= 0.5) {
            std::vector<double> ut = u;
            for (int i = 0; i < d; ++i) ut[static_cast<size_t>(i)] += t * delta[static_cast<size_t>(i)];
            double lt = lambda + (with_lambda ? t * delta[static_cast<size_t>(d)] : 0.0);
            try {
                SystemEval et = sys.residual(lt, ut);
                if (!et.margins.admissible()) continue;
                const double fn = total_norm(et, lt, ut);
                if (fn <= std::max((1.0 - 0.25 * t) * fnorm, cfg.newton_tol)) {
                    u = std::move(ut);
                    lambda = lt;
                    cur = std::move(et);
                    fnorm = fn;
                    accepted = true;
                    break;
                }
            } catch (const Error&) {
                continue;
            }
        }
        if (!accepted) {
            res.failure = "line search could not reduce the residual";
            res.iters = iter + 1;
            res.residual_norm = fnorm;
            res.state = cur.state;
            return res;
        }
    }
    res.failure = "maximum Newton iterations exceeded";
    res.iters = cfg.max_newton_iter;
    res.residual_norm = fnorm;
    res.state = cur.state;
    return res;
}

std::vector<double> Tangent::pack() const {
    ResidualVector rv{dq, dw, dphi};
    return rv.pack();
}

Tangent bifurcation_tangent(const Problem& p, double lambda0, int k0) {
    if (lambda0 == 0.0) throw Error("bifurcation_tangent: lambda0 must be nonzero");
    if (k0 < 1 || k0 > p.res.N)
        throw Error("bifurcation_tangent: k0 outside the resolved modes");

    const KernelScan scan = kernel_multiplicity(p.gamma, lambda0, p.phys.g,
                                                p.phys.h, p.phys.L);
    if (!scan.spectrum_assumption_ok)
        throw NumericsError("bifurcation_tangent: 0 lies in the Dirichlet spectrum "
                            "of the laminar Sturm-Liouville operator");
    if (scan.multiplicity != 1 || scan.modes.empty() || scan.modes[0] != k0)
        throw NumericsError("bifurcation_tangent: kernel multiplicity "
                            + std::to_string(scan.multiplicity)
                            + " at lambda0, refusing to switch branches");

    LaminarFlow lam = solve_laminar(p.gamma, lambda0, p.phys.h, p.res.M);
    const double nu = p.phys.nu();
    const double mu = -(k0 * nu) * (k0 * nu);
    DispersionResult dr = solve_beta(p.gamma, lambda0, mu, p.phys.h, lam);
    if (dr.in_dirichlet_spectrum)
        throw NumericsError("bifurcation_tangent: -(k0 nu)^2 in Dirichlet spectrum");
    const double d = dr.beta_y0 + p.gamma.value(0.0) / lambda0
                     - p.phys.g / (lambda0 * lambda0);
    const double d_lambda = dr.dbeta_y0_dlambda
                            + 2.0 * p.phys.g / std::pow(lambda0, 3)
                            - p.gamma.value(0.0) / (lambda0 * lambda0);
    const double scale = std::abs(k0 * nu * coth(k0 * nu * p.phys.h))
                         + std::abs(p.gamma.value(0.0) / lambda0)
                         + p.phys.g / (lambda0 * lambda0);
    if (std::abs(d) > 1e-6 * scale)
        throw NumericsError("bifurcation_tangent: dispersion does not vanish at lambda0");
    if (std::abs(d_lambda) < 1e-8 * std::max(1.0, scale))
        throw NumericsError("bifurcation_tangent: transversality d_lambda ~ 0, refusing");

    // kernel element theta = beta(y) cos(k0 nu x)
    StripField theta(p.phys.L, p.phys.h, p.res.N, p.res.M, Parity::Even);
    for (int j = 0; j <= p.res.M; ++j)
        theta.cos_prof(k0, j) = dr.beta[static_cast<size_t>(j)];

    auto [dw, dphi] = t_isomorphism(lambda0, lam, theta);

    // normalize: unit amplitude in mode k0, oriented by -sign(lambda0)
    const double target = lambda0 > 0.0 ? -1.0 : 1.0;
    const double c = target / dw.cos_coeff(k0);
    Tangent t;
    t.dlambda = 0.0;
    t.dq = 0.0;
    t.dw = c * dw;
    t.dphi = c * dphi;
    return t;
}

Monitors compute_monitors(const Problem& p, const State& s, const OperatorEval& ev,
                          double vorticity_p) {
    Monitors m;
    m.margins = ev.margins;

    const int n = static_cast<int>(ev.w_grid.size());
    const double L = p.phys.L;
    double wmin = std::numeric_limits<double>::infinity(), wmax = -wmin;
    for (double v : ev.w_grid) { wmin = std::min(wmin, v); wmax = std::max(wmax, v); }
    m.bed_clearance = wmin + p.phys.h;
    m.wave_height = wmax - wmin;
    m.wnorm_sup = std::max(std::abs(wmin), std::abs(wmax));

    PeriodicScalar wp = s.w.derivative();
    CollocationGrid grid(L, p.res.N, n);
    const std::vector<double> wpv = grid.values(wp);
    for (double v : wpv) m.wprime_sup = std::max(m.wprime_sup, std::abs(v));

    // discrete Holder quotient, exponent 7/8, periodic distance
    const double dx = L / n;
    double hq = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double dist = (j - i) * dx;
            dist = std::min(dist, L - dist);
            hq = std::max(hq, std::abs(ev.w_grid[static_cast<size_t>(i)]
                                       - ev.w_grid[static_cast<size_t>(j)])
                                  / std::pow(dist, 0.875));
        }
    m.holder_quotient = hq;

    if (p.gamma.kind() == VorticityModel::Kind::Constant && p.gamma.param1() == 0.0) {
        m.vorticity_lp = 0.0;
    } else {
        // |gamma(psi)|^p over one period of the physical domain equals
        // |gamma(phi + psi^lam)|^p |grad V|^2 over the strip
        const std::vector<double> phiv = s.phi.values_on(grid);
        const double nu = p.phys.nu(), h = p.phys.h;
        const int N = p.res.N, M = p.res.M;
        std::vector<double> cvx(static_cast<size_t>(N + 1) * (M + 1), 0.0);
        std::vector<double> cvy(static_cast<size_t>(N + 1) * (M + 1), 0.0);
        for (int k = 1; k <= N; ++k) {
            const double ak = s.w.cos_coeff(k);
            if (ak == 0.0) continue;
            for (int j = 0; j <= M; ++j) {
                const double a = k * nu * (s.phi.y(j) + h), b = k * nu * h;
                cvx[static_cast<size_t>(k) * (M + 1) + j] = -ak * k * nu * sinh_ratio(a, b);
                cvy[static_cast<size_t>(k) * (M + 1) + j] =
                    ak * k * nu * cosh_sinh_ratio(a, b);
            }
        }
        double acc = 0.0;
        for (int j = 0; j <= M; ++j) {
            const double yw = (j == 0 || j == M) ? 0.5 : 1.0;
            double rowsum = 0.0;
            for (int i = 0; i < n; ++i) {
                double vx = 0.0, vy = 1.0;
                for (int k = 1; k <= N; ++k) {
                    vx += cvx[static_cast<size_t>(k) * (M + 1) + j] * grid.sin_mode(k, i);
                    vy += cvy[static_cast<size_t>(k) * (M + 1) + j] * grid.cos_mode(k, i);
                }
                const double g2 = vx * vx + vy * vy;
                const double gv = p.gamma.value(phiv[static_cast<size_t>(j) * n + i]
                                                + ev.laminar.psi[static_cast<size_t>(j)]);
                rowsum += std::pow(std::abs(gv), vorticity_p) * g2;
            }
            acc += yw * rowsum;
        }
        acc *= dx * (p.phys.h / M);
        m.vorticity_lp = std::pow(acc, 1.0 / vorticity_p);
    }

    m.norm_q = std::abs(s.q);
    m.norm_lambda = std::abs(s.lambda);
    m.norm_w = m.wnorm_sup;
    m.norm_phi = s.phi.max_abs();
    return m;
}

namespace {

struct LoopSetup {
    double greatest_height_threshold;
    double bed_clearance_threshold;
    double initial_step;
};

LoopSetup resolve_thresholds(const Problem& p, const ContinuationConfig& cfg,
                             double lambda0) {
    LoopSetup s;
    s.greatest_height_threshold = cfg.greatest_height_threshold > 0.0
        ? cfg.greatest_height_threshold
        : 0.2 * 0.5 * lambda0 * lambda0;
    s.bed_clearance_threshold = cfg.bed_clearance_threshold > 0.0
        ? cfg.bed_clearance_threshold
        : 1e-3 * p.phys.h;
    s.initial_step = cfg.initial_step > 0.0 ? cfg.initial_step : 0.01 * p.phys.h;
    return s;
}

std::optional<Verdict> check_alternatives(const Problem& p, const ContinuationConfig& cfg,
                                          const LoopSetup& setup, const BranchPoint& bp,
                                          double arclength_from_start) {
    const Monitors& m = bp.monitors;
    if (std::abs(bp.state.lambda) >= cfg.lambda_bound) return Verdict::LambdaUnbounded;
    if (m.holder_quotient >= cfg.wnorm_bound) return Verdict::SurfaceNormUnbounded;
    if (m.vorticity_lp >= cfg.vorticity_lp_bound) return Verdict::VorticityUnbounded;
    if (m.wnorm_sup < cfg.return_trivial_wnorm
        && arclength_from_start > 10.0 * setup.initial_step) {
        return m.norm_phi < cfg.return_trivial_wnorm ? Verdict::ReturnedToTrivial
                                                     : Verdict::FlatSurfaceNonzeroPhi;
    }
    if (m.margins.greatest_height <= setup.greatest_height_threshold)
        return Verdict::GreatestHeight;
    if (m.margins.min_k <= cfg.min_k_threshold) return Verdict::ConformalDegeneracy;
    if (cfg.check_self_intersection && m.self_intersect) return Verdict::SelfIntersection;
    if (m.bed_clearance <= setup.bed_clearance_threshold) return Verdict::BedIntersection;
    (void)p;
    return std::nullopt;
}

BranchPoint make_branch_point(const Problem& p, const ContinuationConfig& cfg,
                              const NewtonResult& nr, double s) {
    BranchPoint bp;
    bp.state = nr.state;
    bp.s = s;
    bp.newton_iters = nr.iters;
    bp.det_sign = nr.det_sign;
    bp.log_abs_det = nr.log_abs_det;
    OperatorEval ev = evaluate_state(p, bp.state);
    bp.monitors = compute_monitors(p, bp.state, ev, cfg.vorticity_p);
    if (cfg.check_self_intersection) {
        SurfaceCurve curve = surface_curve(bp.state.w, p.phys.h,
                                           8 * std::max(p.res.N, 16));
        bp.monitors.self_intersect = curve_self_intersects(curve, p.phys.L);
    }
    // Bernoulli identity residual, recomputed from the accepted state
    const std::vector<double> r = bernoulli_R_grid(p, bp.state, ev);
    double gap = 0.0;
    for (size_t i = 0; i < r.size(); ++i)
        gap = std::max(gap, std::abs(ev.k_grid[i] - r[i]));
    bp.bernoulli_gap = gap;
    return bp;
}

double weighted_distance(const std::vector<double>& weights,
                         const std::vector<double>& ua, double la,
                         const std::vector<double>& ub, double lb) {
    double s = 0.0;
    for (size_t i = 0; i < ua.size(); ++i) {
        const double d = weights[i] * (ua[i] - ub[i]);
        s += d * d;
    }
    const double dl = weights.back() * (la - lb);
    return std::sqrt(s + dl * dl);
}

/// Main predictor-corrector loop; `points` already holds at least two
/// entries (or one trivial + first corrected).
BranchResult run_loop(const Problem& p, const ContinuationConfig& cfg,
                      const LoopSetup& setup, std::vector<BranchPoint> points,
                      double step) {
    System sys(p, points.back().state.sign);
    const std::vector<double> weights = arclength_weights(p, sys.slaved());
    BranchResult out;

    while (static_cast<int>(points.size()) < cfg.max_points) {
        const BranchPoint& prev = points[points.size() - 2];
        const BranchPoint& last = points.back();

        std::vector<double> u_prev = sys.pack(prev.state);
        std::vector<double> u_last = sys.pack(last.state);
        const double dist = weighted_distance(weights, u_last, last.state.lambda,
                                              u_prev, prev.state.lambda);
        if (dist == 0.0) {
            out.verdict = Verdict::Stalled;
            out.detail = "consecutive identical points";
            break;
        }

        // secant tangent, normalized in the weighted metric
        std::vector<double> tan_u(u_last.size());
        for (size_t i = 0; i < u_last.size(); ++i)
            tan_u[i] = (u_last[i] - u_prev[i]) / dist;
        const double tan_l = (last.state.lambda - prev.state.lambda) / dist;

        // approaching the greatest-height threshold: fall back to the
        // initial step so termination lands close to the crossing
        if (last.monitors.margins.greatest_height
                < 2.0 * setup.greatest_height_threshold)
            step = std::min(step, setup.initial_step);

        bool advanced = false;
        while (step >= cfg.min_step) {
            // predictor
            State guess = last.state;
            {
                std::vector<double> ug = u_last;
                for (size_t i = 0; i < ug.size(); ++i) ug[i] += step * tan_u[i];
                guess = sys.build_state(last.state.lambda + step * tan_l, ug);
                if (sys.slaved()) {
                    OperatorEval gev = evaluate_state(p, guess);
                    guess.phi = gev.A;
                }
            }

            Constraint c;
            c.type = Constraint::Type::PseudoArclength;
            c.ref_u = u_last;
            c.ref_lambda = last.state.lambda;
            c.tangent_u = tan_u;
            c.tangent_lambda = tan_l;
            c.ds = step;

            NewtonResult nr;
            bool ok = false;
            try {
                nr = newton_correct(p, guess, c, cfg);
                ok = nr.converged;
            } catch (const AdmissibilityError&) {
                ok = false;
            }
            if (ok) {
                std::vector<double> u_new = sys.pack(nr.state);
                const double advanced_by = weighted_distance(weights, u_new,
                                                             nr.state.lambda,
                                                             u_last, last.state.lambda);
                BranchPoint bp = make_branch_point(p, cfg, nr, last.s + advanced_by);
                points.push_back(std::move(bp));
                if (nr.iters <= cfg.grow_iters) step = std::min(2.0 * step, cfg.max_step);
                else if (nr.iters > cfg.shrink_iters) step = std::max(0.5 * step, cfg.min_step);
                advanced = true;
                break;
            }
            step *= 0.5;
        }
        if (!advanced) {
            out.verdict = Verdict::Stalled;
            out.detail = "corrector failed above the minimum step";
            break;
        }

        const BranchPoint& bp = points.back();
        if (cfg.enforce_nodal) {
            WaveReport rep = nodal_check(p, bp.state);
            if (!rep.nodal_pass()) {
                out.verdict = Verdict::NodalViolation;
                out.detail = "nodal property violated: " + rep.nodal_failure();
                break;
            }
        }
        if (auto v = check_alternatives(p, cfg, setup, bp, bp.s)) {
            out.verdict = *v;
            break;
        }
    }
    if (out.verdict == Verdict::None) out.verdict = Verdict::BudgetExhausted;
    out.points = std::move(points);
    return out;
}

} // namespace

BranchResult continue_branch(const Problem& p, double lambda0, int k0,
                             const ContinuationConfig& cfg, int half) {
    const LoopSetup setup = resolve_thresholds(p, cfg, lambda0);

    Tangent t = bifurcation_tangent(p, lambda0, k0);
    if (half < 0) {
        t.dw *= -1.0;
        t.dphi *= -1.0;
    }

    State x0 = State::trivial(p, lambda0);
    System sys(p, x0.sign);

    // trivial starting point: q = 0, Q = lambda0^2/2
    BranchPoint start;
    start.state = x0;
    start.s = 0.0;
    {
        OperatorEval ev = evaluate_state(p, x0);
        start.monitors = compute_monitors(p, x0, ev, cfg.vorticity_p);
    }

    // first point off the trivial curve: amplitude-pinned corrector
    const double s0 = setup.initial_step;
    State guess = x0;
    guess.q = s0 * t.dq;
    guess.w = x0.w + s0 * t.dw;
    guess.phi = x0.phi + s0 * t.dphi;
    if (sys.slaved()) {
        OperatorEval gev = evaluate_state(p, guess);
        guess.phi = gev.A;
    }

    const double amp_sign = (half >= 0 ? 1.0 : -1.0) * (lambda0 > 0.0 ? -1.0 : 1.0);
    Constraint amp = Constraint::fixed_amplitude(k0, amp_sign, s0);
    NewtonResult first = newton_correct(p, guess, amp, cfg);
    if (!first.converged)
        throw NumericsError("continue_branch: corrector failed near the bifurcation point ("
                            + first.failure + ")");

    const std::vector<double> weights = arclength_weights(p, sys.slaved());
    std::vector<double> u0 = sys.pack(x0);
    std::vector<double> u1 = sys.pack(first.state);
    const double s1 = weighted_distance(weights, u1, first.state.lambda, u0, x0.lambda);

    std::vector<BranchPoint> points;
    points.push_back(std::move(start));
    points.push_back(make_branch_point(p, cfg, first, s1));

    // a threshold may already fire at the first point
    if (auto v = check_alternatives(p, cfg, setup, points.back(), points.back().s)) {
        BranchResult out;
        out.verdict = *v;
        out.points = std::move(points);
        return out;
    }

    return run_loop(p, cfg, setup, std::move(points), setup.initial_step);
}

BranchResult continue_from(const Problem& p, const BranchPoint& prev,
                           const BranchPoint& last, const ContinuationConfig& cfg) {
    const LoopSetup setup = resolve_thresholds(p, cfg, last.state.lambda);
    std::vector<BranchPoint> points{prev, last};
    const double step = std::max(cfg.min_step,
                                 std::min(cfg.max_step, std::abs(last.s - prev.s)));
    return run_loop(p, cfg, setup, std::move(points), step);
}

Matrix newton_jacobian(const Problem& p, const State& s, bool parallel) {
    System sys(p, s.sign);
    const Constraint c = Constraint::fixed_lambda();
    const std::vector<double> weights = arclength_weights(p, sys.slaved());
    const std::vector<double> u = sys.pack(s);
    const SystemEval e0 = sys.residual(s.lambda, u);
    bool colfail = false;
    Matrix jac = parallel
        ? jacobian_impl<true>(sys, c, weights, u, s.lambda, e0.f, false, &colfail)
        : jacobian_impl<false>(sys, c, weights, u, s.lambda, e0.f, false, &colfail);
    if (colfail)
        throw AdmissibilityError("newton_jacobian: column evaluation left the admissible set",
                                 e0.margins);
    return jac;
}

std::vector<double> detect_secondary_bifurcation(const std::vector<BranchPoint>& segment) {
    if (segment.size() < 3)
        throw Error("detect_secondary_bifurcation: insufficient points (need >= 3)");
    std::vector<double> hits;
    for (size_t i = 1; i < segment.size(); ++i) {
        const int a = segment[i - 1].det_sign, b = segment[i].det_sign;
        if (a != 0 && b != 0 && a != b)
            hits.push_back(0.5 * (segment[i - 1].s + segment[i].s));
    }
    return hits;
}

} // namespace wavestrip
