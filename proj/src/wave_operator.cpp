#include "wavestrip/wave_operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wavestrip {

State State::trivial(const Problem& p, double lambda) {
    if (lambda == 0.0) throw Error("trivial state needs lambda != 0");
    State s;
    s.lambda = lambda;
    s.q = 0.0;
    s.w = PeriodicScalar(p.phys.L, p.res.N, Parity::Even);
    s.phi = StripField(p.phys.L, p.phys.h, p.res.N, p.res.M, Parity::Even);
    s.sign = lambda > 0.0 ? 1 : -1;
    return s;
}

OperatorEval evaluate_state(const Problem& p, const State& s) {
    OperatorEval ev;
    ev.laminar = solve_laminar(p.gamma, s.lambda, p.phys.h, p.res.M);
    ev.V = harmonic_extension(s.w, p.phys.h, p.res.M);
    ev.A = compute_A(p.gamma, ev.laminar, s.w, s.phi);
    ev.surf_dyA = surface_normal_derivative(ev.A);

    CollocationGrid grid(p.phys.L, p.res.N, dealiased_points(p.res.N));
    ev.w_grid = grid.values(s.w);
    auto [wp, vy] = surface_gradient(s.w, p.phys.h);
    const std::vector<double> wpv = grid.values(wp);
    const std::vector<double> vyv = grid.values(vy);
    const std::vector<double> bav = grid.values(ev.surf_dyA);

    const int n = grid.size();
    ev.k_grid.resize(static_cast<size_t>(n));
    ev.b_grid.resize(static_cast<size_t>(n));
    ev.den_grid.resize(static_cast<size_t>(n));

    double min_k = std::numeric_limits<double>::infinity();
    double min_b = min_k, min_den = min_k;
    for (int i = 0; i < n; ++i) {
        const double kv = std::sqrt(vyv[static_cast<size_t>(i)] * vyv[static_cast<size_t>(i)]
                                    + wpv[static_cast<size_t>(i)] * wpv[static_cast<size_t>(i)]);
        const double bv = bav[static_cast<size_t>(i)] + s.lambda;
        const double den = 2.0 * s.q + s.lambda * s.lambda - 2.0 * p.phys.g * ev.w_grid[static_cast<size_t>(i)];
        ev.k_grid[static_cast<size_t>(i)] = kv;
        ev.b_grid[static_cast<size_t>(i)] = bv;
        ev.den_grid[static_cast<size_t>(i)] = den;
        min_k = std::min(min_k, kv);
        min_b = std::min(min_b, s.sign * bv);
        min_den = std::min(min_den, den);
    }
    ev.margins.min_k = min_k;
    ev.margins.min_stagnation = min_b;
    ev.margins.greatest_height = 0.5 * min_den;
    return ev;
}

std::vector<double> bernoulli_R_grid(const Problem&, const State& s, const OperatorEval& ev) {
    if (!ev.margins.admissible())
        throw AdmissibilityError("state outside the admissible set", ev.margins);
    std::vector<double> r(ev.b_grid.size());
    for (size_t i = 0; i < r.size(); ++i)
        r[i] = s.sign * ev.b_grid[i] / std::sqrt(ev.den_grid[i]);
    return r;
}

PeriodicScalar bernoulli_R(const Problem& p, const State& s) {
    OperatorEval ev = evaluate_state(p, s);
    const std::vector<double> r = bernoulli_R_grid(p, s, ev);
    CollocationGrid grid(p.phys.L, p.res.N, dealiased_points(p.res.N));
    return grid.project(r, Parity::Even);
}

namespace {

struct MPieces {
    double m1;
    PeriodicScalar m2;
};

/// The scalar and surface components of M from the grid values of R.
MPieces surface_m_components(const Problem& p, const State& s,
                             const std::vector<double>& r) {
    CollocationGrid grid(p.phys.L, p.res.N, dealiased_points(p.res.N));
    const int n = grid.size();

    std::vector<double> lnr(r.size());
    for (size_t i = 0; i < r.size(); ++i) lnr[i] = std::log(r[i]);
    PeriodicScalar lnR = grid.project(lnr, Parity::Even);
    PeriodicScalar theta = hilbert_strip_inverse(project_zero_mean(lnR), p.phys.h);

    const std::vector<double> th = grid.values(theta);
    double mcos = 0.0;
    std::vector<double> rsin(r.size());
    for (int i = 0; i < n; ++i) {
        mcos += r[static_cast<size_t>(i)] * std::cos(th[static_cast<size_t>(i)]);
        rsin[static_cast<size_t>(i)] = r[static_cast<size_t>(i)] * std::sin(th[static_cast<size_t>(i)]);
    }
    mcos /= n;

    PeriodicScalar odd = grid.project(rsin, Parity::Odd);
    MPieces out{s.q + mcos - 1.0, antiderivative(odd)};
    return out;
}

} // namespace

MValue apply_M(const Problem& p, const State& s) {
    OperatorEval ev = evaluate_state(p, s);
    const std::vector<double> r = bernoulli_R_grid(p, s, ev);
    MPieces mp = surface_m_components(p, s, r);
    return MValue{mp.m1, std::move(mp.m2), std::move(ev.A)};
}

int packed_dim(const Resolution& r) { return 1 + r.N + (r.N + 1) * (r.M - 1); }

std::vector<double> ResidualVector::pack() const {
    const int N = f2.order(), M = f3.y_cells();
    std::vector<double> v;
    v.reserve(static_cast<size_t>(1 + N + (N + 1) * (M - 1)));
    v.push_back(f1);
    for (int k = 1; k <= N; ++k) v.push_back(f2.cos_coeff(k));
    for (int k = 0; k <= N; ++k)
        for (int j = 1; j < M; ++j) v.push_back(f3.cos_prof(k, j));
    return v;
}

double ResidualVector::max_norm() const {
    double m = std::abs(f1);
    for (int k = 1; k <= f2.order(); ++k) m = std::max(m, std::abs(f2.cos_coeff(k)));
    for (int k = 0; k <= f3.order(); ++k)
        for (int j = 1; j < f3.y_cells(); ++j)
            m = std::max(m, std::abs(f3.cos_prof(k, j)));
    return m;
}

std::vector<double> pack_state(const State& s) {
    ResidualVector rv{s.q, s.w, s.phi};
    return rv.pack();
}

State unpack_state(const Problem& p, double lambda, int sign, const std::vector<double>& v) {
    const int N = p.res.N, M = p.res.M;
    if (static_cast<int>(v.size()) != packed_dim(p.res))
        throw Error("unpack_state: wrong packed dimension");
    State s;
    s.lambda = lambda;
    s.sign = sign;
    s.q = v[0];
    s.w = PeriodicScalar(p.phys.L, N, Parity::Even);
    for (int k = 1; k <= N; ++k) s.w.set_cos(k, v[static_cast<size_t>(k)]);
    s.phi = StripField(p.phys.L, p.phys.h, N, M, Parity::Even);
    size_t idx = static_cast<size_t>(1 + N);
    for (int k = 0; k <= N; ++k)
        for (int j = 1; j < M; ++j) s.phi.cos_prof(k, j) = v[idx++];
    return s;
}

ResidualVector apply_F(const Problem& p, const State& s) {
    return apply_F(p, s, evaluate_state(p, s));
}

ResidualVector apply_F(const Problem& p, const State& s, const OperatorEval& ev) {
    const std::vector<double> r = bernoulli_R_grid(p, s, ev);
    MPieces mp = surface_m_components(p, s, r);
    ResidualVector f;
    f.f1 = s.q - mp.m1;  // = 1 - <R cos Theta>
    f.f2 = s.w - mp.m2;
    f.f3 = s.phi - ev.A;
    return f;
}

double flattened_bernoulli_gap(const Problem& p, const State& s) {
    OperatorEval ev = evaluate_state(p, s);
    const std::vector<double> r = bernoulli_R_grid(p, s, ev);
    double gap = 0.0;
    for (size_t i = 0; i < r.size(); ++i)
        gap = std::max(gap, std::abs(ev.k_grid[i] - r[i]));
    return gap;
}

PhysicalOracleReport physical_oracle(const Problem& p, const State& s) {
    PhysicalOracleReport rep;
    const int N = p.res.N, M = p.res.M;
    const double h = p.phys.h, L = p.phys.L, nu = p.phys.nu();
    const int n = dealiased_points(N);
    const double dx = L / n, dy = h / M;

    OperatorEval ev = evaluate_state(p, s);

    // geometric admissibility of the reconstruction
    SurfaceCurve curve = surface_curve(s.w, h, 4 * n);
    rep.mapping_injective = !curve_self_intersects(curve, L);
    for (double yv : curve.y)
        if (!(yv > 0.0)) rep.above_bed = false;

    CollocationGrid grid(L, N, n);
    const std::vector<double> phiv = s.phi.values_on(grid);

    // |grad V|^2 from the explicit harmonic extension; the mode profiles
    // depend on (k, j) only
    std::vector<double> cvx(static_cast<size_t>(N + 1) * (M + 1), 0.0);
    std::vector<double> cvy(static_cast<size_t>(N + 1) * (M + 1), 0.0);
    for (int k = 1; k <= N; ++k) {
        const double ak = s.w.cos_coeff(k);
        if (ak == 0.0) continue;
        for (int j = 0; j <= M; ++j) {
            const double a = k * nu * (s.phi.y(j) + h), b = k * nu * h;
            cvx[static_cast<size_t>(k) * (M + 1) + j] = -ak * k * nu * sinh_ratio(a, b);
            cvy[static_cast<size_t>(k) * (M + 1) + j] = ak * k * nu * cosh_sinh_ratio(a, b);
        }
    }
    std::vector<double> grad2(static_cast<size_t>(M + 1) * n);
    double min_grad2 = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= M; ++j) {
        for (int i = 0; i < n; ++i) {
            double vx = 0.0, vy = 1.0;
            for (int k = 1; k <= N; ++k) {
                vx += cvx[static_cast<size_t>(k) * (M + 1) + j] * grid.sin_mode(k, i);
                vy += cvy[static_cast<size_t>(k) * (M + 1) + j] * grid.cos_mode(k, i);
            }
            const double g2 = vx * vx + vy * vy;
            grad2[static_cast<size_t>(j) * n + i] = g2;
            min_grad2 = std::min(min_grad2, g2);
        }
    }
    rep.map_nondegenerate = min_grad2 > 0.0;
    if (!rep.mapping_injective || !rep.map_nondegenerate || !rep.above_bed)
        return rep;  // residuals are meaningless without a valid chart

    // total stream function on the strip grid
    std::vector<double> psi(static_cast<size_t>(M + 1) * n);
    for (int j = 0; j <= M; ++j)
        for (int i = 0; i < n; ++i)
            psi[static_cast<size_t>(j) * n + i] =
                phiv[static_cast<size_t>(j) * n + i] + ev.laminar.psi[static_cast<size_t>(j)];

    // interior Poisson residual: (Delta_fd psi)/|grad V|^2 + gamma(psi),
    // fourth-order central differences, periodic in x
    auto at = [&](int j, int i) {
        const int ii = ((i % n) + n) % n;
        return psi[static_cast<size_t>(j) * n + ii];
    };
    const double cx = 1.0 / (12.0 * dx * dx), cy = 1.0 / (12.0 * dy * dy);
    for (int j = 2; j <= M - 2; ++j) {
        for (int i = 0; i < n; ++i) {
            const double uxx = cx * (-at(j, i - 2) + 16.0 * at(j, i - 1) - 30.0 * at(j, i)
                                     + 16.0 * at(j, i + 1) - at(j, i + 2));
            const double uyy = cy * (-at(j - 2, i) + 16.0 * at(j - 1, i) - 30.0 * at(j, i)
                                     + 16.0 * at(j + 1, i) - at(j + 2, i));
            const double res = (uxx + uyy) / grad2[static_cast<size_t>(j) * n + i]
                               + p.gamma.value(at(j, i));
            rep.res_poisson = std::max(rep.res_poisson, std::abs(res));
        }
    }

    // surface Bernoulli with Q = q + lambda^2/2; the surface speed is
    // |grad psi| / |grad V| with psi_x = 0 on y = 0, so a one-sided
    // finite-difference slope of psi at the top is all that is needed
    const double inv12dy = 1.0 / (12.0 * dy);
    for (int i = 0; i < n; ++i) {
        const double psi_y = inv12dy * (25.0 * at(M, i) - 48.0 * at(M - 1, i)
                                        + 36.0 * at(M - 2, i) - 16.0 * at(M - 3, i)
                                        + 3.0 * at(M - 4, i));
        const double k2 = grad2[static_cast<size_t>(M) * n + i];
        const double res = psi_y * psi_y / (2.0 * k2)
                           + p.phys.g * ev.w_grid[static_cast<size_t>(i)]
                           - (s.q + 0.5 * s.lambda * s.lambda);
        rep.res_bernoulli = std::max(rep.res_bernoulli, std::abs(res));
    }

    for (int i = 0; i < n; ++i) {
        rep.res_surface = std::max(rep.res_surface, std::abs(at(M, i)));
        rep.res_bottom = std::max(rep.res_bottom, std::abs(at(0, i) + ev.laminar.mass_flux));
    }
    return rep;
}

namespace {

/// Multiplier of dx^{-1} (C_h^L)^{-1} on even zero-mean series.
double dxinv_cinv_even(int k, double nu, double h) {
    return std::tanh(k * nu * h) / (k * nu);
}

/// A_w delta_w: Poisson solve with rhs -2 gamma(psi) dV_w/dy, diagonal in the
/// x-modes since the coefficient depends on y only.
StripField a_w_direction(const Problem& p, const LaminarFlow& lam, const PeriodicScalar& dw) {
    const int N = p.res.N, M = p.res.M;
    const double h = p.phys.h, nu = p.phys.nu();
    StripField rhs(p.phys.L, h, N, M, Parity::Even);
    for (int j = 0; j <= M; ++j) {
        const double c = -2.0 * p.gamma.value(lam.psi[static_cast<size_t>(j)]);
        const double yj = rhs.y(j);
        for (int k = 1; k <= N; ++k) {
            const double dvy = k * nu * cosh_sinh_ratio(k * nu * (yj + h), k * nu * h);
            rhs.cos_prof(k, j) = c * dvy * dw.cos_coeff(k);
        }
    }
    return poisson_strip(rhs);
}

/// A_phi delta_phi: Poisson solve with rhs -gamma'(psi) delta_phi.
StripField a_phi_direction(const Problem& p, const LaminarFlow& lam, const StripField& dphi) {
    const int N = p.res.N, M = p.res.M;
    StripField rhs(p.phys.L, p.phys.h, N, M, Parity::Even);
    for (int j = 0; j <= lam.M; ++j) {
        const double c = -p.gamma.derivative(lam.psi[static_cast<size_t>(j)]);
        for (int k = 0; k <= N; ++k) rhs.cos_prof(k, j) = c * dphi.cos_prof(k, j);
    }
    return poisson_strip(rhs);
}

} // namespace

TrivialLinearization::TrivialLinearization(const Problem& p, double lambda)
    : prob_(p), lambda_(lambda),
      laminar_(solve_laminar(p.gamma, lambda, p.phys.h, p.res.M)) {
    if (lambda == 0.0) throw Error("TrivialLinearization: lambda must be nonzero");
}

std::vector<double> TrivialLinearization::apply(const std::vector<double>& packed) const {
    const Problem& p = prob_;
    const int N = p.res.N;
    const double nu = p.phys.nu(), h = p.phys.h, g = p.phys.g, il = 1.0 / lambda_;

    State dir = unpack_state(p, lambda_, 1, packed);

    StripField aw = a_w_direction(p, laminar_, dir.w);
    StripField aphi = a_phi_direction(p, laminar_, dir.phi);

    PeriodicScalar s_aw = surface_normal_derivative(aw);
    PeriodicScalar s_aphi = surface_normal_derivative(aphi);

    // scalar component
    const double out1 = il * il * dir.q - il * (s_aw.mean() + s_aphi.mean());

    // surface component
    PeriodicScalar out2 = dir.w;
    for (int k = 1; k <= N; ++k) {
        const double d = dxinv_cinv_even(k, nu, h);
        const double val = dir.w.cos_coeff(k)
            - il * d * (s_aw.cos_coeff(k) + s_aphi.cos_coeff(k) + g * il * dir.w.cos_coeff(k));
        out2.set_cos(k, val);
    }

    // field component
    StripField out3 = dir.phi;
    out3 -= aw;
    out3 -= aphi;

    ResidualVector rv{out1, std::move(out2), std::move(out3)};
    return rv.pack();
}

Matrix TrivialLinearization::dense() const {
    const int n = packed_dim(prob_.res);
    Matrix m(n, n);
    std::vector<double> e(static_cast<size_t>(n), 0.0);
    for (int c = 0; c < n; ++c) {
        e[static_cast<size_t>(c)] = 1.0;
        const std::vector<double> col = apply(e);
        for (int r = 0; r < n; ++r) m(r, c) = col[static_cast<size_t>(r)];
        e[static_cast<size_t>(c)] = 0.0;
    }
    return m;
}

std::pair<PeriodicScalar, StripField> t_isomorphism(double lambda,
                                                    const LaminarFlow& laminar,
                                                    const StripField& theta) {
    if (lambda == 0.0) throw Error("t_isomorphism: lambda must be nonzero");
    PeriodicScalar trace = theta.trace_top();
    PeriodicScalar dw = (-1.0 / lambda) * trace;
    dw.set_cos(0, 0.0);  // trace is zero-mean for valid inputs

    StripField vext = dirichlet_extension(trace, theta.depth(), theta.y_cells());
    StripField dphi = theta;
    for (int j = 0; j <= theta.y_cells(); ++j) {
        const double c = laminar.psi_y[static_cast<size_t>(j)] / lambda;
        for (int k = 0; k <= theta.order(); ++k)
            dphi.cos_prof(k, j) -= c * vext.cos_prof(k, j);
    }
    return {std::move(dw), std::move(dphi)};
}

StripField t_isomorphism_inverse(double lambda, const LaminarFlow& laminar,
                                 const PeriodicScalar& dw, const StripField& dphi) {
    if (lambda == 0.0) throw Error("t_isomorphism_inverse: lambda must be nonzero");
    StripField vext = dirichlet_extension(dw, dphi.depth(), dphi.y_cells());
    StripField theta = dphi;
    for (int j = 0; j <= dphi.y_cells(); ++j) {
        const double c = laminar.psi_y[static_cast<size_t>(j)];
        for (int k = 0; k <= dphi.order(); ++k)
            theta.cos_prof(k, j) -= c * vext.cos_prof(k, j);
    }
    return theta;
}

State resample_state(const Problem& to, const State& s) {
    State out = State::trivial(to, s.lambda);
    out.q = s.q;
    out.sign = s.sign;
    const int nk = std::min(to.res.N, s.w.order());
    for (int k = 1; k <= nk; ++k) out.w.set_cos(k, s.w.cos_coeff(k));

    const int Mold = s.phi.y_cells(), Mnew = to.res.M;
    for (int k = 0; k <= nk; ++k) {
        for (int j = 1; j < Mnew; ++j) {
            const double y = out.phi.y(j);
            // cubic Lagrange on the four nearest source nodes
            double t = (y + s.phi.depth()) / s.phi.dy();
            int j0 = static_cast<int>(std::floor(t)) - 1;
            j0 = std::clamp(j0, 0, Mold - 3);
            const double u = t - j0;
            double val = 0.0;
            for (int m = 0; m < 4; ++m) {
                double lag = 1.0;
                for (int r = 0; r < 4; ++r)
                    if (r != m) lag *= (u - r) / (m - r);
                val += lag * s.phi.cos_prof(k, j0 + m);
            }
            out.phi.cos_prof(k, j) = val;
        }
    }
    return out;
}

std::pair<PeriodicScalar, StripField> linearized_L(const Problem& p, double lambda,
                                                   const LaminarFlow& laminar,
                                                   const StripField& theta) {
    const int N = p.res.N;
    const double nu = p.phys.nu(), h = p.phys.h, g = p.phys.g, il = 1.0 / lambda;

    PeriodicScalar trace = theta.trace_top();
    StripField aphi = a_phi_direction(p, laminar, theta);
    StripField vext = dirichlet_extension(trace, h, p.res.M);

    // L2 = theta - (A_phi theta + V[S theta])
    StripField l2 = theta;
    l2 -= aphi;
    l2 -= vext;

    // L1 = -S theta / lambda - dx^{-1} C^{-1} (P S dA/dy + (gamma(0) - g/lambda) S theta / lambda) / lambda
    PeriodicScalar s_aphi = surface_normal_derivative(aphi);
    PeriodicScalar l1(p.phys.L, N, Parity::Even);
    const double coeff = il * (p.gamma.value(0.0) - g * il);
    for (int k = 1; k <= N; ++k) {
        const double d = dxinv_cinv_even(k, nu, h);
        const double val = -il * trace.cos_coeff(k)
            - il * d * (s_aphi.cos_coeff(k) + coeff * trace.cos_coeff(k));
        l1.set_cos(k, val);
    }
    return {std::move(l1), std::move(l2)};
}

} // namespace wavestrip
