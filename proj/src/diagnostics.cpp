#include "wavestrip/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wavestrip {

bool WaveReport::nodal_pass() const {
    if (nodal.flat) return true;
    return nodal.bed_clear && nodal.monotone && nodal.curvature_ok
        && nodal.mapped_half_period_ok && nodal.endpoint_ux_positive;
}

std::string WaveReport::nodal_failure() const {
    if (nodal.flat) return "";
    if (!nodal.bed_clear) return "surface touches the bed";
    if (!nodal.monotone) return "crest-to-trough monotonicity";
    if (!nodal.curvature_ok) return "curvature sign at crest/trough";
    if (!nodal.mapped_half_period_ok) return "mapped half period leaves (0, L/2)";
    if (!nodal.endpoint_ux_positive) return "1 + C w' at the endpoints";
    return "";
}

WaveReport nodal_check(const Problem& p, const State& s, double margin) {
    WaveReport rep;
    const double L = p.phys.L, h = p.phys.h;
    const int m = 8 * std::max(p.res.N, 16);  // samples on the half period
    rep.x_resolution = m;
    rep.y_resolution = p.res.M;
    rep.nodal.grid_points = m;

    PeriodicScalar wp = s.w.derivative();
    PeriodicScalar wpp = wp.derivative();
    PeriodicScalar cw = hilbert_strip(project_zero_mean(s.w), h);
    PeriodicScalar cwp = hilbert_strip(wp, h);

    const double w0 = s.w.eval(0.0), wh = s.w.eval(L / 2.0);
    const double scale = std::max(1.0, s.w.max_abs_coeff());
    rep.nodal.flat = s.w.max_abs_coeff() < 1e-12 * std::max(1.0, h);
    rep.nodal.crest_at_zero = w0 >= wh;

    // geometry over the full period
    {
        const int n = 2 * m;
        double wmax = -std::numeric_limits<double>::infinity(), wmin = -wmax;
        double xmax = 0.0, xmin = 0.0, angle = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = i * (L / n);
            const double wv = s.w.eval(x);
            if (wv > wmax) { wmax = wv; xmax = x; }
            if (wv < wmin) { wmin = wv; xmin = x; }
            const double ux = 1.0 + cwp.eval(x);
            angle = std::max(angle, std::abs(std::atan2(wp.eval(x), ux)));
        }
        rep.geometry.amplitude = wmax - wmin;
        rep.geometry.crest_x = xmax + cw.eval(xmax);
        rep.geometry.crest_y = wmax + h;
        rep.geometry.trough_x = xmin + cw.eval(xmin);
        rep.geometry.trough_y = wmin + h;
        rep.geometry.steepness = (wmax - wmin) / L;
        rep.geometry.max_surface_angle = angle;
    }

    // bed clearance on the full period
    double bed = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 2 * m; ++i)
        bed = std::min(bed, s.w.eval(i * (L / (2 * m))) + h);
    rep.nodal.bed_margin = bed;
    rep.nodal.bed_clear = bed > -margin;

    // oriented monotonicity on the open half period: crest at zero means
    // w' < 0 there; the margin tolerates grid values at the endpoints
    const double orient = rep.nodal.crest_at_zero ? 1.0 : -1.0;
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 1; i < m; ++i) {
        const double x = (L / 2.0) * i / m;
        worst = std::max(worst, orient * wp.eval(x));
    }
    rep.nodal.monotone_margin = worst;
    rep.nodal.monotone = !rep.nodal.flat && worst < margin * scale;
    if (rep.nodal.flat) rep.nodal.monotone = false;  // reported as flat

    const double c0 = wpp.eval(0.0), cL2 = wpp.eval(L / 2.0);
    rep.nodal.crest_curvature_sign = c0 > 0.0 ? 1 : (c0 < 0.0 ? -1 : 0);
    rep.nodal.trough_curvature_sign = cL2 > 0.0 ? 1 : (cL2 < 0.0 ? -1 : 0);
    rep.nodal.curvature_ok = rep.nodal.flat
        || (orient * c0 < margin * scale && orient * cL2 > -margin * scale);

    // 0 < x + C w < L/2 on the open half period
    double mapped = std::numeric_limits<double>::infinity();
    for (int i = 1; i < m; ++i) {
        const double x = (L / 2.0) * i / m;
        const double ux = x + cw.eval(x);
        mapped = std::min(mapped, std::min(ux, L / 2.0 - ux));
    }
    rep.nodal.mapped_margin = mapped;
    rep.nodal.mapped_half_period_ok = mapped > -margin * std::max(1.0, L);

    const double e0 = 1.0 + cwp.eval(0.0), eh = 1.0 + cwp.eval(L / 2.0);
    rep.nodal.endpoint_margin = std::min(e0, eh);
    rep.nodal.endpoint_ux_positive = rep.nodal.endpoint_margin > -margin;

    SurfaceCurve curve = surface_curve(s.w, h, 8 * std::max(p.res.N, 16));
    rep.self_intersect = curve_self_intersects(curve, L);
    return rep;
}

namespace {

/// grad V at the profile rows, mode tables precomputed once.
class GradV {
public:
    GradV(const PeriodicScalar& w, double h, int y_cells)
        : nu_(w.nu()), N_(w.order()), M_(y_cells),
          cvx_(static_cast<size_t>(N_ + 1) * (y_cells + 1), 0.0),
          cvy_(static_cast<size_t>(N_ + 1) * (y_cells + 1), 0.0) {
        for (int k = 1; k <= N_; ++k) {
            const double ak = w.cos_coeff(k);
            if (ak == 0.0) continue;
            for (int j = 0; j <= y_cells; ++j) {
                const double y = (j == y_cells) ? 0.0 : -h + j * (h / y_cells);
                const double a = k * nu_ * (y + h), b = k * nu_ * h;
                cvx_[idx(k, j)] = -ak * k * nu_ * sinh_ratio(a, b);
                cvy_[idx(k, j)] = ak * k * nu_ * cosh_sinh_ratio(a, b);
            }
        }
    }

    void at(double x, int j, double* vx, double* vy) const {
        double sx = 0.0, sy = 1.0;
        for (int k = 1; k <= N_; ++k) {
            const double th = k * nu_ * x;
            sx += cvx_[idx(k, j)] * std::sin(th);
            sy += cvy_[idx(k, j)] * std::cos(th);
        }
        *vx = sx;
        *vy = sy;
    }

private:
    size_t idx(int k, int j) const {
        return static_cast<size_t>(k) * static_cast<size_t>(M_ + 1) + static_cast<size_t>(j);
    }
    double nu_;
    int N_, M_;
    std::vector<double> cvx_, cvy_;
};

} // namespace

FFieldResult f_field(const Problem& p, const State& s, double margin, double min_k_floor) {
    const double L = p.phys.L, h = p.phys.h;
    const int N = p.res.N, M = p.res.M;

    MetricResult km = metric_K(s.w, h);
    if (km.min_on_grid <= min_k_floor)
        throw Error("f_field: conformal factor too close to degenerate");

    LaminarFlow lam = solve_laminar(p.gamma, s.lambda, h, M);
    StripField phi_x = s.phi.x_derivative();
    StripField phi_y = s.phi.y_derivative();
    GradV gv(s.w, h, M);

    FFieldResult out;
    out.f = StripField(L, h, N, M, Parity::Odd);

    const int n = dealiased_points(N);
    CollocationGrid grid(L, N, n);
    const std::vector<double> pxv = phi_x.values_on(grid);
    const std::vector<double> pyv = phi_y.values_on(grid);

    std::vector<double> row(static_cast<size_t>(n));
    for (int j = 0; j <= M; ++j) {
        const double psy = lam.psi_y[static_cast<size_t>(j)];
        for (int i = 0; i < n; ++i) {
            double vx, vy;
            gv.at(grid.x(i), j, &vx, &vy);
            const double denom = vx * vx + vy * vy;
            row[static_cast<size_t>(i)] =
                (vx * (pyv[static_cast<size_t>(j) * n + i] + psy)
                 - vy * pxv[static_cast<size_t>(j) * n + i]) / denom;
        }
        PeriodicScalar pr = grid.project(row, Parity::Odd);
        for (int k = 1; k <= N; ++k) out.f.sin_prof(k, j) = pr.sin_coeff(k);
    }

    // positivity on the open half period, bed excluded, surface included
    const int mh = 4 * std::max(N, 16);
    double fmin = std::numeric_limits<double>::infinity();
    double scale = 0.0;
    for (int j = 1; j <= M; ++j) {
        const double psy = lam.psi_y[static_cast<size_t>(j)];
        for (int i = 1; i < mh; ++i) {
            const double x = (L / 2.0) * i / mh;
            double vx, vy;
            gv.at(x, j, &vx, &vy);
            double px = phi_x.eval(x, j), py = phi_y.eval(x, j);
            const double val = (vx * (py + psy) - vy * px) / (vx * vx + vy * vy);
            fmin = std::min(fmin, val);
            scale = std::max(scale, std::abs(val));
        }
    }
    out.min_interior = fmin;
    out.degenerate_flat = scale < 1e-12;
    out.positive = !out.degenerate_flat && fmin > -margin * std::max(1.0, scale);

    double bmax = 0.0;
    for (int j = 0; j <= M; ++j) {
        bmax = std::max(bmax, std::abs(out.f.eval(0.0, j)));
        bmax = std::max(bmax, std::abs(out.f.eval(L / 2.0, j)));
    }
    for (int i = 0; i < n; ++i)
        bmax = std::max(bmax, std::abs(out.f.eval(grid.x(i), 0)));
    out.boundary_max = bmax;
    return out;
}

DownstreamResult downstream_check(const Problem& p, const State& s, double margin) {
    const double L = p.phys.L, h = p.phys.h;
    const int N = p.res.N, M = p.res.M;
    const double orient = s.lambda >= 0.0 ? 1.0 : -1.0;

    LaminarFlow lam = solve_laminar(p.gamma, s.lambda, h, M);
    StripField phi_x = s.phi.x_derivative();
    StripField phi_y = s.phi.y_derivative();
    GradV gv(s.w, h, M);

    const int n = dealiased_points(N);
    CollocationGrid grid(L, N, n);
    const std::vector<double> pxv = phi_x.values_on(grid);
    const std::vector<double> pyv = phi_y.values_on(grid);

    DownstreamResult out;
    double umin = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= M; ++j) {
        const double psy = lam.psi_y[static_cast<size_t>(j)];
        for (int i = 0; i < n; ++i) {
            double vx, vy;
            gv.at(grid.x(i), j, &vx, &vy);
            const double val = (vx * pxv[static_cast<size_t>(j) * n + i]
                                + vy * (pyv[static_cast<size_t>(j) * n + i] + psy))
                               / (vx * vx + vy * vy);
            umin = std::min(umin, orient * val);
        }
    }
    out.unidirectional_margin = umin;
    out.unidirectional = umin > -margin;

    auto [wp, vy_top] = surface_gradient(s.w, h);
    const std::vector<double> vt = grid.values(vy_top);
    double omin = std::numeric_limits<double>::infinity();
    for (double v : vt) omin = std::min(omin, v);
    out.overhang_margin = omin;
    out.overhang_free = omin > -margin;
    return out;
}

std::vector<StagnationSample> stagnation_scan(const Problem& p, const State& s,
                                              double threshold) {
    const int N = p.res.N, M = p.res.M;
    LaminarFlow lam = solve_laminar(p.gamma, s.lambda, p.phys.h, M);
    StripField phi_x = s.phi.x_derivative();
    StripField phi_y = s.phi.y_derivative();

    const int n = dealiased_points(N);
    CollocationGrid grid(p.phys.L, N, n);
    const std::vector<double> pxv = phi_x.values_on(grid);
    const std::vector<double> pyv = phi_y.values_on(grid);

    std::vector<StagnationSample> hits;
    for (int j = 0; j <= M; ++j) {
        const double psy = lam.psi_y[static_cast<size_t>(j)];
        for (int i = 0; i < n; ++i) {
            const double px = pxv[static_cast<size_t>(j) * n + i];
            const double py = pyv[static_cast<size_t>(j) * n + i] + psy;
            const double speed = std::hypot(px, py);
            if (speed < threshold)
                hits.push_back({grid.x(i), s.phi.y(j), speed});
        }
    }
    return hits;
}

bool nodal_hypotheses_hold(const Problem& p, double lambda0) {
    const auto sup = p.gamma.gamma_prime_sup();
    if (!sup || !(*sup < M_PI * M_PI / (4.0 * p.phys.h * p.phys.h))) return false;
    const auto lo = p.gamma.gamma_pp_inf();
    const auto hi = p.gamma.gamma_pp_sup();
    if (!lo || !hi) return false;
    // lambda0 * gamma'' must not change sign against lambda0
    if (lambda0 > 0.0) return *lo >= 0.0;
    return *hi <= 0.0;
}

WaveReport full_report(const Problem& p, const State& s, double margin) {
    WaveReport rep = nodal_check(p, s, margin);
    try {
        FFieldResult ff = f_field(p, s, margin);
        rep.f_positive = ff.positive;
        rep.f_min_interior = ff.min_interior;
        rep.f_degenerate_flat = ff.degenerate_flat;
    } catch (const Error&) {
        rep.f_positive = false;
    }
    DownstreamResult ds = downstream_check(p, s, margin);
    rep.unidirectional = ds.unidirectional;
    rep.unidirectional_margin = ds.unidirectional_margin;
    rep.overhang_free = ds.overhang_free;
    rep.overhang_margin = ds.overhang_margin;
    return rep;
}

} // namespace wavestrip
