#include "wavestrip/spectral.hpp"

#include <algorithm>
#include <limits>

namespace wavestrip {

namespace {

void require_zero_mean(const PeriodicScalar& u, const char* op) {
    // absolute tolerance scaled by the coefficient magnitude
    const double tol = 1e-13 * std::max(1.0, u.max_abs_coeff());
    if (std::abs(u.mean()) > tol)
        throw Error(std::string(op) + " requires zero mean input");
}

} // namespace

PeriodicScalar hilbert_strip(const PeriodicScalar& u, double h) {
    require_zero_mean(u, "hilbert_strip");
    PeriodicScalar out(u.period(), u.order(), flip_parity(u.parity()));
    const double nu = u.nu();
    for (int k = 1; k <= u.order(); ++k) {
        const double m = coth(k * nu * h);
        out.set_sin(k, m * u.cos_coeff(k));
        out.set_cos(k, -m * u.sin_coeff(k));
    }
    return out;
}

PeriodicScalar hilbert_strip_inverse(const PeriodicScalar& u, double h) {
    require_zero_mean(u, "hilbert_strip_inverse");
    PeriodicScalar out(u.period(), u.order(), flip_parity(u.parity()));
    const double nu = u.nu();
    for (int k = 1; k <= u.order(); ++k) {
        const double m = std::tanh(k * nu * h);
        out.set_sin(k, -m * u.cos_coeff(k));
        out.set_cos(k, m * u.sin_coeff(k));
    }
    return out;
}

double mean(const PeriodicScalar& u) { return u.mean(); }

PeriodicScalar project_zero_mean(const PeriodicScalar& u) {
    PeriodicScalar out = u;
    out.set_cos(0, 0.0);
    return out;
}

PeriodicScalar antiderivative(const PeriodicScalar& u) {
    require_zero_mean(u, "antiderivative");
    PeriodicScalar out(u.period(), u.order(), flip_parity(u.parity()));
    const double nu = u.nu();
    for (int k = 1; k <= u.order(); ++k) {
        out.set_sin(k, u.cos_coeff(k) / (k * nu));
        out.set_cos(k, -u.sin_coeff(k) / (k * nu));
    }
    return out;
}

PeriodicScalar differentiate(const PeriodicScalar& u) { return u.derivative(); }

StripField harmonic_extension(const PeriodicScalar& w, double h, int y_cells) {
    require_zero_mean(w, "harmonic_extension");
    StripField V = dirichlet_extension(w, h, y_cells);
    for (int j = 0; j <= y_cells; ++j)
        V.cos_prof(0, j) += V.y(j) + h;
    return V;
}

StripField dirichlet_extension(const PeriodicScalar& v, double h, int y_cells) {
    StripField V(v.period(), h, v.order(), y_cells, v.parity());
    const double nu = v.nu();
    const double v0 = v.mean();
    for (int j = 0; j <= y_cells; ++j) {
        const double yj = V.y(j);
        if (v0 != 0.0) V.cos_prof(0, j) = v0 * (yj + h) / h;
        for (int k = 1; k <= v.order(); ++k) {
            const double r = sinh_ratio(k * nu * (yj + h), k * nu * h);
            if (v.parity() != Parity::Odd) V.cos_prof(k, j) = v.cos_coeff(k) * r;
            if (v.parity() != Parity::Even) V.sin_prof(k, j) = v.sin_coeff(k) * r;
        }
    }
    return V;
}

std::pair<PeriodicScalar, PeriodicScalar> surface_gradient(const PeriodicScalar& w, double h) {
    PeriodicScalar wp = w.derivative();
    PeriodicScalar vy = hilbert_strip(wp, h);
    vy.set_cos(0, vy.cos_coeff(0) + 1.0);
    return {std::move(wp), std::move(vy)};
}

MetricResult metric_K(const PeriodicScalar& w, double h) {
    auto [wp, vy] = surface_gradient(w, h);
    CollocationGrid g(w.period(), w.order(), dealiased_points(w.order()));
    const std::vector<double> wpv = g.values(wp);
    const std::vector<double> vyv = g.values(vy);
    MetricResult res;
    res.grid_values.resize(wpv.size());
    double kmin = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < wpv.size(); ++i) {
        const double k = std::sqrt(vyv[i] * vyv[i] + wpv[i] * wpv[i]);
        res.grid_values[i] = k;
        kmin = std::min(kmin, k);
    }
    res.min_on_grid = kmin;
    res.values = g.project(res.grid_values, Parity::Even);
    return res;
}

SurfaceCurve surface_curve(const PeriodicScalar& w, double h, int n_samples) {
    if (n_samples < 8) throw Error("surface_curve: too few samples");
    PeriodicScalar cw = hilbert_strip(project_zero_mean(w), h);
    SurfaceCurve c;
    c.x.resize(static_cast<size_t>(n_samples));
    c.y.resize(static_cast<size_t>(n_samples));
    const double L = w.period();
    for (int i = 0; i < n_samples; ++i) {
        const double x = i * (L / n_samples);
        c.x[static_cast<size_t>(i)] = x + cw.eval(x);
        c.y[static_cast<size_t>(i)] = w.eval(x) + h;
    }
    return c;
}

namespace {

int orient(double ax, double ay, double bx, double by, double cx, double cy) {
    const double v = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
    if (v > 0.0) return 1;
    if (v < 0.0) return -1;
    return 0;
}

bool on_segment(double ax, double ay, double bx, double by, double px, double py) {
    return std::min(ax, bx) <= px && px <= std::max(ax, bx) &&
           std::min(ay, by) <= py && py <= std::max(ay, by);
}

bool segments_intersect(double p1x, double p1y, double p2x, double p2y,
                        double q1x, double q1y, double q2x, double q2y) {
    const int o1 = orient(p1x, p1y, p2x, p2y, q1x, q1y);
    const int o2 = orient(p1x, p1y, p2x, p2y, q2x, q2y);
    const int o3 = orient(q1x, q1y, q2x, q2y, p1x, p1y);
    const int o4 = orient(q1x, q1y, q2x, q2y, p2x, p2y);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(p1x, p1y, p2x, p2y, q1x, q1y)) return true;
    if (o2 == 0 && on_segment(p1x, p1y, p2x, p2y, q2x, q2y)) return true;
    if (o3 == 0 && on_segment(q1x, q1y, q2x, q2y, p1x, p1y)) return true;
    if (o4 == 0 && on_segment(q1x, q1y, q2x, q2y, p2x, p2y)) return true;
    return false;
}

} // namespace

bool curve_self_intersects(const SurfaceCurve& c, double period) {
    const int n = static_cast<int>(c.x.size());
    // two copies of the curve so seam crossings are tested too
    const int m = 2 * n;
    auto px = [&](int i) { return i < n ? c.x[static_cast<size_t>(i)] : c.x[static_cast<size_t>(i - n)] + period; };
    auto py = [&](int i) { return i < n ? c.y[static_cast<size_t>(i)] : c.y[static_cast<size_t>(i - n)]; };
    for (int i = 0; i < m - 1; ++i) {
        for (int j = i + 2; j < m - 1; ++j) {
            if (j - i >= n) break;  // farther pairs repeat an earlier test
            if (segments_intersect(px(i), py(i), px(i + 1), py(i + 1),
                                   px(j), py(j), px(j + 1), py(j + 1)))
                return true;
        }
    }
    return false;
}

} // namespace wavestrip
