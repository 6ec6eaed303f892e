#include "wavestrip/elliptic.hpp"

#include <cmath>

#include "wavestrip/linalg.hpp"
#include "wavestrip/spectral.hpp"

namespace wavestrip {

namespace {

/// Numerov solve of u'' - kappa2 u = r with u = 0 at both ends of [-h, 0].
/// The scheme couples (u_{j-1}, u_j, u_{j+1}) to (r_{j-1} + 10 r_j + r_{j+1})/12
/// and is fourth-order accurate.
void numerov_mode_solve(int M, double dy, double kappa2, const double* r, double* u) {
    const int n = M - 1;  // interior unknowns
    std::vector<double> diag(static_cast<size_t>(n)), lower(static_cast<size_t>(n)),
        upper(static_cast<size_t>(n)), b(static_cast<size_t>(n));
    const double inv_dy2 = 1.0 / (dy * dy);
    const double off = inv_dy2 - kappa2 / 12.0;
    const double mid = -2.0 * inv_dy2 - 10.0 * kappa2 / 12.0;
    for (int j = 0; j < n; ++j) {
        diag[static_cast<size_t>(j)] = mid;
        lower[static_cast<size_t>(j)] = off;
        upper[static_cast<size_t>(j)] = off;
        b[static_cast<size_t>(j)] = (r[j] + 10.0 * r[j + 1] + r[j + 2]) / 12.0;
    }
    tridiag_solve(diag, lower, upper, b);
    u[0] = 0.0;
    for (int j = 0; j < n; ++j) u[j + 1] = b[static_cast<size_t>(j)];
    u[M] = 0.0;
}

template <bool Parallel>
StripField poisson_impl(const StripField& rhs) {
    const int N = rhs.order(), M = rhs.y_cells();
    const double nu = rhs.nu(), dy = rhs.dy();
    StripField u(rhs.period(), rhs.depth(), N, M, rhs.parity());

    // 2(N+1) independent banded solves (cos and sin profile per mode)
    const int jobs = 2 * (N + 1);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (Parallel)
#endif
    for (int job = 0; job < jobs; ++job) {
        const int k = job / 2;
        const bool sine = (job % 2) == 1;
        if (sine && (k == 0 || rhs.parity() == Parity::Even)) continue;
        if (!sine && rhs.parity() == Parity::Odd) continue;
        const double kappa2 = (k * nu) * (k * nu);
        std::vector<double> r(static_cast<size_t>(M) + 1), sol(static_cast<size_t>(M) + 1);
        for (int j = 0; j <= M; ++j)
            r[static_cast<size_t>(j)] = sine ? rhs.sin_prof(k, j) : rhs.cos_prof(k, j);
        numerov_mode_solve(M, dy, kappa2, r.data(), sol.data());
        for (int j = 0; j <= M; ++j) {
            if (sine)
                u.sin_prof(k, j) = sol[static_cast<size_t>(j)];
            else
                u.cos_prof(k, j) = sol[static_cast<size_t>(j)];
        }
    }
    return u;
}

} // namespace

StripField poisson_strip(const StripField& rhs) { return poisson_impl<true>(rhs); }
StripField poisson_strip_serial(const StripField& rhs) { return poisson_impl<false>(rhs); }

StripField compute_A(const VorticityModel& gamma, const LaminarFlow& laminar,
                     const PeriodicScalar& w, const StripField& phi) {
    const int N = w.order(), M = phi.y_cells();
    const double h = phi.depth(), L = w.period(), nu = w.nu();
    if (laminar.M != M || laminar.h != h)
        throw Error("compute_A: laminar profile grid mismatch");

    // gamma identically zero: A vanishes for every (w, phi)
    if (gamma.kind() == VorticityModel::Kind::Constant && gamma.param1() == 0.0)
        return StripField(L, h, N, M, Parity::Even);

    const int n = dealiased_points(N);
    CollocationGrid grid(L, N, n);

    // analytic mode profiles of V, giving grad V on the grid
    std::vector<double> sh(static_cast<size_t>(N + 1) * (M + 1));
    std::vector<double> ch(static_cast<size_t>(N + 1) * (M + 1));
    for (int k = 1; k <= N; ++k)
        for (int j = 0; j <= M; ++j) {
            const double a = k * nu * (phi.y(j) + h), b = k * nu * h;
            sh[static_cast<size_t>(k) * (M + 1) + j] = sinh_ratio(a, b);
            ch[static_cast<size_t>(k) * (M + 1) + j] = cosh_sinh_ratio(a, b);
        }

    if (phi.order() != N || phi.period() != L)
        throw Error("compute_A: w and phi discretizations disagree");

    const std::vector<double> phiv = phi.values_on(grid);

    StripField rhs(L, h, N, M, Parity::Even);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int j = 0; j <= M; ++j) {
        std::vector<double> row(static_cast<size_t>(n), 0.0);
        const double gpsi = gamma.value(laminar.psi[static_cast<size_t>(j)]);
        const double psij = laminar.psi[static_cast<size_t>(j)];
        for (int i = 0; i < n; ++i) {
            double vx = 0.0, vy = 1.0;
            for (int k = 1; k <= N; ++k) {
                const double ak = w.cos_coeff(k);
                if (ak == 0.0) continue;
                vx -= ak * k * nu * sh[static_cast<size_t>(k) * (M + 1) + j] * grid.sin_mode(k, i);
                vy += ak * k * nu * ch[static_cast<size_t>(k) * (M + 1) + j] * grid.cos_mode(k, i);
            }
            const double grad2 = vx * vx + vy * vy;
            const double val = phiv[static_cast<size_t>(j) * n + i] + psij;
            row[static_cast<size_t>(i)] = -gamma.value(val) * grad2 + gpsi;
        }
        // re-project the dealiased pointwise row onto modes 0..N
        double mean = 0.0;
        for (int i = 0; i < n; ++i) mean += row[static_cast<size_t>(i)];
        rhs.cos_prof(0, j) = mean / n;
        for (int k = 1; k <= N; ++k) {
            double ca = 0.0;
            for (int i = 0; i < n; ++i) ca += row[static_cast<size_t>(i)] * grid.cos_mode(k, i);
            rhs.cos_prof(k, j) = 2.0 * ca / n;
        }
    }

    for (int j = 0; j <= M; ++j)
        for (int k = 0; k <= N; ++k)
            if (!std::isfinite(rhs.cos_prof(k, j)))
                throw NumericsError("compute_A: non-finite vorticity evaluation");

    return poisson_strip(rhs);
}

PeriodicScalar surface_normal_derivative(const StripField& a) {
    PeriodicScalar out(a.period(), a.order(), a.parity());
    if (a.parity() != Parity::Odd) out.set_cos(0, a.mode_dy_top(0, false));
    for (int k = 1; k <= a.order(); ++k) {
        if (a.parity() != Parity::Odd) out.set_cos(k, a.mode_dy_top(k, false));
        if (a.parity() != Parity::Even) out.set_sin(k, a.mode_dy_top(k, true));
    }
    return out;
}

} // namespace wavestrip
