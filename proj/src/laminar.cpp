#include "wavestrip/laminar.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace wavestrip {

namespace {

/// Step count giving ~1e-10 relative RK4 accuracy for oscillation/growth
/// rate omega over a depth h.
int rk4_steps(double omega, double h) {
    const double n = std::pow(std::max(omega * h, 1.0), 1.25) / 0.0105;
    return std::clamp(static_cast<int>(std::ceil(n)), 512, 65536);
}

double gamma_prime_scale(const VorticityModel& gamma, const LaminarFlow& lam) {
    double s = 0.0;
    if (gamma.gamma_prime_inf() && gamma.gamma_prime_sup()) {
        s = std::max(std::abs(*gamma.gamma_prime_inf()), std::abs(*gamma.gamma_prime_sup()));
    } else {
        for (double p : lam.psi) s = std::max(s, std::abs(gamma.derivative(p)));
    }
    return s;
}

} // namespace

LaminarFlow solve_laminar(const VorticityModel& gamma, double lambda, double h, int y_cells) {
    if (!(h > 0.0)) throw Error("solve_laminar: depth must be positive");
    if (y_cells < 16) throw Error("solve_laminar: grid resolution must be >= 16");
    if (!std::isfinite(lambda)) throw Error("solve_laminar: lambda must be finite");

    LaminarFlow lam;
    lam.lambda = lambda;
    lam.h = h;
    lam.M = y_cells;
    lam.psi.assign(static_cast<size_t>(y_cells) + 1, 0.0);
    lam.psi_y.assign(static_cast<size_t>(y_cells) + 1, 0.0);
    lam.dpsi.assign(static_cast<size_t>(y_cells) + 1, 0.0);
    lam.dpsi_y.assign(static_cast<size_t>(y_cells) + 1, 0.0);

    double gp = 1.0;
    if (gamma.gamma_prime_sup())
        gp = std::max(std::abs(*gamma.gamma_prime_sup()), std::abs(*gamma.gamma_prime_inf()));
    const int substeps = std::max(1, (rk4_steps(std::sqrt(gp), h) + y_cells - 1) / y_cells);
    const double dy = -h / (static_cast<double>(y_cells) * substeps);

    // state: (psi, psi_y, dpsi, dpsi_y), integrated from y = 0 down to -h
    std::array<double, 4> u = {0.0, lambda, 0.0, 1.0};
    auto rhs = [&gamma](const std::array<double, 4>& s) {
        return std::array<double, 4>{s[1], -gamma.value(s[0]), s[3],
                                     -gamma.derivative(s[0]) * s[2]};
    };

    lam.psi[static_cast<size_t>(y_cells)] = u[0];
    lam.psi_y[static_cast<size_t>(y_cells)] = u[1];
    lam.dpsi[static_cast<size_t>(y_cells)] = u[2];
    lam.dpsi_y[static_cast<size_t>(y_cells)] = u[3];

    double ycur = 0.0;
    for (int j = y_cells; j > 0; --j) {
        for (int s = 0; s < substeps; ++s) {
            const auto k1 = rhs(u);
            std::array<double, 4> t;
            for (int i = 0; i < 4; ++i) t[i] = u[i] + 0.5 * dy * k1[i];
            const auto k2 = rhs(t);
            for (int i = 0; i < 4; ++i) t[i] = u[i] + 0.5 * dy * k2[i];
            const auto k3 = rhs(t);
            for (int i = 0; i < 4; ++i) t[i] = u[i] + dy * k3[i];
            const auto k4 = rhs(t);
            for (int i = 0; i < 4; ++i)
                u[i] += dy / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            ycur += dy;
        }
        for (double v : u)
            if (!std::isfinite(v))
                throw NumericsError("solve_laminar: integrator blew up near y = "
                                    + std::to_string(ycur));
        lam.psi[static_cast<size_t>(j - 1)] = u[0];
        lam.psi_y[static_cast<size_t>(j - 1)] = u[1];
        lam.dpsi[static_cast<size_t>(j - 1)] = u[2];
        lam.dpsi_y[static_cast<size_t>(j - 1)] = u[3];
    }
    lam.mass_flux = -lam.psi.front();
    return lam;
}

DispersionResult solve_beta(const VorticityModel& gamma, double lambda, double mu,
                            double h, const LaminarFlow& laminar) {
    if (laminar.h != h || laminar.lambda != lambda)
        throw Error("solve_beta: laminar flow does not match (lambda, h)");
    const int M = laminar.M;

    DispersionResult res;
    res.mu = mu;
    res.lambda = lambda;

    const double omega = std::sqrt(std::abs(mu) + gamma_prime_scale(gamma, laminar) + 1.0);
    const int substeps = std::max(1, (rk4_steps(omega, h) + M - 1) / M);
    const double dy = h / (static_cast<double>(M) * substeps);

    // Joint upward integration from the bed:
    //   (psi, psi_y, a = dpsi/dlambda, a_y, u, u', v, v')
    // where u is the unit-slope shot and v the particular solution of the
    // lambda-derivative equation with rhs built from the unscaled shot.
    std::array<double, 8> s = {laminar.psi.front(), laminar.psi_y.front(),
                               laminar.dpsi.front(), laminar.dpsi_y.front(),
                               0.0, 1.0, 0.0, 0.0};
    auto rhs = [&gamma, mu](const std::array<double, 8>& q) {
        const double gp = gamma.derivative(q[0]);
        const double gpp = gamma.second_derivative(q[0]);
        return std::array<double, 8>{
            q[1], -gamma.value(q[0]),
            q[3], -gp * q[2],
            q[5], -(gp + mu) * q[4],
            q[7], -(gp + mu) * q[6] - gpp * q[2] * q[4]};
    };

    std::vector<double> shot(static_cast<size_t>(M) + 1, 0.0);
    shot[0] = s[4];
    double sup = 0.0;
    for (int j = 0; j < M; ++j) {
        for (int step = 0; step < substeps; ++step) {
            const auto k1 = rhs(s);
            std::array<double, 8> t;
            for (int i = 0; i < 8; ++i) t[i] = s[i] + 0.5 * dy * k1[i];
            const auto k2 = rhs(t);
            for (int i = 0; i < 8; ++i) t[i] = s[i] + 0.5 * dy * k2[i];
            const auto k3 = rhs(t);
            for (int i = 0; i < 8; ++i) t[i] = s[i] + dy * k3[i];
            const auto k4 = rhs(t);
            for (int i = 0; i < 8; ++i)
                s[i] += dy / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        for (double v : s)
            if (!std::isfinite(v))
                throw NumericsError("solve_beta: integrator blew up near y = "
                                    + std::to_string(laminar.y(j + 1)));
        shot[static_cast<size_t>(j + 1)] = s[4];
        sup = std::max(sup, std::abs(s[4]));
    }

    const double u0 = s[4];      // shot value at y = 0
    const double up0 = s[5];     // shot slope at y = 0
    const double v0 = s[6];      // particular solution at y = 0
    const double vp0 = s[7];

    if (std::abs(u0) < 1e-10 * sup) {
        res.in_dirichlet_spectrum = true;
        res.d = std::numeric_limits<double>::infinity();
        res.beta = std::move(shot);  // unscaled shot, for inspection
        return res;
    }

    res.beta.resize(shot.size());
    for (size_t j = 0; j < shot.size(); ++j) res.beta[j] = shot[j] / u0;
    res.beta_y0 = up0 / u0;
    // d/dlambda beta'(0) with both boundary values of the derivative zero:
    // correct the particular solution by the homogeneous shot and undo the
    // scaling of the rhs by u(0).
    res.dbeta_y0_dlambda = (vp0 - v0 * res.beta_y0) / u0;
    return res;
}

DispersionResult dispersion(const VorticityModel& gamma, double lambda, double mu,
                            double h, double g) {
    if (lambda == 0.0) throw Error("dispersion: lambda must be nonzero");
    LaminarFlow lam = solve_laminar(gamma, lambda, h, 256);
    DispersionResult res = solve_beta(gamma, lambda, mu, h, lam);
    if (res.in_dirichlet_spectrum) return res;
    res.d = res.beta_y0 + gamma.value(0.0) / lambda - g / (lambda * lambda);
    res.d_lambda = res.dbeta_y0_dlambda + 2.0 * g / (lambda * lambda * lambda)
                   - gamma.value(0.0) / (lambda * lambda);
    return res;
}

std::vector<BifurcationRoot> find_bifurcation(const VorticityModel& gamma, double g,
                                              double h, double L, int k,
                                              double lo, double hi, int scan_points) {
    if (!(lo < hi)) throw Error("find_bifurcation: empty bracket");
    if (lo <= 0.0 && hi >= 0.0)
        throw Error("find_bifurcation: bracket must exclude lambda = 0");
    if (k < 1) throw Error("find_bifurcation: wavenumber index must be >= 1");
    const double nu = 2.0 * M_PI / L;
    const double mu = -(k * nu) * (k * nu);

    auto dval = [&](double lam) { return dispersion(gamma, lam, mu, h, g); };

    std::vector<BifurcationRoot> roots;
    double prev_lambda = lo;
    DispersionResult prev = dval(lo);
    for (int i = 1; i <= scan_points; ++i) {
        const double lam = lo + (hi - lo) * i / scan_points;
        DispersionResult cur = dval(lam);
        const bool usable = !prev.in_dirichlet_spectrum && !cur.in_dirichlet_spectrum;
        if (usable && ((prev.d < 0.0 && cur.d > 0.0) || (prev.d > 0.0 && cur.d < 0.0))) {
            double a = prev_lambda, b = lam;
            double fa = prev.d;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (a + b);
                const DispersionResult dm = dval(mid);
                if (dm.in_dirichlet_spectrum) break;
                if ((fa < 0.0) == (dm.d < 0.0)) { a = mid; fa = dm.d; }
                else b = mid;
            }
            BifurcationRoot root;
            root.lambda0 = 0.5 * (a + b);
            root.k = k;
            const DispersionResult at_root = dval(root.lambda0);
            root.d_lambda = at_root.d_lambda;
            const KernelScan scan = kernel_multiplicity(gamma, root.lambda0, g, h, L);
            root.multiplicity = scan.multiplicity;
            root.kernel_modes = scan.modes;
            roots.push_back(std::move(root));
        }
        prev = std::move(cur);
        prev_lambda = lam;
    }
    return roots;
}

KernelScan kernel_multiplicity(const VorticityModel& gamma, double lambda, double g,
                               double h, double L, int k_max, double rel_tol) {
    if (lambda == 0.0) throw Error("kernel_multiplicity: lambda must be nonzero");
    KernelScan scan;
    const double nu = 2.0 * M_PI / L;
    LaminarFlow lam = solve_laminar(gamma, lambda, h, 256);

    const DispersionResult at_zero = solve_beta(gamma, lambda, 0.0, h, lam);
    scan.spectrum_assumption_ok = !at_zero.in_dirichlet_spectrum;

    for (int k = 1; k <= k_max; ++k) {
        const double mu = -(k * nu) * (k * nu);
        DispersionResult res = solve_beta(gamma, lambda, mu, h, lam);
        if (res.in_dirichlet_spectrum) continue;
        const double d = res.beta_y0 + gamma.value(0.0) / lambda - g / (lambda * lambda);
        const double scale = std::abs(k * nu * coth(k * nu * h))
                           + std::abs(gamma.value(0.0) / lambda)
                           + g / (lambda * lambda);
        if (std::abs(d) < rel_tol * scale) {
            ++scan.multiplicity;
            scan.modes.push_back(k);
        }
    }
    return scan;
}

double prufer_bound_v(double z, double h) {
    if (z < 0.0) {
        const double r = std::sqrt(-z);
        return r * coth(h * r);
    }
    if (z == 0.0) return 1.0 / h;
    const double r = std::sqrt(z);
    return r / std::tan(h * r);
}

PruferBoundsReport prufer_bounds_check(const VorticityModel& gamma, double lambda,
                                       double mu_lo, double mu_hi, int samples,
                                       double h) {
    PruferBoundsReport rep;
    LaminarFlow lam = solve_laminar(gamma, lambda, h, 256);

    double gp_inf, gp_sup;
    if (gamma.gamma_prime_inf() && gamma.gamma_prime_sup()) {
        gp_inf = *gamma.gamma_prime_inf();
        gp_sup = *gamma.gamma_prime_sup();
    } else {
        gp_inf = std::numeric_limits<double>::infinity();
        gp_sup = -gp_inf;
        for (double p : lam.psi) {
            const double d = gamma.derivative(p);
            gp_inf = std::min(gp_inf, d);
            gp_sup = std::max(gp_sup, d);
        }
    }

    for (int i = 0; i <= samples; ++i) {
        const double mu = mu_lo + (mu_hi - mu_lo) * i / std::max(samples, 1);
        PruferBoundsRow row;
        row.mu = mu;
        DispersionResult res = solve_beta(gamma, lambda, mu, h, lam);
        if (res.in_dirichlet_spectrum) {
            row.in_spectrum = true;
            rep.rows.push_back(row);
            continue;
        }
        row.beta_y0 = res.beta_y0;
        row.lower = prufer_bound_v(mu + gp_sup, h);
        row.upper = prufer_bound_v(mu + gp_inf, h);
        // the bounds hold on the branch intervals; a row whose shifted
        // arguments fall across a pole is reported but not judged
        const double tol = 1e-8 * (1.0 + std::abs(row.beta_y0));
        const bool judgeable = mu + gp_sup <= M_PI * M_PI / (h * h)
                            && mu + gp_inf <= M_PI * M_PI / (h * h);
        if (judgeable) {
            row.ok = row.beta_y0 >= row.lower - tol && row.beta_y0 <= row.upper + tol;
            if (!row.ok) {
                ++rep.violations;
                rep.all_ok = false;
            }
        }
        rep.rows.push_back(row);
    }
    return rep;
}

} // namespace wavestrip
