#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "wavestrip/laminar.hpp"

using namespace wavestrip;

namespace {

constexpr double kG = 9.81;
constexpr double kL = 2.0 * M_PI;  // nu = 1

double coth_ref(double x) { return std::cosh(x) / std::sinh(x); }

/// closed-form root of the constant-vorticity dispersion relation
double lambda_pm(double gamma0, double l, double h, double g, int sign) {
    const double t = std::tanh(l * h);
    const double disc = std::sqrt(g * t / l + gamma0 * gamma0 * t * t / (4.0 * l * l));
    return -gamma0 * t / (2.0 * l) + sign * disc;
}

} // namespace

TEST_CASE("laminar closed forms") {
    const double h = 1.3, lambda = 1.7;
    const int M = 64;

    // gamma = 0: psi = lambda y, m = lambda h
    LaminarFlow f0 = solve_laminar(VorticityModel::constant(0.0), lambda, h, M);
    for (int j = 0; j <= M; ++j) {
        CHECK(f0.psi[j] == doctest::Approx(lambda * f0.y(j)).epsilon(1e-13));
        CHECK(f0.psi_y[j] == doctest::Approx(lambda).epsilon(1e-13));
    }
    CHECK(f0.mass_flux == doctest::Approx(lambda * h).epsilon(1e-13));

    // constant gamma0: psi = -gamma0 y^2/2 + lambda y, m = gamma0 h^2/2 + lambda h
    const double g0 = -0.8;
    LaminarFlow fc = solve_laminar(VorticityModel::constant(g0), lambda, h, M);
    for (int j = 0; j <= M; ++j) {
        const double y = fc.y(j);
        CHECK(fc.psi[j] == doctest::Approx(-0.5 * g0 * y * y + lambda * y).epsilon(1e-12));
    }
    CHECK(fc.mass_flux == doctest::Approx(0.5 * g0 * h * h + lambda * h).epsilon(1e-12));

    // affine gamma(s) = a s + b with a < 0
    const double a = -1.1, b = 0.4, r = std::sqrt(-a);
    LaminarFlow fa = solve_laminar(VorticityModel::affine(a, b), lambda, h, M);
    for (int j = 0; j <= M; ++j) {
        const double y = fa.y(j);
        const double expect = lambda / r * std::sinh(r * y) + b / a * (std::cosh(r * y) - 1.0);
        CHECK(fa.psi[j] == doctest::Approx(expect).epsilon(1e-10));
    }
    // lambda-derivative of the profile follows the closed form too
    for (int j = 0; j <= M; ++j)
        CHECK(fa.dpsi[j] == doctest::Approx(std::sinh(r * fa.y(j)) / r).epsilon(1e-10));
}

TEST_CASE("laminar preconditions and failure") {
    CHECK_THROWS_AS(solve_laminar(VorticityModel::constant(0.0), 1.0, 1.0, 8), Error);
    CHECK_THROWS_AS(solve_laminar(VorticityModel::constant(0.0),
                                  std::numeric_limits<double>::infinity(), 1.0, 64),
                    Error);
    // gamma(s) = -s^3 drives a finite-depth blow-up of the profile
    VorticityModel cubic = VorticityModel::custom({0.0, 1e5}, {{0.0, 0.0, 0.0, -1.0}});
    CHECK_THROWS_AS(solve_laminar(cubic, -5.0, 3.0, 64), NumericsError);
}

TEST_CASE("beta closed forms") {
    const double h = 1.0, lambda = 2.0;
    const int M = 128;

    // constant vorticity: beta = sinh(k nu (y+h)) / sinh(k nu h), uniformly
    VorticityModel gconst = VorticityModel::constant(0.7);
    LaminarFlow lam = solve_laminar(gconst, lambda, h, M);
    for (int k = 1; k <= 3; ++k) {
        DispersionResult r = solve_beta(gconst, lambda, -(double)(k * k), h, lam);
        REQUIRE_FALSE(r.in_dirichlet_spectrum);
        for (int j = 0; j <= M; ++j) {
            const double expect = std::sinh(k * (lam.y(j) + h)) / std::sinh(k * h);
            CHECK(std::abs(r.beta[j] - expect) < 1e-8);
        }
        CHECK(r.beta_y0 == doctest::Approx(k * coth_ref(k * h)).epsilon(1e-9));
    }

    // affine with a - (k nu)^2 = 0: beta = (y + h)/h
    const int k0 = 2;
    VorticityModel gaff = VorticityModel::affine(k0 * k0, 0.3);
    LaminarFlow lama = solve_laminar(gaff, lambda, h, M);
    DispersionResult ra = solve_beta(gaff, lambda, -(double)(k0 * k0), h, lama);
    REQUIRE_FALSE(ra.in_dirichlet_spectrum);
    for (int j = 0; j <= M; ++j)
        CHECK(std::abs(ra.beta[j] - (lama.y(j) + h) / h) < 1e-9);

    // gamma = 0, mu = 0: beta = (y+h)/h, beta'(0) = 1/h
    VorticityModel g0 = VorticityModel::constant(0.0);
    LaminarFlow lam0 = solve_laminar(g0, lambda, h, M);
    DispersionResult r0 = solve_beta(g0, lambda, 0.0, h, lam0);
    CHECK(r0.beta_y0 == doctest::Approx(1.0 / h).epsilon(1e-12));
    for (int j = 0; j <= M; ++j)
        CHECK(std::abs(r0.beta[j] - (lam0.y(j) + h) / h) < 1e-11);
}

TEST_CASE("dirichlet spectrum detection for affine vorticity") {
    // a - (k nu)^2 = (pi/h)^2 puts -(k nu)^2 in the spectrum
    const double h = 1.0, lambda = 1.4;
    const int k = 1;
    const double a = k * k + M_PI * M_PI / (h * h);
    VorticityModel g = VorticityModel::affine(a, 0.0);
    LaminarFlow lam = solve_laminar(g, lambda, h, 128);
    DispersionResult r = solve_beta(g, lambda, -(double)(k * k), h, lam);
    CHECK(r.in_dirichlet_spectrum);
    DispersionResult rd = dispersion(g, lambda, -(double)(k * k), h, kG);
    CHECK(rd.in_dirichlet_spectrum);
    CHECK(std::isinf(rd.d));
}

TEST_CASE("dispersion closed forms") {
    const double h = 1.0;
    CHECK_THROWS_AS(dispersion(VorticityModel::constant(0.0), 0.0, -1.0, h, kG), Error);

    // constant: d = k nu coth(k nu h) + gamma0/lambda - g/lambda^2
    for (const double g0 : {0.0, -1.2, 0.9}) {
        for (const double lambda : {0.8, -1.6, 2.4}) {
            for (int k = 1; k <= 4; ++k) {
                DispersionResult r = dispersion(VorticityModel::constant(g0), lambda,
                                                -(double)(k * k), h, kG);
                const double expect = k * coth_ref(k * h) + g0 / lambda
                                      - kG / (lambda * lambda);
                CHECK(r.d == doctest::Approx(expect).epsilon(1e-9));
            }
        }
    }

    // affine, all three sign cases of a - (k nu)^2
    const double b = 0.4, lambda = 1.9;
    const int k = 2;
    {
        const double a = k * k + 2.0;  // trig case
        DispersionResult r = dispersion(VorticityModel::affine(a, b), lambda,
                                        -(double)(k * k), h, kG);
        const double s = std::sqrt(a - k * k);
        CHECK(r.d == doctest::Approx(s / std::tan(s * h) + b / lambda - kG / (lambda * lambda))
                         .epsilon(1e-9));
    }
    {
        const double a = k * k;  // degenerate case: d = 1/h + b/lambda - g/lambda^2
        DispersionResult r = dispersion(VorticityModel::affine(a, b), lambda,
                                        -(double)(k * k), h, kG);
        CHECK(r.d == doctest::Approx(1.0 / h + b / lambda - kG / (lambda * lambda))
                         .epsilon(1e-10));
    }
    {
        const double a = k * k - 3.0;  // sinh case
        DispersionResult r = dispersion(VorticityModel::affine(a, b), lambda,
                                        -(double)(k * k), h, kG);
        const double s = std::sqrt(k * k - a);
        CHECK(r.d == doctest::Approx(s * coth_ref(s * h) + b / lambda - kG / (lambda * lambda))
                         .epsilon(1e-9));
    }
}

TEST_CASE("d_lambda matches central finite differences") {
    const double h = 1.0;
    const std::vector<VorticityModel> models{
        VorticityModel::constant(0.6),
        VorticityModel::affine(-1.0, 0.5),
        VorticityModel::sinusoidal(1.0, 1.0),  // gamma'' != 0 exercises the rhs term
    };
    for (const auto& g : models) {
        for (const double lambda : {1.3, -2.1}) {
            const double mu = -1.0;
            const double delta = 1e-5 * std::abs(lambda);
            DispersionResult r = dispersion(g, lambda, mu, h, kG);
            DispersionResult rp = dispersion(g, lambda + delta, mu, h, kG);
            DispersionResult rm = dispersion(g, lambda - delta, mu, h, kG);
            const double fd = (rp.d - rm.d) / (2.0 * delta);
            CHECK(r.d_lambda == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("find_bifurcation closed-form roots") {
    const double h = 1.0;
    VorticityModel g0 = VorticityModel::constant(0.0);

    // irrotational, k = 1: lambda = +-sqrt(g tanh 1)
    const double root = std::sqrt(kG * std::tanh(1.0));
    auto plus = find_bifurcation(g0, kG, h, kL, 1, 0.5, 5.0);
    REQUIRE(plus.size() == 1);
    CHECK(plus[0].lambda0 == doctest::Approx(root).epsilon(1e-10));
    CHECK(plus[0].multiplicity == 1);
    REQUIRE(plus[0].kernel_modes.size() == 1);
    CHECK(plus[0].kernel_modes[0] == 1);
    auto minus = find_bifurcation(g0, kG, h, kL, 1, -5.0, -0.5);
    REQUIRE(minus.size() == 1);
    CHECK(minus[0].lambda0 == doctest::Approx(-root).epsilon(1e-10));

    // constant vorticity k = 2 against lambda^{+-}(l)
    const double gamma0 = 1.1;
    VorticityModel gc = VorticityModel::constant(gamma0);
    auto r2 = find_bifurcation(gc, kG, h, kL, 2, 0.3, 4.0);
    REQUIRE(r2.size() == 1);
    CHECK(r2[0].lambda0 == doctest::Approx(lambda_pm(gamma0, 2.0, h, kG, +1)).epsilon(1e-9));
    auto r2m = find_bifurcation(gc, kG, h, kL, 2, -4.0, -0.3);
    REQUIRE(r2m.size() == 1);
    CHECK(r2m[0].lambda0 == doctest::Approx(lambda_pm(gamma0, 2.0, h, kG, -1)).epsilon(1e-9));

    // bracket without a root
    CHECK(find_bifurcation(g0, kG, h, kL, 1, 5.0, 9.0).empty());
    // bracket straddling zero is rejected
    CHECK_THROWS_AS(find_bifurcation(g0, kG, h, kL, 1, -1.0, 1.0), Error);
}

TEST_CASE("kernel multiplicity") {
    const double h = 1.0;
    const double gamma0 = 0.9;
    VorticityModel gc = VorticityModel::constant(gamma0);

    // lambda placed exactly on the k = 2 root
    const double lam2 = lambda_pm(gamma0, 2.0, h, kG, +1);
    KernelScan scan = kernel_multiplicity(gc, lam2, kG, h, kL);
    CHECK(scan.spectrum_assumption_ok);
    CHECK(scan.multiplicity == 1);
    REQUIRE(scan.modes.size() == 1);
    CHECK(scan.modes[0] == 2);

    // generic lambda carries no kernel
    KernelScan none = kernel_multiplicity(gc, 17.3, kG, h, kL);
    CHECK(none.multiplicity == 0);
}

TEST_CASE("prufer bounds") {
    const double h = 1.0, lambda = 1.5;

    // constant and affine gamma: inf gamma' = sup gamma', bounds collapse
    for (const auto& g : {VorticityModel::constant(0.4), VorticityModel::affine(-0.9, 0.2)}) {
        PruferBoundsReport rep = prufer_bounds_check(g, lambda, -9.0, 3.0, 25, h);
        CHECK(rep.all_ok);
        for (const auto& row : rep.rows) {
            if (row.in_spectrum) continue;
            CHECK(row.beta_y0 == doctest::Approx(row.lower).epsilon(1e-7));
            CHECK(row.beta_y0 == doctest::Approx(row.upper).epsilon(1e-7));
        }
    }

    // gamma = sin psi: strict inequality on a sampled mu grid
    PruferBoundsReport rep = prufer_bounds_check(VorticityModel::sinusoidal(), lambda,
                                                 -9.0, 1.0, 40, h);
    CHECK(rep.all_ok);
    int strict = 0;
    for (const auto& row : rep.rows)
        if (!row.in_spectrum && row.beta_y0 > row.lower && row.beta_y0 < row.upper) ++strict;
    CHECK(strict > 30);
}

TEST_CASE("mass flux slope is nonnegative under the spectral bound") {
    const double h = 1.0;
    // sup gamma' < pi^2/h^2 for all three models
    for (const auto& g : {VorticityModel::constant(-0.7), VorticityModel::affine(2.0, 0.3),
                          VorticityModel::sinusoidal()}) {
        for (int i = 0; i <= 20; ++i) {
            const double lambda = -3.0 + 6.0 * i / 20.0;
            LaminarFlow lam = solve_laminar(g, lambda, h, 64);
            CHECK(lam.mass_flux_slope() >= 0.0);
        }
    }
}

TEST_CASE("beta_y0 strictly decreasing in mu on the first branch") {
    const double h = 1.0, lambda = 1.2;
    VorticityModel g = VorticityModel::sinusoidal();
    LaminarFlow lam = solve_laminar(g, lambda, h, 128);
    double prev = std::numeric_limits<double>::infinity();
    // sup gamma' = 1 < pi^2/h^2; stay inside the leftmost branch
    for (int i = 0; i <= 30; ++i) {
        const double mu = -12.0 + (M_PI * M_PI - 1.5 + 12.0) * i / 30.0;
        DispersionResult r = solve_beta(g, lambda, mu, h, lam);
        REQUIRE_FALSE(r.in_dirichlet_spectrum);
        CHECK(r.beta_y0 < prev);
        prev = r.beta_y0;
    }
}

TEST_CASE("transversality sign at located roots") {
    const double h = 1.0;
    // gamma'' = 0 everywhere: d_lambda > 0 at positive roots, < 0 at negative
    VorticityModel gc = VorticityModel::constant(0.8);
    auto rp = find_bifurcation(gc, kG, h, kL, 1, 0.3, 5.0);
    REQUIRE(rp.size() == 1);
    CHECK(rp[0].d_lambda > 0.0);
    auto rm = find_bifurcation(gc, kG, h, kL, 1, -5.0, -0.3);
    REQUIRE(rm.size() == 1);
    CHECK(rm[0].d_lambda < 0.0);
}

TEST_CASE("at most one kernel mode under the spectral bound") {
    // sup gamma' = 1 <= pi^2/h^2: at most one nonpositive dispersion root,
    // so every lambda carries kernel multiplicity 0 or 1
    const double h = 1.0;
    VorticityModel g = VorticityModel::sinusoidal();
    for (int i = 0; i <= 12; ++i) {
        const double lambda = (i < 6) ? (-3.2 + 0.5 * i) : (0.6 + 0.5 * (i - 6));
        KernelScan scan = kernel_multiplicity(g, lambda, kG, h, kL, 32);
        CHECK(scan.multiplicity <= 1);
    }
}

TEST_CASE("affine closed forms with positive slope") {
    // a > 0: trigonometric laminar profile and beta
    const double h = 1.0, lambda = 1.3, a = 2.5, b = -0.4, r = std::sqrt(a);
    const int M = 128;
    VorticityModel g = VorticityModel::affine(a, b);
    LaminarFlow lam = solve_laminar(g, lambda, h, M);
    for (int j = 0; j <= M; ++j) {
        const double y = lam.y(j);
        const double expect = lambda / r * std::sin(r * y) + b / a * (std::cos(r * y) - 1.0);
        CHECK(lam.psi[j] == doctest::Approx(expect).epsilon(1e-10));
    }

    // a - (k nu)^2 > 0 and below the first Dirichlet eigenvalue:
    // beta = sin(s (y+h)) / sin(s h) with s = sqrt(a - (k nu)^2)
    const int k = 1;
    const double s = std::sqrt(a - k * k);
    DispersionResult res = solve_beta(g, lambda, -(double)(k * k), h, lam);
    REQUIRE_FALSE(res.in_dirichlet_spectrum);
    for (int j = 0; j <= M; ++j) {
        const double expect = std::sin(s * (lam.y(j) + h)) / std::sin(s * h);
        CHECK(std::abs(res.beta[j] - expect) < 1e-8);
    }
}
