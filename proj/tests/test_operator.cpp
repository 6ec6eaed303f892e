#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "wavestrip/wave_operator.hpp"

using namespace wavestrip;

namespace {

constexpr double kL = 2.0 * M_PI;

Problem make_problem(VorticityModel gamma, int n = 16, int m = 64,
                     double g = 9.81, double h = 1.0) {
    Problem p;
    p.phys = Physics{g, h, kL};
    p.res = Resolution{n, m};
    p.gamma = std::move(gamma);
    return p;
}

std::vector<VorticityModel> test_models() {
    return {VorticityModel::constant(0.0), VorticityModel::constant(-1.1),
            VorticityModel::affine(-0.8, 0.4), VorticityModel::sinusoidal()};
}

} // namespace

TEST_CASE("trivial states are exact solutions") {
    for (const auto& g : test_models()) {
        Problem p = make_problem(g);
        for (const double lambda : {0.5, -0.5, 1.0, -1.0, 3.0, -3.0}) {
            State s = State::trivial(p, lambda);
            ResidualVector f = apply_F(p, s);
            CHECK(f.max_norm() < 1e-12);
        }
    }
}

TEST_CASE("bernoulli R at and near trivial states") {
    Problem p = make_problem(VorticityModel::constant(0.4));
    State s = State::trivial(p, 1.5);

    PeriodicScalar r = bernoulli_R(p, s);
    CHECK(r.parity() == Parity::Even);
    CHECK(r.cos_coeff(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(project_zero_mean(r).max_abs_coeff() < 1e-14);

    // q perturbed: R = |lambda| / sqrt(lambda^2 + 2 dq)
    s.q = 0.3;
    PeriodicScalar rq = bernoulli_R(p, s);
    const double expect = std::abs(s.lambda)
        / std::sqrt(s.lambda * s.lambda + 2.0 * s.q);
    CHECK(rq.cos_coeff(0) == doctest::Approx(expect).epsilon(1e-13));

    // leaving the admissible set carries the three margins in the error
    s.q = -0.5 * s.lambda * s.lambda - 0.1;
    try {
        bernoulli_R(p, s);
        FAIL("expected AdmissibilityError");
    } catch (const AdmissibilityError& e) {
        CHECK(e.margins.greatest_height <= 0.0);
        CHECK(e.margins.min_k > 0.0);
    }
}

TEST_CASE("apply_M at a trivial state reproduces (q, 0, 0)") {
    Problem p = make_problem(VorticityModel::affine(-0.5, 0.2));
    State s = State::trivial(p, -1.2);
    MValue m = apply_M(p, s);
    CHECK(std::abs(m.m1) < 1e-14);  // q = 0 here
    CHECK(m.m2.max_abs_coeff() < 1e-14);
    CHECK(m.m3.max_abs() < 1e-14);
    CHECK(m.m2.parity() == Parity::Even);
}

TEST_CASE("pack/unpack round trip is exact") {
    Problem p = make_problem(VorticityModel::constant(0.0), 6, 24);
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(static_cast<size_t>(packed_dim(p.res)));
    for (double& x : v) x = dist(rng);
    State s = unpack_state(p, 1.3, 1, v);
    const std::vector<double> back = pack_state(s);
    REQUIRE(back.size() == v.size());
    for (size_t i = 0; i < v.size(); ++i) CHECK(back[i] == v[i]);
    // phi traces stay structurally zero
    for (int k = 0; k <= p.res.N; ++k) {
        CHECK(s.phi.cos_prof(k, 0) == 0.0);
        CHECK(s.phi.cos_prof(k, p.res.M) == 0.0);
    }
}

TEST_CASE("apply_F is total on admissible inputs") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (const auto& g : {VorticityModel::affine(-0.8, 0.4), VorticityModel::sinusoidal()}) {
        Problem p = make_problem(g, 8, 32);
        for (int trial = 0; trial < 5; ++trial) {
            State s = State::trivial(p, 1.5 + 0.3 * trial);
            s.q = 0.02 * dist(rng);
            for (int k = 1; k <= p.res.N; ++k) s.w.set_cos(k, 0.01 * dist(rng) / k);
            for (int k = 0; k <= p.res.N; ++k)
                for (int j = 1; j < p.res.M; ++j)
                    s.phi.cos_prof(k, j) = 0.01 * dist(rng) / (1 + k);
            ResidualVector f = apply_F(p, s);
            for (double x : f.pack()) CHECK(std::isfinite(x));
        }
    }
}

namespace {

/// Brute-force evaluation of the surface component of M for gamma = 0 using
/// dense complex arithmetic on a fine grid, independent of the library's
/// projection/multiplier plumbing.
std::vector<double> dense_m2_oracle(double lambda, double q, double g, double h,
                                    double eps, const std::vector<double>& xs) {
    const int n = 1 << 11;
    const int kmax = 64;
    std::vector<double> lnr(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double x = kL * i / n;
        const double w = eps * std::cos(x);
        lnr[static_cast<size_t>(i)] =
            std::log(std::abs(lambda) / std::sqrt(2.0 * q + lambda * lambda - 2.0 * g * w));
    }
    // complex Fourier coefficients of ln R (zero mode dropped by P)
    std::vector<std::complex<double>> coeff(static_cast<size_t>(2 * kmax + 1));
    for (int k = -kmax; k <= kmax; ++k) {
        std::complex<double> c = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = kL * i / n;
            c += lnr[static_cast<size_t>(i)] * std::polar(1.0, -k * x);
        }
        coeff[static_cast<size_t>(k + kmax)] = c / static_cast<double>(n);
    }
    // theta = C^{-1} P ln R, multiplier i tanh(k nu h)
    auto theta_at = [&](double x) {
        std::complex<double> s = 0.0;
        for (int k = -kmax; k <= kmax; ++k) {
            if (k == 0) continue;
            const std::complex<double> m(0.0, std::tanh(k * h));
            s += m * coeff[static_cast<size_t>(k + kmax)] * std::polar(1.0, k * x);
        }
        return s.real();
    };
    // R sin(theta), then the zero-mean antiderivative via 1/(i k)
    std::vector<double> rs(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double x = kL * i / n;
        const double w = eps * std::cos(x);
        const double r = std::abs(lambda) / std::sqrt(2.0 * q + lambda * lambda - 2.0 * g * w);
        rs[static_cast<size_t>(i)] = r * std::sin(theta_at(x));
    }
    std::vector<std::complex<double>> rc(static_cast<size_t>(2 * kmax + 1));
    for (int k = -kmax; k <= kmax; ++k) {
        std::complex<double> c = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = kL * i / n;
            c += rs[static_cast<size_t>(i)] * std::polar(1.0, -k * x);
        }
        rc[static_cast<size_t>(k + kmax)] = c / static_cast<double>(n);
    }
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) {
        std::complex<double> s = 0.0;
        for (int k = -kmax; k <= kmax; ++k) {
            if (k == 0) continue;
            s += rc[static_cast<size_t>(k + kmax)]
                 / std::complex<double>(0.0, static_cast<double>(k))
                 * std::polar(1.0, k * x);
        }
        out.push_back(s.real());
    }
    return out;
}

} // namespace

TEST_CASE("surface component of M against a dense complex-arithmetic oracle") {
    Problem p = make_problem(VorticityModel::constant(0.0), 8, 32);
    const double lambda = 2.0, eps = 0.05;
    State s = State::trivial(p, lambda);
    s.w.set_cos(1, eps);

    // pick q so the scalar equation holds, as on an actual branch slice
    double q0 = 0.0, q1 = 1e-3;
    auto f1 = [&](double q) {
        State t = s;
        t.q = q;
        return apply_F(p, t).f1;
    };
    double y0 = f1(q0), y1 = f1(q1);
    for (int it = 0; it < 60 && std::abs(y1) > 1e-15; ++it) {
        const double q2 = q1 - y1 * (q1 - q0) / (y1 - y0);
        q0 = q1; y0 = y1;
        q1 = q2; y1 = f1(q1);
    }
    s.q = q1;

    MValue m = apply_M(p, s);
    std::vector<double> xs;
    for (int i = 0; i < 17; ++i) xs.push_back(kL * i / 17.0);
    const std::vector<double> oracle =
        dense_m2_oracle(lambda, s.q, p.phys.g, p.phys.h, eps, xs);
    for (size_t i = 0; i < xs.size(); ++i)
        CHECK(m.m2.eval(xs[i]) == doctest::Approx(oracle[i]).epsilon(1e-9));
}

TEST_CASE("flattened Bernoulli gap") {
    Problem p = make_problem(VorticityModel::constant(-0.6));
    State s = State::trivial(p, 1.8);
    CHECK(flattened_bernoulli_gap(p, s) < 1e-14);

    s.w.set_cos(1, 0.05);  // pure surface perturbation breaks the identity
    CHECK(flattened_bernoulli_gap(p, s) > 1e-4);
}

TEST_CASE("physical oracle at trivial states") {
    for (const auto& g : test_models()) {
        Problem p = make_problem(g, 8, 64);
        State s = State::trivial(p, 1.4);
        PhysicalOracleReport rep = physical_oracle(p, s);
        CHECK(rep.mapping_injective);
        CHECK(rep.map_nondegenerate);
        CHECK(rep.above_bed);
        CHECK(rep.res_poisson < 1e-6);
        CHECK(rep.res_bernoulli < 1e-6);
        CHECK(rep.res_surface < 1e-12);
        CHECK(rep.res_bottom < 1e-10);
    }
}

TEST_CASE("physical oracle flags a self-intersecting surface") {
    Problem p = make_problem(VorticityModel::constant(0.0), 8, 64);
    State s = State::trivial(p, 2.0);
    // amplitude far past the fold of the conformal parametrization
    s.w.set_cos(1, 1.5 * std::tanh(p.phys.h));
    PhysicalOracleReport rep = physical_oracle(p, s);
    CHECK_FALSE(rep.mapping_injective);
}

TEST_CASE("linearization at trivial: closed-form directions") {
    const double lambda = 1.7;
    {
        Problem p = make_problem(VorticityModel::sinusoidal(), 8, 32);
        TrivialLinearization lin(p, lambda);
        std::vector<double> dq(static_cast<size_t>(packed_dim(p.res)), 0.0);
        dq[0] = 0.37;
        const std::vector<double> out = lin.apply(dq);
        CHECK(out[0] == doctest::Approx(0.37 / (lambda * lambda)).epsilon(1e-13));
        for (size_t i = 1; i < out.size(); ++i) CHECK(std::abs(out[i]) < 1e-15);
    }
    {
        // gamma = 0, direction (0, dw, 0): A_w = 0 and the surface slot is
        // dw - (g / lambda^2) tanh(k nu h)/(k nu) dw, mode by mode
        Problem p = make_problem(VorticityModel::constant(0.0), 8, 32);
        TrivialLinearization lin(p, lambda);
        std::vector<double> v(static_cast<size_t>(packed_dim(p.res)), 0.0);
        v[2] = 1.0;  // w mode 2
        const std::vector<double> out = lin.apply(v);
        const double expect = 1.0 - 9.81 / (lambda * lambda) * std::tanh(2.0 * p.phys.h) / 2.0;
        CHECK(out[2] == doctest::Approx(expect).epsilon(1e-13));
        CHECK(std::abs(out[0]) < 1e-15);
        for (size_t i = 1; i < out.size(); ++i)
            if (i != 2) CHECK(std::abs(out[i]) < 1e-15);
    }
}

TEST_CASE("linearization at trivial matches finite differences of F") {
    std::mt19937 rng(314);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const std::vector<std::pair<VorticityModel, double>> cases{
        {VorticityModel::constant(0.0), 2.2},
        {VorticityModel::affine(-0.8, 0.4), -1.4},
    };
    for (const auto& [g, lambda] : cases) {
        Problem p = make_problem(g, 6, 32);
        TrivialLinearization lin(p, lambda);
        State base = State::trivial(p, lambda);
        const int dim = packed_dim(p.res);
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<double> dir(static_cast<size_t>(dim));
            double norm = 0.0;
            for (double& x : dir) { x = dist(rng); norm += x * x; }
            norm = std::sqrt(norm);
            for (double& x : dir) x /= norm;

            const double epsfd = 3e-6;
            std::vector<double> up(dir.size()), um(dir.size());
            const std::vector<double> b = pack_state(base);
            for (size_t i = 0; i < dir.size(); ++i) {
                up[i] = b[i] + epsfd * dir[i];
                um[i] = b[i] - epsfd * dir[i];
            }
            const std::vector<double> fp = apply_F(p, unpack_state(p, lambda, base.sign, up)).pack();
            const std::vector<double> fm = apply_F(p, unpack_state(p, lambda, base.sign, um)).pack();
            const std::vector<double> lv = lin.apply(dir);
            double worst = 0.0, scale = 0.0;
            for (size_t i = 0; i < dir.size(); ++i) {
                const double fd = (fp[i] - fm[i]) / (2.0 * epsfd);
                worst = std::max(worst, std::abs(fd - lv[i]));
                scale = std::max(scale, std::abs(lv[i]));
            }
            CHECK(worst < 1e-6 * std::max(1.0, scale));
        }
    }
}

TEST_CASE("good-unknown isomorphism") {
    Problem p = make_problem(VorticityModel::constant(1.1), 8, 48);
    const double lambda = -1.6;
    LaminarFlow lam = solve_laminar(p.gamma, lambda, p.phys.h, p.res.M);

    StripField zero(p.phys.L, p.phys.h, p.res.N, p.res.M, Parity::Even);
    auto [dw0, dphi0] = t_isomorphism(lambda, lam, zero);
    CHECK(dw0.max_abs_coeff() == 0.0);
    CHECK(dphi0.max_abs() == 0.0);

    CHECK_THROWS_AS(t_isomorphism(0.0, lam, zero), Error);

    // round trip on a generic admissible theta
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    StripField theta = zero;
    for (int k = 1; k <= p.res.N; ++k) {
        // profile vanishing at the bed, nonzero trace on top
        const double amp = dist(rng) / k;
        for (int j = 0; j <= p.res.M; ++j) {
            const double t = (theta.y(j) + p.phys.h) / p.phys.h;
            theta.cos_prof(k, j) = amp * t * (2.0 - t);
        }
    }
    auto [dw, dphi] = t_isomorphism(lambda, lam, theta);
    StripField back = t_isomorphism_inverse(lambda, lam, dw, dphi);
    StripField diff = back - theta;
    CHECK(diff.max_abs() < 1e-12 * std::max(1.0, theta.max_abs()));
}

TEST_CASE("tangent formula of the local branch expansion") {
    // T(lambda0) applied to beta(y) cos(k0 nu x) must equal
    // (beta - psi_y sinh(k0 nu (y+h)) / (lambda0 sinh(k0 nu h))) cos(k0 nu x)
    // in the field slot and -cos(k0 nu x)/lambda0 in the surface slot.
    Problem p = make_problem(VorticityModel::constant(0.7), 8, 64);
    const int k0 = 1;
    const double lambda0 = 1.9;  // any nonzero lambda works for the identity
    LaminarFlow lam = solve_laminar(p.gamma, lambda0, p.phys.h, p.res.M);
    DispersionResult dr = solve_beta(p.gamma, lambda0, -1.0, p.phys.h, lam);
    REQUIRE_FALSE(dr.in_dirichlet_spectrum);

    StripField theta(p.phys.L, p.phys.h, p.res.N, p.res.M, Parity::Even);
    for (int j = 0; j <= p.res.M; ++j) theta.cos_prof(k0, j) = dr.beta[static_cast<size_t>(j)];

    auto [dw, dphi] = t_isomorphism(lambda0, lam, theta);
    CHECK(dw.cos_coeff(k0) == doctest::Approx(-1.0 / lambda0).epsilon(1e-12));
    for (int j = 0; j <= p.res.M; ++j) {
        const double y = theta.y(j);
        const double expect = dr.beta[static_cast<size_t>(j)]
            - lam.psi_y[static_cast<size_t>(j)] * std::sinh(k0 * (y + p.phys.h))
              / (lambda0 * std::sinh(k0 * p.phys.h));
        CHECK(dphi.cos_prof(k0, j) == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("linearized operator kernel behavior") {
    Problem p = make_problem(VorticityModel::constant(0.0), 8, 128);
    const double h = p.phys.h;

    // theta = 0 -> 0
    LaminarFlow lam0 = solve_laminar(p.gamma, 2.0, h, p.res.M);
    StripField zero(p.phys.L, h, p.res.N, p.res.M, Parity::Even);
    auto [l1z, l2z] = linearized_L(p, 2.0, lam0, zero);
    CHECK(l1z.max_abs_coeff() == 0.0);
    CHECK(l2z.max_abs() == 0.0);

    // kernel element at the k = 1 bifurcation point is annihilated
    const double lambda0 = std::sqrt(p.phys.g * std::tanh(h));
    LaminarFlow lam = solve_laminar(p.gamma, lambda0, h, p.res.M);
    DispersionResult dr = solve_beta(p.gamma, lambda0, -1.0, h, lam);
    StripField theta = zero;
    for (int j = 0; j <= p.res.M; ++j) theta.cos_prof(1, j) = dr.beta[static_cast<size_t>(j)];
    auto [l1, l2] = linearized_L(p, lambda0, lam, theta);
    const double tnorm = theta.max_abs();
    CHECK(l1.max_abs_coeff() < 1e-8 * tnorm);
    CHECK(l2.max_abs() < 1e-8 * tnorm);

    // an x-independent profile with zero trace is not in the kernel
    StripField mode0 = zero;
    for (int j = 0; j <= p.res.M; ++j)
        mode0.cos_prof(0, j) = std::sin(M_PI * (mode0.y(j) + h) / h);
    auto [l1m, l2m] = linearized_L(p, 2.0, lam0, mode0);
    CHECK(l2m.max_abs() > 0.5 * mode0.max_abs());
}

TEST_CASE("dense assembly of the trivial linearization matches the apply path") {
    Problem p = make_problem(VorticityModel::affine(-0.6, 0.3), 4, 24);
    const double lambda = 1.3;
    TrivialLinearization lin(p, lambda);
    Matrix dense = lin.dense();
    const int n = packed_dim(p.res);
    REQUIRE(dense.rows() == n);

    std::mt19937 rng(55);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(static_cast<size_t>(n));
    for (double& x : v) x = dist(rng);
    const std::vector<double> by_apply = lin.apply(v);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += dense(i, j) * v[static_cast<size_t>(j)];
        CHECK(s == doctest::Approx(by_apply[static_cast<size_t>(i)]).epsilon(1e-12));
    }
}
