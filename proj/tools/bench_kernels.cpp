// Timings of the OpenMP kernels against their serial reference paths:
// per-mode Poisson solves, finite-difference Jacobian assembly, dense LU.
// Every pair must agree bitwise; the max |diff| column asserts that.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "wavestrip/continuation.hpp"
#include "wavestrip/elliptic.hpp"
#include "wavestrip/linalg.hpp"
#include "wavestrip/wave_operator.hpp"

using namespace wavestrip;

namespace {

using clock_type = std::chrono::steady_clock;

template <class F>
double time_ms(int reps, F&& fn) {
    const auto t0 = clock_type::now();
    for (int r = 0; r < reps; ++r) fn();
    const auto t1 = clock_type::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

double field_diff(const StripField& a, const StripField& b) {
    StripField d = a;
    d -= b;
    return d.max_abs();
}

double matrix_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

void report(const char* name, double serial_ms, double omp_ms, double diff) {
    std::printf("%-24s %10.3f ms %10.3f ms %8.2fx   max|diff| = %g\n",
                name, serial_ms, omp_ms, serial_ms / omp_ms, diff);
}

Problem make_problem(int n, int m, double gamma0) {
    Problem p;
    p.phys = Physics{9.81, 1.0, 2.0 * M_PI};
    p.res = Resolution{n, m};
    p.gamma = VorticityModel::constant(gamma0);
    return p;
}

} // namespace

int main(int argc, char** argv) {
    int N = 64, M = 256, reps = 5;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--n" && i + 1 < argc) N = std::atoi(argv[++i]);
        else if (a == "--m" && i + 1 < argc) M = std::atoi(argv[++i]);
        else if (a == "--reps" && i + 1 < argc) reps = std::atoi(argv[++i]);
        else {
            std::printf("usage: %s [--n N] [--m M] [--reps R]\n", argv[0]);
            return 2;
        }
    }
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; both columns run serial code\n");
#endif
    std::printf("N = %d, M = %d, reps = %d\n\n", N, M, reps);
    std::printf("%-24s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

    // Poisson batch on a full rank of modes
    {
        Problem p = make_problem(N, M, 0.0);
        StripField rhs(p.phys.L, p.phys.h, N, M, Parity::Even);
        for (int k = 0; k <= N; ++k)
            for (int j = 0; j <= M; ++j)
                rhs.cos_prof(k, j) = std::sin(0.37 * (k + 1) * (j + 1));
        StripField a = poisson_strip_serial(rhs);
        StripField b = poisson_strip(rhs);
        const double ds = time_ms(reps * 10, [&] { poisson_strip_serial(rhs); });
        const double dp = time_ms(reps * 10, [&] { poisson_strip(rhs); });
        report("poisson_strip", ds, dp, field_diff(a, b));
    }

    // finite-difference Jacobian of the packed system (phi slaved, gamma const)
    {
        Problem p = make_problem(N, M, 0.6);
        State s = State::trivial(p, 2.5);
        s.w.set_cos(1, 0.01);
        Matrix a = newton_jacobian(p, s, false);
        Matrix b = newton_jacobian(p, s, true);
        const double ds = time_ms(reps, [&] { newton_jacobian(p, s, false); });
        const double dp = time_ms(reps, [&] { newton_jacobian(p, s, true); });
        report("fd_jacobian", ds, dp, matrix_diff(a, b));
    }

    // dense LU at the bordered-system size of a mid-size full packing
    {
        const int n = 1200;
        Matrix m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                m(i, j) = (i == j ? 4.0 : 0.0) + std::sin(0.001 * (i * 31 + j * 17));
        LuFactors a = lu_factor_serial(m);
        LuFactors b = lu_factor(m);
        const double ds = time_ms(reps, [&] { lu_factor_serial(m); });
        const double dp = time_ms(reps, [&] { lu_factor(m); });
        report("lu_factor", ds, dp, matrix_diff(a.lu, b.lu));
    }

    return 0;
}
