#include "wavestrip/linalg.hpp"

#include <cmath>
#include <limits>

namespace wavestrip {

namespace {

template <bool Parallel>
LuFactors lu_factor_impl(Matrix a) {
    const int n = a.rows();
    if (n != a.cols()) throw Error("lu_factor: matrix must be square");
    LuFactors f;
    f.perm.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) f.perm[static_cast<size_t>(i)] = i;
    f.det_sign = 1;
    f.log_abs_det = 0.0;
    f.min_pivot = std::numeric_limits<double>::infinity();
    f.max_pivot = 0.0;

    for (int k = 0; k < n; ++k) {
        int piv = k;
        double big = std::abs(a(k, k));
        for (int i = k + 1; i < n; ++i) {
            const double v = std::abs(a(i, k));
            if (v > big) { big = v; piv = i; }
        }
        if (big == 0.0) {
            f.det_sign = 0;
            f.log_abs_det = -std::numeric_limits<double>::infinity();
            f.min_pivot = 0.0;
            f.lu = std::move(a);
            return f;
        }
        if (piv != k) {
            double* rk = a.row(k);
            double* rp = a.row(piv);
            for (int j = 0; j < n; ++j) std::swap(rk[j], rp[j]);
            std::swap(f.perm[static_cast<size_t>(k)], f.perm[static_cast<size_t>(piv)]);
            f.det_sign = -f.det_sign;
        }
        const double pivot = a(k, k);
        if (pivot < 0.0) f.det_sign = -f.det_sign;
        f.log_abs_det += std::log(std::abs(pivot));
        f.min_pivot = std::min(f.min_pivot, std::abs(pivot));
        f.max_pivot = std::max(f.max_pivot, std::abs(pivot));

        const double inv = 1.0 / pivot;
        const double* rk = a.row(k);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (Parallel && n - k > 64)
#endif
        for (int i = k + 1; i < n; ++i) {
            double* ri = a.row(i);
            const double m = ri[k] * inv;
            ri[k] = m;
            if (m != 0.0)
                for (int j = k + 1; j < n; ++j) ri[j] -= m * rk[j];
        }
    }
    f.lu = std::move(a);
    return f;
}

} // namespace

LuFactors lu_factor(Matrix a) { return lu_factor_impl<true>(std::move(a)); }
LuFactors lu_factor_serial(Matrix a) { return lu_factor_impl<false>(std::move(a)); }

std::vector<double> lu_solve(const LuFactors& f, std::vector<double> b) {
    const int n = f.lu.rows();
    if (f.det_sign == 0) throw NumericsError("lu_solve: singular matrix");
    if (static_cast<int>(b.size()) != n) throw Error("lu_solve: size mismatch");
    std::vector<double> x(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<size_t>(i)] = b[static_cast<size_t>(f.perm[static_cast<size_t>(i)])];
    // forward substitution, unit lower triangle
    for (int i = 0; i < n; ++i) {
        double s = x[static_cast<size_t>(i)];
        const double* ri = f.lu.row(i);
        for (int j = 0; j < i; ++j) s -= ri[j] * x[static_cast<size_t>(j)];
        x[static_cast<size_t>(i)] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = x[static_cast<size_t>(i)];
        const double* ri = f.lu.row(i);
        for (int j = i + 1; j < n; ++j) s -= ri[j] * x[static_cast<size_t>(j)];
        x[static_cast<size_t>(i)] = s / ri[i];
    }
    return x;
}

double lu_rcond_estimate(const LuFactors& f) {
    if (f.det_sign == 0 || f.max_pivot == 0.0) return 0.0;
    return f.min_pivot / f.max_pivot;
}

void tridiag_solve(std::vector<double>& diag, std::vector<double>& lower,
                   std::vector<double>& upper, std::vector<double>& rhs) {
    const int n = static_cast<int>(diag.size());
    if (n == 0) return;
    for (int i = 1; i < n; ++i) {
        const double d = diag[static_cast<size_t>(i - 1)];
        if (d == 0.0) throw NumericsError("tridiag_solve: zero pivot");
        const double m = lower[static_cast<size_t>(i)] / d;
        diag[static_cast<size_t>(i)] -= m * upper[static_cast<size_t>(i - 1)];
        rhs[static_cast<size_t>(i)] -= m * rhs[static_cast<size_t>(i - 1)];
    }
    if (diag[static_cast<size_t>(n - 1)] == 0.0)
        throw NumericsError("tridiag_solve: zero pivot");
    rhs[static_cast<size_t>(n - 1)] /= diag[static_cast<size_t>(n - 1)];
    for (int i = n - 2; i >= 0; --i)
        rhs[static_cast<size_t>(i)] = (rhs[static_cast<size_t>(i)]
            - upper[static_cast<size_t>(i)] * rhs[static_cast<size_t>(i + 1)])
            / diag[static_cast<size_t>(i)];
}

} // namespace wavestrip
