#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "wavestrip/errors.hpp"

namespace wavestrip {

enum class Parity { Even, Odd, None };

/// Parity of a pointwise product.
inline Parity combine_parity(Parity a, Parity b) {
    if (a == Parity::None || b == Parity::None) return Parity::None;
    return (a == b) ? Parity::Even : Parity::Odd;
}

inline Parity flip_parity(Parity p) {
    switch (p) {
        case Parity::Even: return Parity::Odd;
        case Parity::Odd: return Parity::Even;
        default: return Parity::None;
    }
}

/// coth for positive arguments; saturates to 1 in double precision long
/// before the naive cosh/sinh quotient would overflow.
inline double coth(double x) {
    if (x >= 20.0) return 1.0;
    return 1.0 / std::tanh(x);
}

/// sinh(a)/sinh(b) for 0 <= a <= b without overflow for large b.
inline double sinh_ratio(double a, double b) {
    if (b < 30.0) return std::sinh(a) / std::sinh(b);
    return std::exp(a - b) * (-std::expm1(-2.0 * a)) / (-std::expm1(-2.0 * b));
}

/// cosh(a)/sinh(b) for 0 <= a <= b without overflow for large b.
inline double cosh_sinh_ratio(double a, double b) {
    if (b < 30.0) return std::cosh(a) / std::sinh(b);
    return std::exp(a - b) * (1.0 + std::exp(-2.0 * a)) / (-std::expm1(-2.0 * b));
}

/// Truncated real Fourier series of an L-periodic function,
///   u(x) = a[0] + sum_{k=1..N} a[k] cos(k nu x) + b[k] sin(k nu x),
/// nu = 2 pi / L. Parity is structural: even series store only cosine
/// coefficients, odd series only sine coefficients.
class PeriodicScalar {
public:
    PeriodicScalar() = default;

    PeriodicScalar(double period, int order, Parity parity)
        : L_(period), N_(order), parity_(parity),
          a_(static_cast<size_t>(order) + 1, 0.0),
          b_(static_cast<size_t>(order) + 1, 0.0) {
        if (period <= 0.0) throw Error("PeriodicScalar: period must be positive");
        if (order < 1) throw Error("PeriodicScalar: truncation order must be >= 1");
    }

    double period() const { return L_; }
    int order() const { return N_; }
    double nu() const { return 2.0 * M_PI / L_; }
    Parity parity() const { return parity_; }

    double mean() const { return a_[0]; }
    bool zero_mean(double tol = 0.0) const { return std::abs(a_[0]) <= tol; }

    double cos_coeff(int k) const { return a_[static_cast<size_t>(k)]; }
    double sin_coeff(int k) const { return b_[static_cast<size_t>(k)]; }

    void set_cos(int k, double v) {
        if (parity_ == Parity::Odd && v != 0.0)
            throw Error("PeriodicScalar: cosine coefficient on odd series");
        a_[static_cast<size_t>(k)] = v;
    }
    void set_sin(int k, double v) {
        if (k == 0) {
            if (v != 0.0) throw Error("PeriodicScalar: sin(0) coefficient");
            return;
        }
        if (parity_ == Parity::Even && v != 0.0)
            throw Error("PeriodicScalar: sine coefficient on even series");
        b_[static_cast<size_t>(k)] = v;
    }

    double eval(double x) const {
        const double nux = nu() * x;
        double s = a_[0];
        for (int k = 1; k <= N_; ++k) {
            const double th = k * nux;
            s += a_[static_cast<size_t>(k)] * std::cos(th)
               + b_[static_cast<size_t>(k)] * std::sin(th);
        }
        return s;
    }

    /// Termwise derivative.
    PeriodicScalar derivative() const {
        PeriodicScalar d(L_, N_, flip_parity(parity_));
        const double v = nu();
        for (int k = 1; k <= N_; ++k) {
            d.a_[static_cast<size_t>(k)] = k * v * b_[static_cast<size_t>(k)];
            d.b_[static_cast<size_t>(k)] = -k * v * a_[static_cast<size_t>(k)];
        }
        return d;
    }

    double max_abs_coeff() const {
        double m = 0.0;
        for (int k = 0; k <= N_; ++k) {
            m = std::max(m, std::abs(a_[static_cast<size_t>(k)]));
            m = std::max(m, std::abs(b_[static_cast<size_t>(k)]));
        }
        return m;
    }

    PeriodicScalar& operator+=(const PeriodicScalar& o) {
        check_compatible(o);
        if (o.parity_ != parity_) parity_ = Parity::None;
        for (size_t i = 0; i < a_.size(); ++i) { a_[i] += o.a_[i]; b_[i] += o.b_[i]; }
        return *this;
    }
    PeriodicScalar& operator-=(const PeriodicScalar& o) {
        check_compatible(o);
        if (o.parity_ != parity_) parity_ = Parity::None;
        for (size_t i = 0; i < a_.size(); ++i) { a_[i] -= o.a_[i]; b_[i] -= o.b_[i]; }
        return *this;
    }
    PeriodicScalar& operator*=(double c) {
        for (size_t i = 0; i < a_.size(); ++i) { a_[i] *= c; b_[i] *= c; }
        return *this;
    }

    friend PeriodicScalar operator+(PeriodicScalar u, const PeriodicScalar& v) { u += v; return u; }
    friend PeriodicScalar operator-(PeriodicScalar u, const PeriodicScalar& v) { u -= v; return u; }
    friend PeriodicScalar operator*(double c, PeriodicScalar u) { u *= c; return u; }

    void check_compatible(const PeriodicScalar& o) const {
        if (o.L_ != L_ || o.N_ != N_)
            throw Error("PeriodicScalar: incompatible period or truncation");
    }

private:
    double L_ = 0.0;
    int N_ = 0;
    Parity parity_ = Parity::None;
    std::vector<double> a_, b_;
};

/// Uniform periodic collocation grid with cached mode tables,
/// x_i = i L / n. Quadrature by the rectangle rule is exact for
/// trigonometric polynomials of bandwidth < n.
class CollocationGrid {
public:
    CollocationGrid(double period, int order, int n_points)
        : L_(period), N_(order), n_(n_points) {
        if (n_ < 2 * N_ + 1)
            throw Error("CollocationGrid: need at least 2N+1 points");
        x_.resize(static_cast<size_t>(n_));
        ct_.resize(static_cast<size_t>(N_ + 1) * n_);
        st_.resize(static_cast<size_t>(N_ + 1) * n_);
        const double nu = 2.0 * M_PI / L_;
        for (int i = 0; i < n_; ++i) x_[static_cast<size_t>(i)] = i * (L_ / n_);
        for (int k = 0; k <= N_; ++k) {
            for (int i = 0; i < n_; ++i) {
                const double th = k * nu * x_[static_cast<size_t>(i)];
                ct_[idx(k, i)] = std::cos(th);
                st_[idx(k, i)] = std::sin(th);
            }
        }
    }

    int size() const { return n_; }
    int order() const { return N_; }
    double period() const { return L_; }
    double x(int i) const { return x_[static_cast<size_t>(i)]; }
    double cos_mode(int k, int i) const { return ct_[idx(k, i)]; }
    double sin_mode(int k, int i) const { return st_[idx(k, i)]; }

    /// Dense evaluation of a series on the grid.
    std::vector<double> values(const PeriodicScalar& u) const {
        u_check(u);
        std::vector<double> v(static_cast<size_t>(n_), u.cos_coeff(0));
        for (int k = 1; k <= N_; ++k) {
            const double ak = u.cos_coeff(k), bk = u.sin_coeff(k);
            if (ak == 0.0 && bk == 0.0) continue;
            for (int i = 0; i < n_; ++i)
                v[static_cast<size_t>(i)] += ak * ct_[idx(k, i)] + bk * st_[idx(k, i)];
        }
        return v;
    }

    /// Least-squares projection of grid samples onto modes 0..N.
    PeriodicScalar project(const std::vector<double>& v, Parity parity) const {
        if (static_cast<int>(v.size()) != n_)
            throw Error("CollocationGrid: sample count mismatch");
        PeriodicScalar u(L_, N_, parity);
        if (parity != Parity::Odd) {
            double s = 0.0;
            for (int i = 0; i < n_; ++i) s += v[static_cast<size_t>(i)];
            u.set_cos(0, s / n_);
        }
        for (int k = 1; k <= N_; ++k) {
            double ca = 0.0, sa = 0.0;
            for (int i = 0; i < n_; ++i) {
                ca += v[static_cast<size_t>(i)] * ct_[idx(k, i)];
                sa += v[static_cast<size_t>(i)] * st_[idx(k, i)];
            }
            // factor 2/n except for the Nyquist-like mode k = n/2
            const double scale = (2 * k == n_) ? 1.0 / n_ : 2.0 / n_;
            if (parity != Parity::Odd) u.set_cos(k, scale * ca);
            if (parity != Parity::Even) u.set_sin(k, scale * sa);
        }
        return u;
    }

    double mean_of(const std::vector<double>& v) const {
        double s = 0.0;
        for (double t : v) s += t;
        return s / n_;
    }

private:
    size_t idx(int k, int i) const {
        return static_cast<size_t>(k) * static_cast<size_t>(n_) + static_cast<size_t>(i);
    }
    void u_check(const PeriodicScalar& u) const {
        if (u.period() != L_ || u.order() != N_)
            throw Error("CollocationGrid: series/grid mismatch");
    }

    double L_;
    int N_, n_;
    std::vector<double> x_, ct_, st_;
};

/// Padded grid size used for pointwise nonlinear operations. Products of two
/// bandwidth-N series are alias-free on >= 3N+1 points; 4N gives headroom for
/// compositions (sqrt, log, vorticity evaluations).
inline int dealiased_points(int order) { return std::max(4 * order, 8); }

} // namespace wavestrip
