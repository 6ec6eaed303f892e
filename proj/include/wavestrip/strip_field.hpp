#pragma once

#include <algorithm>
#include <vector>

#include "wavestrip/fourier.hpp"

namespace wavestrip {

/// Periodic function on the strip R x (-h, 0), stored as x-Fourier modes with
/// one y-profile per mode on a uniform grid y_j = -h + j h / M, j = 0..M.
/// Index j = 0 is the bed, j = M the top.
class StripField {
public:
    StripField() = default;

    StripField(double period, double depth, int order, int y_cells, Parity parity)
        : L_(period), h_(depth), N_(order), M_(y_cells), parity_(parity),
          cosp_(static_cast<size_t>(order + 1) * (y_cells + 1), 0.0),
          sinp_(static_cast<size_t>(order + 1) * (y_cells + 1), 0.0) {
        if (depth <= 0.0) throw Error("StripField: depth must be positive");
        if (y_cells < 4) throw Error("StripField: need at least 4 y-cells");
    }

    double period() const { return L_; }
    double depth() const { return h_; }
    double nu() const { return 2.0 * M_PI / L_; }
    int order() const { return N_; }
    int y_cells() const { return M_; }
    Parity parity() const { return parity_; }
    double dy() const { return h_ / M_; }
    double y(int j) const { return j == M_ ? 0.0 : -h_ + j * (h_ / M_); }

    double cos_prof(int k, int j) const { return cosp_[idx(k, j)]; }
    double sin_prof(int k, int j) const { return sinp_[idx(k, j)]; }
    double& cos_prof(int k, int j) { return cosp_[idx(k, j)]; }
    double& sin_prof(int k, int j) { return sinp_[idx(k, j)]; }

    void check_compatible(const StripField& o) const {
        if (o.L_ != L_ || o.h_ != h_ || o.N_ != N_ || o.M_ != M_)
            throw Error("StripField: incompatible discretizations");
    }

    /// Trace at y = 0 (top) or y = -h (bottom) as a periodic series.
    PeriodicScalar trace_top() const { return trace(M_); }
    PeriodicScalar trace_bottom() const { return trace(0); }

    /// Termwise x-derivative; flips parity.
    StripField x_derivative() const {
        StripField d(L_, h_, N_, M_, flip_parity(parity_));
        const double v = nu();
        for (int k = 1; k <= N_; ++k)
            for (int j = 0; j <= M_; ++j) {
                d.cosp_[idx(k, j)] = k * v * sinp_[idx(k, j)];
                d.sinp_[idx(k, j)] = -k * v * cosp_[idx(k, j)];
            }
        return d;
    }

    /// y-derivative of every mode profile, fourth order (central stencil in
    /// the interior, one-sided at both boundaries). Requires M >= 5.
    StripField y_derivative() const {
        StripField d(L_, h_, N_, M_, parity_);
        for (int k = 0; k <= N_; ++k) {
            differentiate_profile(&cosp_[idx(k, 0)], &d.cosp_[idx(k, 0)]);
            differentiate_profile(&sinp_[idx(k, 0)], &d.sinp_[idx(k, 0)]);
        }
        return d;
    }

    /// One-sided fourth-order derivative of a single mode profile at y = 0.
    double mode_dy_top(int k, bool sine = false) const {
        const double* p = sine ? &sinp_[idx(k, 0)] : &cosp_[idx(k, 0)];
        const double s = 1.0 / (12.0 * dy());
        return s * (25.0 * p[M_] - 48.0 * p[M_ - 1] + 36.0 * p[M_ - 2]
                    - 16.0 * p[M_ - 3] + 3.0 * p[M_ - 4]);
    }

    double eval(double x, int j) const {
        const double nux = nu() * x;
        double s = cosp_[idx(0, j)];
        for (int k = 1; k <= N_; ++k)
            s += cosp_[idx(k, j)] * std::cos(k * nux) + sinp_[idx(k, j)] * std::sin(k * nux);
        return s;
    }

    /// Dense evaluation on grid columns: out[j * n + i] = field(x_i, y_j).
    std::vector<double> values_on(const CollocationGrid& g) const {
        if (g.period() != L_ || g.order() != N_)
            throw Error("StripField: grid mismatch");
        const int n = g.size();
        std::vector<double> out(static_cast<size_t>(M_ + 1) * n);
        for (int j = 0; j <= M_; ++j) {
            double* row = &out[static_cast<size_t>(j) * n];
            const double c0 = cosp_[idx(0, j)];
            for (int i = 0; i < n; ++i) row[i] = c0;
            for (int k = 1; k <= N_; ++k) {
                const double ck = cosp_[idx(k, j)], sk = sinp_[idx(k, j)];
                if (ck == 0.0 && sk == 0.0) continue;
                for (int i = 0; i < n; ++i)
                    row[i] += ck * g.cos_mode(k, i) + sk * g.sin_mode(k, i);
            }
        }
        return out;
    }

    StripField& operator+=(const StripField& o) {
        check_compatible(o);
        if (o.parity_ != parity_) parity_ = Parity::None;
        for (size_t i = 0; i < cosp_.size(); ++i) { cosp_[i] += o.cosp_[i]; sinp_[i] += o.sinp_[i]; }
        return *this;
    }
    StripField& operator-=(const StripField& o) {
        check_compatible(o);
        if (o.parity_ != parity_) parity_ = Parity::None;
        for (size_t i = 0; i < cosp_.size(); ++i) { cosp_[i] -= o.cosp_[i]; sinp_[i] -= o.sinp_[i]; }
        return *this;
    }
    StripField& operator*=(double c) {
        for (size_t i = 0; i < cosp_.size(); ++i) { cosp_[i] *= c; sinp_[i] *= c; }
        return *this;
    }
    friend StripField operator+(StripField u, const StripField& v) { u += v; return u; }
    friend StripField operator-(StripField u, const StripField& v) { u -= v; return u; }
    friend StripField operator*(double c, StripField u) { u *= c; return u; }

    double max_abs() const {
        double m = 0.0;
        for (size_t i = 0; i < cosp_.size(); ++i) {
            m = std::max(m, std::abs(cosp_[i]));
            m = std::max(m, std::abs(sinp_[i]));
        }
        return m;
    }

private:
    size_t idx(int k, int j) const {
        return static_cast<size_t>(k) * static_cast<size_t>(M_ + 1) + static_cast<size_t>(j);
    }

    PeriodicScalar trace(int j) const {
        PeriodicScalar t(L_, N_, parity_);
        if (parity_ != Parity::Odd) t.set_cos(0, cosp_[idx(0, j)]);
        for (int k = 1; k <= N_; ++k) {
            if (parity_ != Parity::Odd) t.set_cos(k, cosp_[idx(k, j)]);
            if (parity_ != Parity::Even) t.set_sin(k, sinp_[idx(k, j)]);
        }
        return t;
    }

    void differentiate_profile(const double* p, double* out) const {
        const double s = 1.0 / (12.0 * dy());
        out[0] = s * (-25.0 * p[0] + 48.0 * p[1] - 36.0 * p[2] + 16.0 * p[3] - 3.0 * p[4]);
        out[1] = s * (-3.0 * p[0] - 10.0 * p[1] + 18.0 * p[2] - 6.0 * p[3] + p[4]);
        for (int j = 2; j <= M_ - 2; ++j)
            out[j] = s * (p[j - 2] - 8.0 * p[j - 1] + 8.0 * p[j + 1] - p[j + 2]);
        out[M_ - 1] = s * (3.0 * p[M_] + 10.0 * p[M_ - 1] - 18.0 * p[M_ - 2] + 6.0 * p[M_ - 3] - p[M_ - 4]);
        out[M_] = s * (25.0 * p[M_] - 48.0 * p[M_ - 1] + 36.0 * p[M_ - 2] - 16.0 * p[M_ - 3] + 3.0 * p[M_ - 4]);
    }

    double L_ = 0.0, h_ = 0.0;
    int N_ = 0, M_ = 0;
    Parity parity_ = Parity::None;
    std::vector<double> cosp_, sinp_;
};

} // namespace wavestrip
