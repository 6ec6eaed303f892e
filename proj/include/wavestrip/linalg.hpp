#pragma once

#include <vector>

#include "wavestrip/errors.hpp"

namespace wavestrip {

/// Dense row-major matrix, just big enough for the packed Newton systems.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols) : r_(rows), c_(cols),
        a_(static_cast<size_t>(rows) * cols, 0.0) {}

    int rows() const { return r_; }
    int cols() const { return c_; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * c_ + j]; }
    double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * c_ + j]; }
    double* row(int i) { return &a_[static_cast<size_t>(i) * c_]; }
    const double* row(int i) const { return &a_[static_cast<size_t>(i) * c_]; }
    const std::vector<double>& data() const { return a_; }

private:
    int r_ = 0, c_ = 0;
    std::vector<double> a_;
};

/// LU factorization with partial pivoting, kept with the permutation and the
/// determinant sign so branch monitors can read det character cheaply.
struct LuFactors {
    Matrix lu;
    std::vector<int> perm;
    int det_sign = 1;       // 0 if singular
    double log_abs_det = 0.0;
    double min_pivot = 0.0;
    double max_pivot = 0.0;
};

/// Parallel (OpenMP) factorization; row updates are disjoint, so the result
/// is bitwise identical to lu_factor_serial.
LuFactors lu_factor(Matrix a);
LuFactors lu_factor_serial(Matrix a);

std::vector<double> lu_solve(const LuFactors& f, std::vector<double> b);

/// Rough reciprocal condition estimate from the pivot spread.
double lu_rcond_estimate(const LuFactors& f);

/// Solve a tridiagonal system in place (Thomas algorithm).
/// diag, lower, upper are the three bands; lower[0] and upper[n-1] unused.
void tridiag_solve(std::vector<double>& diag, std::vector<double>& lower,
                   std::vector<double>& upper, std::vector<double>& rhs);

} // namespace wavestrip
