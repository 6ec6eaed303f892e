#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "wavestrip/errors.hpp"

namespace wavestrip {

/// Prescribed vorticity function gamma(psi) with first and second derivative.
/// Built-in kinds keep derivatives exact; Custom is a piecewise-cubic table
/// gamma(s) = sum_m c[m] (s - s_i)^m on [s_i, s_{i+1}], extended by its end
/// polynomials outside the table.
class VorticityModel {
public:
    enum class Kind { Constant, Affine, Sinusoidal, Custom };

    static VorticityModel constant(double gamma0) {
        VorticityModel m;
        m.kind_ = Kind::Constant;
        m.p1_ = gamma0;
        m.gp_inf_ = m.gp_sup_ = 0.0;
        m.gpp_inf_ = m.gpp_sup_ = 0.0;
        return m;
    }

    /// gamma(s) = a s + b
    static VorticityModel affine(double a, double b) {
        VorticityModel m;
        m.kind_ = Kind::Affine;
        m.p1_ = a;
        m.p2_ = b;
        m.gp_inf_ = m.gp_sup_ = a;
        m.gpp_inf_ = m.gpp_sup_ = 0.0;
        return m;
    }

    /// gamma(s) = amp * sin(freq s)
    static VorticityModel sinusoidal(double amplitude = 1.0, double frequency = 1.0) {
        VorticityModel m;
        m.kind_ = Kind::Sinusoidal;
        m.p1_ = amplitude;
        m.p2_ = frequency;
        const double b = std::abs(amplitude * frequency);
        m.gp_inf_ = -b;
        m.gp_sup_ = b;
        const double b2 = std::abs(amplitude * frequency * frequency);
        m.gpp_inf_ = -b2;
        m.gpp_sup_ = b2;
        return m;
    }

    static VorticityModel custom(std::vector<double> breakpoints,
                                 std::vector<std::vector<double>> coefficients) {
        if (breakpoints.size() < 2 || coefficients.size() + 1 != breakpoints.size())
            throw ConfigError("custom vorticity: need n breakpoints and n-1 coefficient rows");
        for (size_t i = 1; i < breakpoints.size(); ++i)
            if (!(breakpoints[i] > breakpoints[i - 1]))
                throw ConfigError("custom vorticity: breakpoints must increase");
        for (const auto& c : coefficients)
            if (c.empty() || c.size() > 4)
                throw ConfigError("custom vorticity: 1..4 coefficients per piece");
        VorticityModel m;
        m.kind_ = Kind::Custom;
        m.breaks_ = std::move(breakpoints);
        m.coeffs_ = std::move(coefficients);
        return m;
    }

    Kind kind() const { return kind_; }
    std::string kind_name() const {
        switch (kind_) {
            case Kind::Constant: return "constant";
            case Kind::Affine: return "affine";
            case Kind::Sinusoidal: return "sin";
            default: return "custom";
        }
    }
    double param1() const { return p1_; }
    double param2() const { return p2_; }
    const std::vector<double>& breakpoints() const { return breaks_; }
    const std::vector<std::vector<double>>& coefficients() const { return coeffs_; }

    double operator()(double s) const { return value(s); }

    double value(double s) const {
        switch (kind_) {
            case Kind::Constant: return p1_;
            case Kind::Affine: return p1_ * s + p2_;
            case Kind::Sinusoidal: return p1_ * std::sin(p2_ * s);
            default: return piece_eval(s, 0);
        }
    }

    double derivative(double s) const {
        switch (kind_) {
            case Kind::Constant: return 0.0;
            case Kind::Affine: return p1_;
            case Kind::Sinusoidal: return p1_ * p2_ * std::cos(p2_ * s);
            default: return piece_eval(s, 1);
        }
    }

    double second_derivative(double s) const {
        switch (kind_) {
            case Kind::Constant: return 0.0;
            case Kind::Affine: return 0.0;
            case Kind::Sinusoidal: return -p1_ * p2_ * p2_ * std::sin(p2_ * s);
            default: return piece_eval(s, 2);
        }
    }

    /// Global bounds on gamma', when known in closed form.
    std::optional<double> gamma_prime_inf() const { return gp_inf_; }
    std::optional<double> gamma_prime_sup() const { return gp_sup_; }
    std::optional<double> gamma_pp_inf() const { return gpp_inf_; }
    std::optional<double> gamma_pp_sup() const { return gpp_sup_; }

    /// Sign information used by the downstream and nodal hypotheses.
    bool nonnegative_on(double lo, double hi, int samples = 257) const {
        for (int i = 0; i <= samples; ++i)
            if (value(lo + (hi - lo) * i / samples) < 0.0) return false;
        return true;
    }
    bool nonpositive_on(double lo, double hi, int samples = 257) const {
        for (int i = 0; i <= samples; ++i)
            if (value(lo + (hi - lo) * i / samples) > 0.0) return false;
        return true;
    }

private:
    double piece_eval(double s, int deriv) const {
        size_t i = 0;
        while (i + 2 < breaks_.size() && s >= breaks_[i + 1]) ++i;
        if (s < breaks_.front()) i = 0;
        const double t = s - breaks_[i];
        const auto& c = coeffs_[i];
        double v = 0.0;
        for (int m = static_cast<int>(c.size()) - 1; m >= deriv; --m) {
            double f = 1.0;
            for (int d = 0; d < deriv; ++d) f *= (m - d);
            v = v * t + f * c[static_cast<size_t>(m)];
        }
        return v;
    }

    Kind kind_ = Kind::Constant;
    double p1_ = 0.0, p2_ = 0.0;
    std::optional<double> gp_inf_, gp_sup_, gpp_inf_, gpp_sup_;
    std::vector<double> breaks_;
    std::vector<std::vector<double>> coeffs_;
};

} // namespace wavestrip
