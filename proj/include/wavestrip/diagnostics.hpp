#pragma once

#include <string>
#include <vector>

#include "wavestrip/wave_operator.hpp"

namespace wavestrip {

/// Nodal structure of the surface on a half period. Open conditions are
/// tested with an absolute margin (default 1e-10) and the worst observed
/// value is recorded next to each verdict.
struct NodalPart {
    bool flat = false;           // |w| below resolution; checks are vacuous
    bool crest_at_zero = true;   // orientation of the half branch
    bool bed_clear = true;
    double bed_margin = 0.0;     // min (w + h)
    bool monotone = true;
    double monotone_margin = 0.0;  // max of oriented w' over the open half period
    int crest_curvature_sign = 0;
    int trough_curvature_sign = 0;
    bool curvature_ok = true;
    bool mapped_half_period_ok = true;
    double mapped_margin = 0.0;
    bool endpoint_ux_positive = true;
    double endpoint_margin = 0.0;
    int grid_points = 0;
};

struct WaveGeometry {
    double amplitude = 0.0;     // max w - min w
    double crest_x = 0.0, crest_y = 0.0;
    double trough_x = 0.0, trough_y = 0.0;
    double steepness = 0.0;     // amplitude / L
    double max_surface_angle = 0.0;
};

struct WaveReport {
    NodalPart nodal;
    bool self_intersect = false;
    bool f_positive = false;
    double f_min_interior = 0.0;
    bool f_degenerate_flat = false;
    bool unidirectional = false;
    double unidirectional_margin = 0.0;
    bool overhang_free = false;
    double overhang_margin = 0.0;
    WaveGeometry geometry;
    int x_resolution = 0;
    int y_resolution = 0;

    bool nodal_pass() const;
    std::string nodal_failure() const;
};

/// Fills the nodal part, the geometry, and the brute-force self-intersection
/// verdict. The orientation (crest at x = 0 or at x = L/2) is read off the
/// state itself.
WaveReport nodal_check(const Problem& p, const State& s, double margin = 1e-10);

struct FFieldResult {
    StripField f;              // odd in x
    bool positive = false;     // on the open half-period interior
    double min_interior = 0.0;
    bool degenerate_flat = false;
    double boundary_max = 0.0; // |f| on x = 0, L/2 and y = -h (structural zeros)
};

/// f = (V_x (phi_y + psi_y) - V_y phi_x) / |grad V|^2 with a positivity
/// verdict on (0, L/2) x (-h, 0]. Refuses when the conformal factor is too
/// close to degenerate.
FFieldResult f_field(const Problem& p, const State& s, double margin = 1e-10,
                     double min_k_floor = 1e-8);

struct DownstreamResult {
    bool unidirectional = false;
    double unidirectional_margin = 0.0;  // min of the oriented velocity
    bool overhang_free = false;
    double overhang_margin = 0.0;        // min of 1 + C w'
};

DownstreamResult downstream_check(const Problem& p, const State& s, double margin = 1e-10);

struct StagnationSample {
    double x = 0.0, y = 0.0, speed = 0.0;
};

/// Grid points where |grad(phi + psi^lambda)| falls below the threshold.
std::vector<StagnationSample> stagnation_scan(const Problem& p, const State& s,
                                              double threshold);

/// Convenience: nodal + f-field + downstream in one report.
WaveReport full_report(const Problem& p, const State& s, double margin = 1e-10);

/// Whether the hypotheses behind the nodal analysis hold for this model and
/// bifurcation point: sup gamma' < pi^2/(4 h^2) and lambda0 * gamma'' >= 0.
/// Needs the model's global derivative bounds; returns false when unknown.
bool nodal_hypotheses_hold(const Problem& p, double lambda0);

} // namespace wavestrip
