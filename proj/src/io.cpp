#include "wavestrip/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace wavestrip {

using nlohmann::json;

namespace {

const json* find(const json& j, const char* key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double need_number(const json& j, const std::string& path, const char* key) {
    const json* v = find(j, key);
    if (!v || !v->is_number())
        throw ConfigError("config: '" + path + "." + key + "' must be a number");
    return v->get<double>();
}

double number_or(const json& j, const char* key, double def) {
    const json* v = find(j, key);
    if (!v) return def;
    if (!v->is_number()) throw ConfigError(std::string("config: '") + key + "' must be a number");
    return v->get<double>();
}

int int_or(const json& j, const char* key, int def) {
    const json* v = find(j, key);
    if (!v) return def;
    if (!v->is_number_integer()) throw ConfigError(std::string("config: '") + key + "' must be an integer");
    return v->get<int>();
}

} // namespace

std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

nlohmann::json vorticity_to_json(const VorticityModel& m) {
    json j;
    j["kind"] = m.kind_name();
    switch (m.kind()) {
        case VorticityModel::Kind::Constant:
            j["gamma0"] = m.param1();
            break;
        case VorticityModel::Kind::Affine:
            j["a"] = m.param1();
            j["b"] = m.param2();
            break;
        case VorticityModel::Kind::Sinusoidal:
            j["amplitude"] = m.param1();
            j["frequency"] = m.param2();
            break;
        case VorticityModel::Kind::Custom:
            j["breakpoints"] = m.breakpoints();
            j["coefficients"] = m.coefficients();
            break;
    }
    return j;
}

VorticityModel vorticity_from_json(const json& j) {
    const json* kindj = find(j, "kind");
    if (!kindj || !kindj->is_string())
        throw ConfigError("config: 'vorticity.kind' must be a string");
    const std::string kind = kindj->get<std::string>();
    if (kind == "constant")
        return VorticityModel::constant(number_or(j, "gamma0", 0.0));
    if (kind == "affine")
        return VorticityModel::affine(need_number(j, "vorticity", "a"),
                                      need_number(j, "vorticity", "b"));
    if (kind == "sin")
        return VorticityModel::sinusoidal(number_or(j, "amplitude", 1.0),
                                          number_or(j, "frequency", 1.0));
    if (kind == "custom") {
        const json* bp = find(j, "breakpoints");
        const json* cf = find(j, "coefficients");
        if (!bp || !bp->is_array() || !cf || !cf->is_array())
            throw ConfigError("config: custom vorticity needs 'vorticity.breakpoints' "
                              "and 'vorticity.coefficients' arrays");
        return VorticityModel::custom(bp->get<std::vector<double>>(),
                                      cf->get<std::vector<std::vector<double>>>());
    }
    throw ConfigError("config: 'vorticity.kind' must be one of "
                      "constant|affine|sin|custom, got '" + kind + "'");
}

RunConfig parse_run_config_json(const json& j) {
    RunConfig rc;
    const json* phys = find(j, "physical");
    if (!phys || !phys->is_object())
        throw ConfigError("config: missing 'physical' object");
    rc.problem.phys.g = need_number(*phys, "physical", "g");
    rc.problem.phys.h = need_number(*phys, "physical", "h");
    rc.problem.phys.L = need_number(*phys, "physical", "L");
    if (!(rc.problem.phys.g > 0.0)) throw ConfigError("config: 'physical.g' must be > 0");
    if (!(rc.problem.phys.h > 0.0)) throw ConfigError("config: 'physical.h' must be > 0");
    if (!(rc.problem.phys.L > 0.0)) throw ConfigError("config: 'physical.L' must be > 0");

    const json* vort = find(j, "vorticity");
    if (!vort || !vort->is_object())
        throw ConfigError("config: missing 'vorticity' object");
    rc.problem.gamma = vorticity_from_json(*vort);

    const json* num = find(j, "numerics");
    if (!num || !num->is_object())
        throw ConfigError("config: missing 'numerics' object");
    rc.problem.res.N = int_or(*num, "N", 32);
    rc.problem.res.M = int_or(*num, "M", 128);
    if (rc.problem.res.N < 1) throw ConfigError("config: 'numerics.N' must be >= 1");
    if (rc.problem.res.M < 16) throw ConfigError("config: 'numerics.M' must be >= 16");
    rc.continuation.newton_tol = number_or(*num, "newton_tol", 1e-11);
    rc.continuation.max_newton_iter = int_or(*num, "max_newton_iter", 10);

    const json* mode = find(j, "mode");
    if (!mode || !mode->is_string())
        throw ConfigError("config: missing 'mode' string "
                          "(laminar|dispersion|bifurcate|continue|check)");
    rc.mode = mode->get<std::string>();

    if (const json* out = find(j, "output_dir")) {
        if (!out->is_string()) throw ConfigError("config: 'output_dir' must be a string");
        rc.output_dir = out->get<std::string>();
    }

    if (const json* opt = find(j, rc.mode.c_str())) {
        if (!opt->is_object())
            throw ConfigError("config: '" + rc.mode + "' options must be an object");
        rc.options = *opt;
    } else {
        rc.options = json::object();
    }

    // continuation thresholds, all optional
    if (const json* cont = find(j, "thresholds")) {
        if (!cont->is_object()) throw ConfigError("config: 'thresholds' must be an object");
        ContinuationConfig& c = rc.continuation;
        c.initial_step = number_or(*cont, "initial_step", c.initial_step);
        c.min_step = number_or(*cont, "min_step", c.min_step);
        c.max_step = number_or(*cont, "max_step", c.max_step);
        c.max_points = int_or(*cont, "max_points", c.max_points);
        c.lambda_bound = number_or(*cont, "lambda_bound", c.lambda_bound);
        c.wnorm_bound = number_or(*cont, "wnorm_bound", c.wnorm_bound);
        c.vorticity_lp_bound = number_or(*cont, "vorticity_lp_bound", c.vorticity_lp_bound);
        c.vorticity_p = number_or(*cont, "vorticity_p", c.vorticity_p);
        c.greatest_height_threshold = number_or(*cont, "greatest_height", c.greatest_height_threshold);
        c.min_k_threshold = number_or(*cont, "min_k", c.min_k_threshold);
        c.bed_clearance_threshold = number_or(*cont, "bed_clearance", c.bed_clearance_threshold);
        c.return_trivial_wnorm = number_or(*cont, "return_trivial_wnorm", c.return_trivial_wnorm);
        c.snapshot_every = int_or(*cont, "snapshot_every", c.snapshot_every);
        if (const json* v = find(*cont, "enforce_nodal")) c.enforce_nodal = v->get<bool>();
        if (const json* v = find(*cont, "check_self_intersection"))
            c.check_self_intersection = v->get<bool>();
    }
    return rc;
}

RunConfig parse_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: parse error in '" + path + "': " + e.what());
    }
    return parse_run_config_json(j);
}

namespace {

json physics_to_json(const Physics& p) {
    return json{{"g", p.g}, {"h", p.h}, {"L", p.L}};
}

json state_to_json(const Problem& p, const State& s) {
    json js;
    js["lambda"] = s.lambda;
    js["q"] = s.q;
    js["sign"] = s.sign;
    std::vector<double> wc(static_cast<size_t>(p.res.N));
    for (int k = 1; k <= p.res.N; ++k) wc[static_cast<size_t>(k - 1)] = s.w.cos_coeff(k);
    js["w_cos"] = wc;
    std::vector<std::vector<double>> phi(static_cast<size_t>(p.res.N) + 1);
    for (int k = 0; k <= p.res.N; ++k) {
        phi[static_cast<size_t>(k)].resize(static_cast<size_t>(p.res.M) + 1);
        for (int j = 0; j <= p.res.M; ++j)
            phi[static_cast<size_t>(k)][static_cast<size_t>(j)] = s.phi.cos_prof(k, j);
    }
    js["phi_cos"] = phi;
    return js;
}

State state_from_json(const Problem& p, const json& js, const std::string& where) {
    State s = State::trivial(p, need_number(js, where, "lambda"));
    s.q = need_number(js, where, "q");
    s.sign = int_or(js, "sign", s.lambda > 0 ? 1 : -1);
    const json* wc = find(js, "w_cos");
    if (!wc || !wc->is_array() || static_cast<int>(wc->size()) != p.res.N)
        throw ConfigError("state: '" + where + ".w_cos' must hold N entries");
    for (int k = 1; k <= p.res.N; ++k)
        s.w.set_cos(k, (*wc)[static_cast<size_t>(k - 1)].get<double>());
    const json* phi = find(js, "phi_cos");
    if (!phi || !phi->is_array() || static_cast<int>(phi->size()) != p.res.N + 1)
        throw ConfigError("state: '" + where + ".phi_cos' must hold N+1 mode profiles");
    for (int k = 0; k <= p.res.N; ++k) {
        const json& prof = (*phi)[static_cast<size_t>(k)];
        if (!prof.is_array() || static_cast<int>(prof.size()) != p.res.M + 1)
            throw ConfigError("state: '" + where + ".phi_cos' profiles must hold M+1 values");
        for (int j = 0; j <= p.res.M; ++j)
            s.phi.cos_prof(k, j) = prof[static_cast<size_t>(j)].get<double>();
    }
    return s;
}

Problem problem_from_json(const json& j) {
    Problem p;
    const json* phys = find(j, "physical");
    if (!phys) throw ConfigError("state: missing 'physical'");
    p.phys.g = need_number(*phys, "physical", "g");
    p.phys.h = need_number(*phys, "physical", "h");
    p.phys.L = need_number(*phys, "physical", "L");
    const json* vort = find(j, "vorticity");
    if (!vort) throw ConfigError("state: missing 'vorticity'");
    p.gamma = vorticity_from_json(*vort);
    const json* num = find(j, "numerics");
    if (!num) throw ConfigError("state: missing 'numerics'");
    p.res.N = int_or(*num, "N", 0);
    p.res.M = int_or(*num, "M", 0);
    if (p.res.N < 1 || p.res.M < 16) throw ConfigError("state: bad 'numerics.N/M'");
    return p;
}

json problem_to_json(const Problem& p) {
    json j;
    j["physical"] = physics_to_json(p.phys);
    j["vorticity"] = vorticity_to_json(p.gamma);
    j["numerics"] = json{{"N", p.res.N}, {"M", p.res.M}};
    return j;
}

json parse_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw ConfigError(std::string(what) + ": cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        // e.byte carries the offset of the failure
        throw ConfigError(std::string(what) + ": schema error in '" + path + "' at byte "
                          + std::to_string(e.byte) + ": " + e.what());
    }
}

} // namespace

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << content;
}

void save_state(const std::string& path, const Problem& p, const State& s) {
    json j = problem_to_json(p);
    j["format"] = "wavestrip-state";
    j["version"] = 1;
    j["state"] = state_to_json(p, s);
    write_text_file(path, j.dump(2) + "\n");
}

LoadedState load_state(const std::string& path) {
    json j = parse_file(path, "state");
    if (!j.contains("format") || j["format"] != "wavestrip-state")
        throw ConfigError("state: '" + path + "' is not a wavestrip state file");
    LoadedState out{problem_from_json(j), State{}};
    const json* st = find(j, "state");
    if (!st) throw ConfigError("state: missing 'state' object");
    out.state = state_from_json(out.problem, *st, "state");
    return out;
}

namespace {

json branch_point_to_json(const Problem& p, const BranchPoint& bp) {
    json j;
    j["state"] = state_to_json(p, bp.state);
    j["s"] = bp.s;
    j["newton_iters"] = bp.newton_iters;
    j["det_sign"] = bp.det_sign;
    j["log_abs_det"] = bp.log_abs_det;
    return j;
}

BranchPoint branch_point_from_json(const Problem& p, const json& j, const std::string& where) {
    BranchPoint bp;
    const json* st = find(j, "state");
    if (!st) throw ConfigError("checkpoint: missing '" + where + ".state'");
    bp.state = state_from_json(p, *st, where + ".state");
    bp.s = need_number(j, where, "s");
    bp.newton_iters = int_or(j, "newton_iters", 0);
    bp.det_sign = int_or(j, "det_sign", 0);
    bp.log_abs_det = number_or(j, "log_abs_det", 0.0);
    return bp;
}

} // namespace

void save_checkpoint(const std::string& path, const Problem& p,
                     const ContinuationConfig& cfg,
                     const BranchPoint& prev, const BranchPoint& last) {
    json j = problem_to_json(p);
    j["format"] = "wavestrip-checkpoint";
    j["version"] = 1;
    json c;
    c["initial_step"] = cfg.initial_step;
    c["min_step"] = cfg.min_step;
    c["max_step"] = cfg.max_step;
    c["newton_tol"] = cfg.newton_tol;
    c["max_newton_iter"] = cfg.max_newton_iter;
    c["max_points"] = cfg.max_points;
    c["lambda_bound"] = cfg.lambda_bound;
    c["wnorm_bound"] = cfg.wnorm_bound;
    c["vorticity_lp_bound"] = cfg.vorticity_lp_bound;
    c["vorticity_p"] = cfg.vorticity_p;
    c["greatest_height"] = cfg.greatest_height_threshold;
    c["min_k"] = cfg.min_k_threshold;
    c["bed_clearance"] = cfg.bed_clearance_threshold;
    c["return_trivial_wnorm"] = cfg.return_trivial_wnorm;
    c["check_self_intersection"] = cfg.check_self_intersection;
    c["enforce_nodal"] = cfg.enforce_nodal;
    c["snapshot_every"] = cfg.snapshot_every;
    j["config"] = c;
    j["prev"] = branch_point_to_json(p, prev);
    j["last"] = branch_point_to_json(p, last);
    write_text_file(path, j.dump(2) + "\n");
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    json j = parse_file(path, "checkpoint");
    if (!j.contains("format") || j["format"] != "wavestrip-checkpoint")
        throw ConfigError("checkpoint: '" + path + "' is not a wavestrip checkpoint");
    LoadedCheckpoint out;
    out.problem = problem_from_json(j);
    const json* c = find(j, "config");
    if (c) {
        ContinuationConfig& cc = out.config;
        cc.initial_step = number_or(*c, "initial_step", cc.initial_step);
        cc.min_step = number_or(*c, "min_step", cc.min_step);
        cc.max_step = number_or(*c, "max_step", cc.max_step);
        cc.newton_tol = number_or(*c, "newton_tol", cc.newton_tol);
        cc.max_newton_iter = int_or(*c, "max_newton_iter", cc.max_newton_iter);
        cc.max_points = int_or(*c, "max_points", cc.max_points);
        cc.lambda_bound = number_or(*c, "lambda_bound", cc.lambda_bound);
        cc.wnorm_bound = number_or(*c, "wnorm_bound", cc.wnorm_bound);
        cc.vorticity_lp_bound = number_or(*c, "vorticity_lp_bound", cc.vorticity_lp_bound);
        cc.vorticity_p = number_or(*c, "vorticity_p", cc.vorticity_p);
        cc.greatest_height_threshold = number_or(*c, "greatest_height", cc.greatest_height_threshold);
        cc.min_k_threshold = number_or(*c, "min_k", cc.min_k_threshold);
        cc.bed_clearance_threshold = number_or(*c, "bed_clearance", cc.bed_clearance_threshold);
        cc.return_trivial_wnorm = number_or(*c, "return_trivial_wnorm", cc.return_trivial_wnorm);
        if (const json* v = find(*c, "check_self_intersection"))
            cc.check_self_intersection = v->get<bool>();
        if (const json* v = find(*c, "enforce_nodal")) cc.enforce_nodal = v->get<bool>();
        cc.snapshot_every = int_or(*c, "snapshot_every", cc.snapshot_every);
    }
    const json* prev = find(j, "prev");
    const json* last = find(j, "last");
    if (!prev || !last) throw ConfigError("checkpoint: missing 'prev'/'last' points");
    out.prev = branch_point_from_json(out.problem, *prev, "prev");
    out.last = branch_point_from_json(out.problem, *last, "last");
    return out;
}

} // namespace wavestrip
