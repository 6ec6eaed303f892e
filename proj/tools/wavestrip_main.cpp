#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "wavestrip/diagnostics.hpp"
#include "wavestrip/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wavestrip;

namespace {

struct CliArgs {
    std::string config_path;
    std::string out_dir;
    std::string resume_path;
    std::string state_path;
    std::string resolution;
    bool both_halves = false;
};

void apply_overrides(RunConfig& rc, const CliArgs& args) {
    if (!args.out_dir.empty()) rc.output_dir = args.out_dir;
    if (!args.resolution.empty()) {
        int n = 0, m = 0;
        if (std::sscanf(args.resolution.c_str(), "%d,%d", &n, &m) != 2 || n < 1 || m < 16)
            throw ConfigError("--resolution expects N,M with N >= 1, M >= 16");
        rc.problem.res.N = n;
        rc.problem.res.M = m;
    }
}

double opt_number(const json& j, const char* key, double def) {
    auto it = j.find(key);
    if (it == j.end()) return def;
    if (!it->is_number()) throw ConfigError(std::string("config: '") + key + "' must be a number");
    return it->get<double>();
}

int opt_int(const json& j, const char* key, int def) {
    auto it = j.find(key);
    if (it == j.end()) return def;
    if (!it->is_number_integer()) throw ConfigError(std::string("config: '") + key + "' must be an integer");
    return it->get<int>();
}

int count_sign_changes(const std::vector<double>& v) {
    int c = 0;
    for (size_t i = 1; i < v.size(); ++i)
        if ((v[i - 1] < 0.0 && v[i] > 0.0) || (v[i - 1] > 0.0 && v[i] < 0.0)) ++c;
    return c;
}

int cmd_laminar(const RunConfig& rc) {
    const json& o = rc.options;
    const double lo = opt_number(o, "lambda_min", -3.0);
    const double hi = opt_number(o, "lambda_max", 3.0);
    const int count = opt_int(o, "count", 61);
    if (!(lo < hi) || count < 2) throw ConfigError("config: laminar sweep needs lambda_min < lambda_max and count >= 2");

    std::vector<LaminarFlow> flows(static_cast<size_t>(count));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int i = 0; i < count; ++i) {
        const double lam = lo + (hi - lo) * i / (count - 1);
        flows[static_cast<size_t>(i)] =
            solve_laminar(rc.problem.gamma, lam, rc.problem.phys.h, rc.problem.res.M);
    }

    std::ostringstream csv;
    csv << "lambda,m,psi_y_min,psi_y_max,critical_layer_count\n";
    for (const LaminarFlow& f : flows) {
        double pmin = f.psi_y.front(), pmax = pmin;
        for (double v : f.psi_y) { pmin = std::min(pmin, v); pmax = std::max(pmax, v); }
        csv << fmt_full(f.lambda) << ',' << fmt_full(f.mass_flux) << ','
            << fmt_full(pmin) << ',' << fmt_full(pmax) << ','
            << count_sign_changes(f.psi_y) << '\n';
    }
    write_text_file((fs::path(rc.output_dir) / "laminar.csv").string(), csv.str());
    std::cout << "laminar sweep: " << count << " points -> "
              << (fs::path(rc.output_dir) / "laminar.csv").string() << "\n";
    return 0;
}

int cmd_dispersion(const RunConfig& rc) {
    const json& o = rc.options;
    const int kmin = opt_int(o, "k_min", 1);
    const int kmax = opt_int(o, "k_max", 8);
    const double llo = opt_number(o, "lambda_min", 0.5);
    const double lhi = opt_number(o, "lambda_max", 4.0);
    const int lcount = opt_int(o, "lambda_count", 41);
    if (kmin < 1 || kmax < kmin) throw ConfigError("config: dispersion needs 1 <= k_min <= k_max");
    if (!(llo < lhi) || lcount < 2) throw ConfigError("config: dispersion lambda grid invalid");
    if (llo <= 0.0 && lhi >= 0.0) throw ConfigError("config: dispersion lambda grid must exclude 0");

    const double nu = rc.problem.phys.nu();
    struct Row { int k; double mu, lambda, d, dl; bool spec; };
    const int nk = kmax - kmin + 1;
    std::vector<Row> rows(static_cast<size_t>(nk) * lcount);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) collapse(2)
#endif
    for (int ki = 0; ki < nk; ++ki) {
        for (int li = 0; li < lcount; ++li) {
            const int k = kmin + ki;
            const double lam = llo + (lhi - llo) * li / (lcount - 1);
            const double mu = -(k * nu) * (k * nu);
            DispersionResult r = dispersion(rc.problem.gamma, lam, mu,
                                            rc.problem.phys.h, rc.problem.phys.g);
            rows[static_cast<size_t>(ki) * lcount + li] =
                Row{k, mu, lam, r.d, r.d_lambda, r.in_dirichlet_spectrum};
        }
    }

    std::ostringstream csv;
    csv << "k,mu,lambda,d,d_lambda,in_spectrum\n";
    for (const Row& r : rows)
        csv << r.k << ',' << fmt_full(r.mu) << ',' << fmt_full(r.lambda) << ','
            << fmt_full(r.d) << ',' << fmt_full(r.dl) << ',' << (r.spec ? 1 : 0) << '\n';
    write_text_file((fs::path(rc.output_dir) / "dispersion.csv").string(), csv.str());

    if (o.contains("root_bracket")) {
        const auto br = o["root_bracket"].get<std::vector<double>>();
        if (br.size() != 2) throw ConfigError("config: 'dispersion.root_bracket' needs [lo, hi]");
        std::ostringstream rcsv;
        rcsv << "k,lambda0,d_lambda,multiplicity\n";
        for (int k = kmin; k <= kmax; ++k) {
            for (const BifurcationRoot& root :
                 find_bifurcation(rc.problem.gamma, rc.problem.phys.g, rc.problem.phys.h,
                                  rc.problem.phys.L, k, br[0], br[1]))
                rcsv << root.k << ',' << fmt_full(root.lambda0) << ','
                     << fmt_full(root.d_lambda) << ',' << root.multiplicity << '\n';
        }
        write_text_file((fs::path(rc.output_dir) / "roots.csv").string(), rcsv.str());
    }
    std::cout << "dispersion grid: " << rows.size() << " entries -> "
              << (fs::path(rc.output_dir) / "dispersion.csv").string() << "\n";
    return 0;
}

int cmd_bifurcate(const RunConfig& rc) {
    const json& o = rc.options;
    const int k = opt_int(o, "k", 1);
    if (!o.contains("bracket")) throw ConfigError("config: 'bifurcate.bracket' is required");
    const auto br = o["bracket"].get<std::vector<double>>();
    if (br.size() != 2) throw ConfigError("config: 'bifurcate.bracket' needs [lo, hi]");

    const auto roots = find_bifurcation(rc.problem.gamma, rc.problem.phys.g,
                                        rc.problem.phys.h, rc.problem.phys.L, k,
                                        br[0], br[1], opt_int(o, "scan_points", 400));
    std::ostringstream csv;
    csv << "k,lambda0,d_lambda,multiplicity,kernel_modes\n";
    for (const BifurcationRoot& r : roots) {
        csv << r.k << ',' << fmt_full(r.lambda0) << ',' << fmt_full(r.d_lambda) << ','
            << r.multiplicity << ',';
        for (size_t i = 0; i < r.kernel_modes.size(); ++i)
            csv << (i ? ";" : "") << r.kernel_modes[i];
        csv << '\n';
    }
    write_text_file((fs::path(rc.output_dir) / "bifurcation_roots.csv").string(), csv.str());
    std::cout << "found " << roots.size() << " bifurcation point(s) for k = " << k << "\n";
    return roots.empty() ? 3 : 0;
}

json report_to_json(const WaveReport& r) {
    json j;
    j["nodal"] = json{{"flat", r.nodal.flat},
                      {"crest_at_zero", r.nodal.crest_at_zero},
                      {"bed_clear", r.nodal.bed_clear},
                      {"bed_margin", r.nodal.bed_margin},
                      {"monotone", r.nodal.monotone},
                      {"monotone_margin", r.nodal.monotone_margin},
                      {"crest_curvature_sign", r.nodal.crest_curvature_sign},
                      {"trough_curvature_sign", r.nodal.trough_curvature_sign},
                      {"curvature_ok", r.nodal.curvature_ok},
                      {"mapped_half_period_ok", r.nodal.mapped_half_period_ok},
                      {"mapped_margin", r.nodal.mapped_margin},
                      {"endpoint_ux_positive", r.nodal.endpoint_ux_positive},
                      {"endpoint_margin", r.nodal.endpoint_margin},
                      {"grid_points", r.nodal.grid_points}};
    j["self_intersect"] = r.self_intersect;
    j["f_positive"] = r.f_positive;
    j["f_min_interior"] = r.f_min_interior;
    j["unidirectional"] = r.unidirectional;
    j["overhang_free"] = r.overhang_free;
    j["geometry"] = json{{"amplitude", r.geometry.amplitude},
                         {"crest_x", r.geometry.crest_x},
                         {"crest_y", r.geometry.crest_y},
                         {"trough_x", r.geometry.trough_x},
                         {"trough_y", r.geometry.trough_y},
                         {"steepness", r.geometry.steepness},
                         {"max_surface_angle", r.geometry.max_surface_angle}};
    j["x_resolution"] = r.x_resolution;
    j["y_resolution"] = r.y_resolution;
    return j;
}

void write_branch_outputs(const RunConfig& rc, const BranchResult& res,
                          const std::string& suffix) {
    const Problem& p = rc.problem;
    const fs::path out(rc.output_dir);

    std::ostringstream csv;
    csv << "s,lambda,q,wave_height,min_K,greatest_height_margin,bed_clearance,"
           "newton_iters,verdict_so_far\n";
    for (size_t i = 0; i < res.points.size(); ++i) {
        const BranchPoint& bp = res.points[i];
        const bool lastrow = i + 1 == res.points.size();
        csv << fmt_full(bp.s) << ',' << fmt_full(bp.state.lambda) << ','
            << fmt_full(bp.state.q) << ',' << fmt_full(bp.monitors.wave_height) << ','
            << fmt_full(bp.monitors.margins.min_k) << ','
            << fmt_full(bp.monitors.margins.greatest_height) << ','
            << fmt_full(bp.monitors.bed_clearance) << ',' << bp.newton_iters << ','
            << (lastrow ? verdict_name(res.verdict) : "running") << '\n';
    }
    write_text_file((out / ("branch" + suffix + ".csv")).string(), csv.str());

    json summary;
    summary["verdict"] = verdict_name(res.verdict);
    summary["detail"] = res.detail;
    summary["points"] = res.points.size();
    if (!res.points.empty())
        summary["nodal_hypotheses"] =
            nodal_hypotheses_hold(p, res.points.front().state.lambda);
    if (res.points.size() >= 4) {
        // skip the trivial start, whose bordered system is singular
        std::vector<BranchPoint> seg(res.points.begin() + 1, res.points.end());
        summary["secondary_bifurcation_flags"] = detect_secondary_bifurcation(seg);
    }
    json snaps = json::array();
    const int every = std::max(1, rc.continuation.snapshot_every);
    for (size_t i = 0; i < res.points.size(); ++i) {
        if (i % static_cast<size_t>(every) != 0 && i + 1 != res.points.size()) continue;
        const BranchPoint& bp = res.points[i];
        char name[64];
        std::snprintf(name, sizeof(name), "profile%s_%06zu.csv", suffix.c_str(), i);
        SurfaceCurve curve = surface_curve(bp.state.w, p.phys.h, 8 * std::max(p.res.N, 16));
        std::ostringstream prof;
        prof << "X,Y\n";
        for (size_t k = 0; k < curve.x.size(); ++k)
            prof << fmt_full(curve.x[k]) << ',' << fmt_full(curve.y[k]) << '\n';
        write_text_file((out / name).string(), prof.str());

        json snap;
        snap["index"] = i;
        snap["s"] = bp.s;
        snap["lambda"] = bp.state.lambda;
        snap["q"] = bp.state.q;
        snap["profile"] = name;
        snap["bernoulli_gap"] = bp.bernoulli_gap;
        snap["monitors"] = json{{"min_K", bp.monitors.margins.min_k},
                                {"min_stagnation", bp.monitors.margins.min_stagnation},
                                {"greatest_height_margin", bp.monitors.margins.greatest_height},
                                {"bed_clearance", bp.monitors.bed_clearance},
                                {"wave_height", bp.monitors.wave_height},
                                {"wprime_sup", bp.monitors.wprime_sup},
                                {"holder_quotient", bp.monitors.holder_quotient},
                                {"vorticity_lp", bp.monitors.vorticity_lp},
                                {"norm_phi", bp.monitors.norm_phi}};
        snap["report"] = report_to_json(full_report(p, bp.state));
        snaps.push_back(std::move(snap));
    }
    summary["snapshots"] = snaps;
    write_text_file((out / ("summary" + suffix + ".json")).string(), summary.dump(2) + "\n");

    if (res.points.size() >= 2) {
        const BranchPoint& prev = res.points[res.points.size() - 2];
        const BranchPoint& last = res.points.back();
        save_checkpoint((out / ("checkpoint" + suffix + ".json")).string(), p,
                        rc.continuation, prev, last);
        save_state((out / ("state_last" + suffix + ".json")).string(), p, last.state);
    }
}

int cmd_continue(RunConfig& rc, const CliArgs& args) {
    const json& o = rc.options;
    ContinuationConfig& cfg = rc.continuation;
    cfg.max_points = opt_int(o, "budget", cfg.max_points);
    cfg.initial_step = opt_number(o, "initial_step", cfg.initial_step);
    if (o.contains("enforce_nodal")) cfg.enforce_nodal = o["enforce_nodal"].get<bool>();

    if (!args.resume_path.empty()) {
        LoadedCheckpoint ck = load_checkpoint(args.resume_path);
        ck.config.max_points = cfg.max_points;
        BranchResult res = continue_from(ck.problem, ck.prev, ck.last, ck.config);
        RunConfig rcr = rc;
        rcr.problem = ck.problem;
        rcr.continuation = ck.config;
        write_branch_outputs(rcr, res, "");
        std::cout << "resumed branch: " << res.points.size() << " points, verdict "
                  << verdict_name(res.verdict) << "\n";
        return 0;
    }

    const int k0 = opt_int(o, "k0", 1);
    double lambda0;
    if (o.contains("lambda0")) {
        lambda0 = o["lambda0"].get<double>();
    } else if (o.contains("bracket")) {
        const auto br = o["bracket"].get<std::vector<double>>();
        if (br.size() != 2) throw ConfigError("config: 'continue.bracket' needs [lo, hi]");
        const auto roots = find_bifurcation(rc.problem.gamma, rc.problem.phys.g,
                                            rc.problem.phys.h, rc.problem.phys.L,
                                            k0, br[0], br[1]);
        if (roots.empty())
            throw NumericsError("continue: no bifurcation point inside the bracket");
        lambda0 = roots.front().lambda0;
    } else {
        throw ConfigError("config: 'continue' needs 'lambda0' or 'bracket'");
    }

    BranchResult res = continue_branch(rc.problem, lambda0, k0, cfg, +1);
    write_branch_outputs(rc, res, "");
    std::cout << "branch (+): " << res.points.size() << " points, verdict "
              << verdict_name(res.verdict) << "\n";
    if (args.both_halves) {
        BranchResult neg = continue_branch(rc.problem, lambda0, k0, cfg, -1);
        write_branch_outputs(rc, neg, "_minus");
        std::cout << "branch (-): " << neg.points.size() << " points, verdict "
                  << verdict_name(neg.verdict) << "\n";
    }
    return 0;
}

int cmd_check(const std::string& state_path) {
    LoadedState ls = load_state(state_path);
    const Problem& p = ls.problem;
    const State& s = ls.state;

    const ResidualVector f = apply_F(p, s);
    const double gap = flattened_bernoulli_gap(p, s);
    const PhysicalOracleReport oracle = physical_oracle(p, s);
    const WaveReport rep = full_report(p, s);

    std::printf("state check: %s\n", state_path.c_str());
    std::printf("  %-28s %s\n", "||F||_inf", fmt_full(f.max_norm()).c_str());
    std::printf("  %-28s %s\n", "bernoulli gap", fmt_full(gap).c_str());
    std::printf("  %-28s %s\n", "oracle poisson residual", fmt_full(oracle.res_poisson).c_str());
    std::printf("  %-28s %s\n", "oracle bernoulli residual", fmt_full(oracle.res_bernoulli).c_str());
    std::printf("  %-28s %s\n", "oracle surface residual", fmt_full(oracle.res_surface).c_str());
    std::printf("  %-28s %s\n", "oracle bottom residual", fmt_full(oracle.res_bottom).c_str());
    std::printf("  %-28s %s\n", "mapping injective", oracle.mapping_injective ? "yes" : "no");
    std::printf("  %-28s %s\n", "nodal pass", rep.nodal_pass() ? "yes" : "no");
    std::printf("  %-28s %s\n", "self intersect", rep.self_intersect ? "yes" : "no");
    std::printf("  %-28s %s\n", "unidirectional", rep.unidirectional ? "yes" : "no");
    std::printf("  %-28s %s\n", "overhang free", rep.overhang_free ? "yes" : "no");
    std::printf("  %-28s %s\n", "wave height", fmt_full(rep.geometry.amplitude).c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"steady periodic water waves with vorticity on a conformal strip"};
    app.require_subcommand(1);

    CliArgs args;
    app.add_option("--out", args.out_dir, "output directory (overrides config)");
    app.add_option("--resolution", args.resolution, "override numerics as N,M");

    CLI::App* c_laminar = app.add_subcommand("laminar", "sweep of laminar flows");
    CLI::App* c_disp = app.add_subcommand("dispersion", "dispersion relation grid");
    CLI::App* c_bif = app.add_subcommand("bifurcate", "locate bifurcation points");
    CLI::App* c_cont = app.add_subcommand("continue", "branch continuation");
    CLI::App* c_check = app.add_subcommand("check", "verify a persisted state file");

    for (CLI::App* c : {c_laminar, c_disp, c_bif, c_cont, c_check})
        c->fallthrough();
    for (CLI::App* c : {c_laminar, c_disp, c_bif, c_cont})
        c->add_option("--config", args.config_path, "run configuration (JSON)")->required();
    c_cont->add_option("--resume", args.resume_path, "continuation checkpoint to resume");
    c_cont->add_flag("--both-half-branches", args.both_halves,
                     "also follow the x-shifted half branch");
    c_check->add_option("state", args.state_path, "state file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(c_check)) return cmd_check(args.state_path);

        RunConfig rc = parse_run_config(args.config_path);
        apply_overrides(rc, args);
        fs::create_directories(rc.output_dir);

        if (app.got_subcommand(c_laminar)) {
            if (rc.mode != "laminar") throw ConfigError("config: 'mode' is '" + rc.mode + "', expected 'laminar'");
            return cmd_laminar(rc);
        }
        if (app.got_subcommand(c_disp)) {
            if (rc.mode != "dispersion") throw ConfigError("config: 'mode' is '" + rc.mode + "', expected 'dispersion'");
            return cmd_dispersion(rc);
        }
        if (app.got_subcommand(c_bif)) {
            if (rc.mode != "bifurcate") throw ConfigError("config: 'mode' is '" + rc.mode + "', expected 'bifurcate'");
            return cmd_bifurcate(rc);
        }
        if (app.got_subcommand(c_cont)) {
            if (rc.mode != "continue") throw ConfigError("config: 'mode' is '" + rc.mode + "', expected 'continue'");
            return cmd_continue(rc, args);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const AdmissibilityError& e) {
        std::cerr << "admissibility refusal: " << e.what()
                  << " (min K = " << e.margins.min_k
                  << ", min |S dA/dy + lambda| = " << e.margins.min_stagnation
                  << ", greatest-height margin = " << e.margins.greatest_height << ")\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
