/// @file cli.hpp
/// @brief Command-line orchestration: fom / pod / rom / sweep / report.
///
/// Exit codes: 0 success, 2 bad configuration, 3 numerical failure.  Failures
/// emit one machine-readable line on stderr:
///   error stage=<stage> exit=<code> msg="<message>"

#pragma once

#include <CLI11.hpp>

#include <iostream>
#include <map>

#include "trrom/config.hpp"
#include "trrom/io.hpp"

namespace trrom {

namespace detail {

inline int fail(const std::string& stage, int code, const std::string& msg) {
    std::cerr << "error stage=" << stage << " exit=" << code << " msg=\"" << msg << "\"\n";
    return code;
}

inline int run_stage(const std::string& stage, const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const ConfigError& e) {
        return fail(stage, 2, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(stage, 2, e.what());
    } catch (const std::exception& e) {
        return fail(stage, 3, e.what());
    }
}

inline void stage_fom(const RunConfig& cfg) {
    const SnapshotSet snaps = run_fom(cfg.fom);
    write_snapshots(cfg.paths.snapshots, snaps);
    std::cout << "fom: wrote " << snaps.count() << " snapshots to " << cfg.paths.snapshots << "\n";
}

inline void stage_pod(const RunConfig& cfg) {
    const SnapshotSet snaps = read_snapshots(cfg.paths.snapshots);
    const PodBasis basis = compute_pod(snaps, cfg.pod_R);
    write_basis(cfg.paths.basis, basis);
    const TailSums ts = tails(basis);
    std::cout << "pod: R=" << basis.R << " wrote " << cfg.paths.basis << "\n";
    std::cout << "r,lambda,lambda_l2_tail,lambda_h10_tail,s_r_norm\n";
    for (int r = 1; r <= basis.R; ++r)
        std::cout << r << ',' << format_g17(basis.eigenvalues[r - 1]) << ','
                  << format_g17(ts.lambda_l2[r]) << ',' << format_g17(ts.lambda_h10[r]) << ','
                  << format_g17(ts.s_r_norm[r]) << "\n";
}

inline void stage_rom(const RunConfig& cfg) {
    const PodBasis basis = read_basis(cfg.paths.basis);
    const RomOperators ops = assemble_operators(basis, cfg.rom.r, cfg.fom.nu);
    const FilterOp filt = build_filter(ops, cfg.rom.delta);

    Eigen::VectorXd a0 = Eigen::VectorXd::Zero(cfg.rom.r);
    double t0 = 0.0;
    if (cfg.rom.initial == "project") {
        const SnapshotSet snaps = read_snapshots(cfg.paths.snapshots);
        const std::vector<double> a0v = project_P_r(snaps.fields[0], basis, cfg.rom.r);
        a0 = Eigen::Map<const Eigen::VectorXd>(a0v.data(), cfg.rom.r);
        t0 = snaps.times.front();
    }

    TrRomParams p;
    p.r = cfg.rom.r;
    p.nu = cfg.fom.nu;
    p.dt = cfg.rom.dt;
    p.chi = cfg.rom.chi;
    p.delta = cfg.rom.delta;
    p.scheme = cfg.rom.scheme;
    p.form = cfg.rom.form;
    p.tol = cfg.rom.tol;
    p.max_iters = cfg.rom.max_iters;
    p.use_newton = cfg.rom.use_newton;
    p.m_steps = cfg.rom.m_steps;
    p.t0 = t0;

    const Trajectory traj = run_rom(a0, p, ops, filt);
    write_trajectory(cfg.paths.trajectory, traj, *basis.grid);
    if (traj.diverged)
        throw std::runtime_error("rom run diverged: " + traj.fail_msg);
    std::cout << "rom: " << traj.steps_completed() << " steps, wrote " << cfg.paths.trajectory << "\n";
    if (p.scheme == Scheme::implicit_be && p.form == ConvectionForm::skew) {
        const StabilityReport rep = stability_check(traj, p, std::sqrt(traj.energy.front()), 0.0);
        std::cout << "stability: per_step_ok=" << (rep.all_steps_ok ? "yes" : "no")
                  << " accumulated_ok=" << (rep.accumulated_ok ? "yes" : "no")
                  << " min_slack=" << format_g17(rep.min_slack)
                  << " C_sr=" << format_g17(rep.bound_C) << "\n";
    }
}

inline void stage_sweep(const RunConfig& cfg) {
    const SnapshotSet snaps = read_snapshots(cfg.paths.snapshots);
    const PodBasis basis = read_basis(cfg.paths.basis);
    const std::vector<StudyRecord> records = run_sweep(snaps, basis, cfg.fom.nu, cfg.sweep);
    write_csv(cfg.paths.results, records);
    std::cout << "sweep: " << records.size() << " records written to " << cfg.paths.results << "\n";
}

inline void stage_report(const RunConfig& cfg, const std::string& csv_path) {
    const std::vector<StudyRecord> records = parse_csv_file(csv_path);
    if (records.empty()) {
        std::cout << "report: no records\n";
        return;
    }

    // per-r best records for rate fits
    std::map<int, StudyRecord> best_per_r;
    for (const auto& rec : records) {
        if (rec.status != "ok") continue;
        auto it = best_per_r.find(rec.r);
        if (it == best_per_r.end() || metric_value(rec, cfg.study.metric) <
                                          metric_value(it->second, cfg.study.metric))
            best_per_r[rec.r] = rec;
    }
    std::vector<double> ll2, el2, lh10, eh10;
    for (const auto& [r, rec] : best_per_r) {
        if (rec.lambda_l2_tail > 0 && rec.eps_l2 > 0) {
            ll2.push_back(rec.lambda_l2_tail);
            el2.push_back(rec.eps_l2);
        }
        if (rec.lambda_h10_tail > 0 && rec.eps_h10 > 0) {
            lh10.push_back(rec.lambda_h10_tail);
            eh10.push_back(rec.eps_h10);
        }
    }
    if (ll2.size() >= 2) {
        const RateFit f = fit_rate(ll2, el2);
        std::cout << "rate eps_l2~Lambda_L2: slope=" << format_g17(f.slope)
                  << " r2=" << format_g17(f.r_squared) << "\n";
    }
    if (lh10.size() >= 2) {
        const RateFit f = fit_rate(lh10, eh10);
        std::cout << "rate eps_h10~Lambda_H10: slope=" << format_g17(f.slope)
                  << " r2=" << format_g17(f.r_squared) << "\n";
    }

    // chi_eff per (r, delta) group
    std::map<std::pair<int, double>, std::vector<StudyRecord>> groups;
    for (const auto& rec : records) groups[{rec.r, rec.delta}].push_back(rec);
    std::map<int, std::vector<std::pair<double, double>>> chi_eff_curves;  // r -> (delta, chi_eff)
    for (const auto& [key, grp] : groups) {
        try {
            const double ce = find_chi_effective(grp, cfg.study.metric, cfg.study.tolerance);
            std::cout << "chi_eff r=" << key.first << " delta=" << format_g17(key.second) << ": "
                      << format_g17(ce) << "\n";
            chi_eff_curves[key.first].push_back({key.second, ce});
        } catch (const std::exception&) {
            std::cout << "chi_eff r=" << key.first << " delta=" << format_g17(key.second)
                      << ": all runs failed\n";
        }
    }

    // regime breakpoints and anchor extrapolation per r
    for (const auto& [r, curve] : chi_eff_curves) {
        std::vector<double> ds, ces;
        for (const auto& [d, ce] : curve)
            if (d > 0 && ce > 0) {
                ds.push_back(d);
                ces.push_back(ce);
            }
        if (ds.size() >= 4) {
            const PiecewiseFit pf = fit_two_segment(ds, ces);
            std::cout << "breakpoint r=" << r << " delta=" << format_g17(ds[pf.break_index])
                      << " slope_left=" << format_g17(pf.slope_left)
                      << " slope_right=" << format_g17(pf.slope_right) << "\n";
        }
        if (!cfg.study.anchor_deltas.empty()) {
            const StudyRecord& any = groups.at({r, curve.front().first}).front();
            ChiInputs in;
            in.nu = cfg.fom.nu;
            in.dt = cfg.rom.dt;
            in.N = cfg.study.N > 0 ? cfg.study.N : 1.0;
            in.k = cfg.study.k;
            in.s = cfg.study.s;
            in.lambda_l2 = any.lambda_l2_tail;
            in.lambda_h10 = any.lambda_h10_tail;
            in.s_r_norm = any.s_r_norm;
            in.C_sr = cfg.study.C_sr;
            std::vector<ChiAnchor> anchors;
            std::vector<double> targets;
            std::vector<double> target_deltas;
            for (const auto& [d, ce] : curve) {
                in.delta = d;
                const double ct = chi_theory_simplified(in);
                const bool is_anchor =
                    std::any_of(cfg.study.anchor_deltas.begin(), cfg.study.anchor_deltas.end(),
                                [&](double ad) { return std::abs(ad - d) <= 1e-12 * std::max(1.0, ad); });
                if (is_anchor) anchors.push_back({ce, ct});
                else {
                    targets.push_back(ct);
                    target_deltas.push_back(d);
                }
            }
            if (!anchors.empty()) {
                const Extrapolation ex = extrapolate_chi(anchors, targets);
                std::cout << "extrapolation r=" << r << " rho_bar=" << format_g17(ex.rho_bar) << "\n";
                for (size_t i = 0; i < targets.size(); ++i)
                    std::cout << "extrapolated r=" << r << " delta=" << format_g17(target_deltas[i])
                              << ": " << format_g17(ex.predicted[i]) << "\n";
            }
        }
    }

    // term-magnitude table when closed-form inputs are configured
    if (cfg.study.N > 0) {
        const StudyRecord& rec = records.front();
        ChiInputs in;
        in.nu = cfg.fom.nu;
        in.dt = cfg.rom.dt;
        in.N = cfg.study.N;
        in.k = cfg.study.k;
        in.s = cfg.study.s;
        in.delta = cfg.study.delta;
        in.lambda_l2 = rec.lambda_l2_tail;
        in.lambda_h10 = rec.lambda_h10_tail;
        in.s_r_norm = rec.s_r_norm;
        in.C_sr = cfg.study.C_sr;
        const TermTable tt = term_magnitudes(in, cfg.study.chi);
        for (const auto& [name, value] : tt.terms)
            std::cout << "term " << name << " = " << format_g17(value) << "\n";
    }
}

}  // namespace detail

inline int cli_dispatch(int argc, const char* const* argv) {
    CLI::App app{"reduced-order-model laboratory for time-relaxation ROMs"};
    app.require_subcommand(1);

    std::string config_path, csv_path;
    auto* c_fom = app.add_subcommand("fom", "run the full-order solver and write snapshots");
    c_fom->add_option("--config", config_path, "JSON config")->required();
    auto* c_pod = app.add_subcommand("pod", "build the POD basis from snapshots");
    c_pod->add_option("--config", config_path, "JSON config")->required();
    auto* c_rom = app.add_subcommand("rom", "integrate the reduced model");
    c_rom->add_option("--config", config_path, "JSON config")->required();
    auto* c_sweep = app.add_subcommand("sweep", "run a (r, delta, chi) parameter sweep");
    c_sweep->add_option("--config", config_path, "JSON config")->required();
    auto* c_report = app.add_subcommand("report", "summarize a results CSV");
    c_report->add_option("--csv", csv_path, "results CSV")->required();
    c_report->add_option("--config", config_path, "JSON config (study options)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    RunConfig cfg;
    if (!config_path.empty()) {
        try {
            cfg = load_config(config_path);
        } catch (const std::exception& e) {
            return detail::fail("config", 2, e.what());
        }
    }

    if (c_fom->parsed()) return detail::run_stage("fom", [&] { detail::stage_fom(cfg); });
    if (c_pod->parsed()) return detail::run_stage("pod", [&] { detail::stage_pod(cfg); });
    if (c_rom->parsed()) return detail::run_stage("rom", [&] { detail::stage_rom(cfg); });
    if (c_sweep->parsed()) return detail::run_stage("sweep", [&] { detail::stage_sweep(cfg); });
    if (c_report->parsed())
        return detail::run_stage("report", [&] { detail::stage_report(cfg, csv_path); });
    return 2;
}

}  // namespace trrom
