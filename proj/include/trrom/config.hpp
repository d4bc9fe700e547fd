/// @file config.hpp
/// @brief JSON run configuration with strict schema validation (unknown keys
/// rejected) mapping onto the pipeline stage parameter structs.

#pragma once

#include <json.hpp>

#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "trrom/fom.hpp"
#include "trrom/study.hpp"
#include "trrom/tr_rom.hpp"

namespace trrom {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RomConfig {
    int r = 1;
    double chi = 0.0;
    double delta = 0.0;
    double dt = 1e-2;
    int m_steps = 0;
    std::string initial = "project";  // "project" or "zero"
    Scheme scheme = Scheme::implicit_be;
    ConvectionForm form = ConvectionForm::skew;
    double tol = 1e-10;
    int max_iters = 50;
    bool use_newton = false;
};

struct StudyConfig {
    Metric metric = Metric::eps_h10;
    double tolerance = 0.05;
    std::vector<double> anchor_deltas;
    double C_sr = 1.0;
    // optional closed-form inputs for the term-magnitude table
    double N = 0.0, k = 1.0, s = 0.0, chi = 0.0, delta = 0.0;
};

struct Paths {
    std::string snapshots = "snapshots.trrm";
    std::string basis = "basis.trrm";
    std::string trajectory = "trajectory.trrm";
    std::string results = "results.csv";
};

struct RunConfig {
    FomConfig fom;
    int pod_R = 10;
    RomConfig rom;
    SweepSpec sweep;
    StudyConfig study;
    Paths paths;
    uint64_t seed = 0;
};

namespace detail {

using json = nlohmann::json;

inline void check_keys(const json& j, const std::string& section,
                       const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError("section '" + section + "' must be an object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + key + "' in section '" + section + "'");
}

template <typename T>
void get_to(const json& j, const char* key, T& out) {
    if (j.contains(key)) j.at(key).get_to(out);
}

inline Scheme parse_scheme(const std::string& s) {
    if (s == "implicit_be") return Scheme::implicit_be;
    if (s == "semi_implicit") return Scheme::semi_implicit;
    throw ConfigError("unknown scheme '" + s + "'");
}
inline ConvectionForm parse_form(const std::string& s) {
    if (s == "skew") return ConvectionForm::skew;
    if (s == "standard") return ConvectionForm::standard;
    throw ConfigError("unknown convection form '" + s + "'");
}
inline Metric parse_metric(const std::string& s) {
    if (s == "eps_l2") return Metric::eps_l2;
    if (s == "eps_h10") return Metric::eps_h10;
    if (s == "eps_avg_h10") return Metric::eps_avg_h10;
    throw ConfigError("unknown metric '" + s + "'");
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
    using detail::check_keys;
    using detail::get_to;
    check_keys(j, "<root>", {"fom", "pod", "rom", "sweep", "study", "paths", "seed"});
    RunConfig cfg;
    if (j.contains("fom")) {
        const auto& f = j.at("fom");
        check_keys(f, "fom", {"case", "nx", "ny", "lx", "ly", "nu", "dt", "t_start", "t_end",
                              "dt_sample", "regularized_lid", "poisson_tol", "tg_harmonics"});
        if (f.contains("case")) {
            const std::string c = f.at("case");
            if (c == "taylor_green") cfg.fom.flow_case = FlowCase::taylor_green;
            else if (c == "lid_cavity") cfg.fom.flow_case = FlowCase::lid_cavity;
            else throw ConfigError("unknown case '" + c + "'");
        }
        get_to(f, "nx", cfg.fom.nx);
        get_to(f, "ny", cfg.fom.ny);
        get_to(f, "lx", cfg.fom.lx);
        get_to(f, "ly", cfg.fom.ly);
        get_to(f, "nu", cfg.fom.nu);
        get_to(f, "dt", cfg.fom.dt);
        get_to(f, "t_start", cfg.fom.t_start);
        get_to(f, "t_end", cfg.fom.t_end);
        get_to(f, "dt_sample", cfg.fom.dt_sample);
        get_to(f, "regularized_lid", cfg.fom.regularized_lid);
        get_to(f, "poisson_tol", cfg.fom.poisson_tol);
        get_to(f, "tg_harmonics", cfg.fom.tg_harmonics);
    }
    if (j.contains("pod")) {
        const auto& p = j.at("pod");
        check_keys(p, "pod", {"R"});
        get_to(p, "R", cfg.pod_R);
    }
    if (j.contains("rom")) {
        const auto& r = j.at("rom");
        check_keys(r, "rom", {"r", "chi", "delta", "dt", "m_steps", "initial", "scheme", "form",
                              "tol", "max_iters", "use_newton"});
        get_to(r, "r", cfg.rom.r);
        get_to(r, "chi", cfg.rom.chi);
        get_to(r, "delta", cfg.rom.delta);
        get_to(r, "dt", cfg.rom.dt);
        get_to(r, "m_steps", cfg.rom.m_steps);
        get_to(r, "initial", cfg.rom.initial);
        if (cfg.rom.initial != "project" && cfg.rom.initial != "zero")
            throw ConfigError("rom.initial must be 'project' or 'zero'");
        if (r.contains("scheme")) cfg.rom.scheme = detail::parse_scheme(r.at("scheme"));
        if (r.contains("form")) cfg.rom.form = detail::parse_form(r.at("form"));
        get_to(r, "tol", cfg.rom.tol);
        get_to(r, "max_iters", cfg.rom.max_iters);
        get_to(r, "use_newton", cfg.rom.use_newton);
    }
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        check_keys(s, "sweep", {"rs", "deltas", "chis", "substeps", "scheme", "form", "tol",
                                "max_iters", "use_newton", "record_timing"});
        get_to(s, "rs", cfg.sweep.rs);
        get_to(s, "deltas", cfg.sweep.deltas);
        get_to(s, "chis", cfg.sweep.chis);
        get_to(s, "substeps", cfg.sweep.substeps);
        if (s.contains("scheme")) cfg.sweep.scheme = detail::parse_scheme(s.at("scheme"));
        if (s.contains("form")) cfg.sweep.form = detail::parse_form(s.at("form"));
        get_to(s, "tol", cfg.sweep.tol);
        get_to(s, "max_iters", cfg.sweep.max_iters);
        get_to(s, "use_newton", cfg.sweep.use_newton);
        get_to(s, "record_timing", cfg.sweep.record_timing);
    }
    if (j.contains("study")) {
        const auto& s = j.at("study");
        check_keys(s, "study", {"metric", "tolerance", "anchor_deltas", "C_sr", "N", "k", "s",
                                "chi", "delta"});
        if (s.contains("metric")) cfg.study.metric = detail::parse_metric(s.at("metric"));
        get_to(s, "tolerance", cfg.study.tolerance);
        get_to(s, "anchor_deltas", cfg.study.anchor_deltas);
        get_to(s, "C_sr", cfg.study.C_sr);
        get_to(s, "N", cfg.study.N);
        get_to(s, "k", cfg.study.k);
        get_to(s, "s", cfg.study.s);
        get_to(s, "chi", cfg.study.chi);
        get_to(s, "delta", cfg.study.delta);
    }
    if (j.contains("paths")) {
        const auto& p = j.at("paths");
        check_keys(p, "paths", {"snapshots", "basis", "trajectory", "results"});
        get_to(p, "snapshots", cfg.paths.snapshots);
        get_to(p, "basis", cfg.paths.basis);
        get_to(p, "trajectory", cfg.paths.trajectory);
        get_to(p, "results", cfg.paths.results);
    }
    get_to(j, "seed", cfg.seed);
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

}  // namespace trrom
