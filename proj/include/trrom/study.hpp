/// @file study.hpp
/// @brief Experiment engine: error metrics against projected snapshots,
/// closed-form chi scalings, energy-based filter radius, chi_effective
/// sweeps with extrapolation, and log-log rate regression.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "trrom/tr_rom.hpp"

namespace trrom {

// ---------------------------------------------------------------- error metrics

/// Coefficient-space quadrature for the error metrics: Gram matrices of the
/// first R_ref modes and the projection coefficients of every snapshot.
struct ErrorWeights {
    int R_ref = 0;
    Eigen::MatrixXd M_R;  // L2 Gram (near identity)
    Eigen::MatrixXd S_R;  // H10 Gram
    Eigen::MatrixXd proj; // (M+1) x R_ref snapshot projection coefficients
};

inline ErrorWeights build_error_weights(const SnapshotSet& snaps, const PodBasis& basis, int R_ref) {
    if (R_ref > basis.R) throw std::invalid_argument("build_error_weights: R_ref exceeds basis rank");
    ErrorWeights w;
    w.R_ref = R_ref;
    w.M_R.resize(R_ref, R_ref);
    w.S_R.resize(R_ref, R_ref);
    for (int i = 0; i < R_ref; ++i)
        for (int j = i; j < R_ref; ++j) {
            const double mv = l2_inner(basis.modes[i], basis.modes[j]);
            const double sv = h10_inner(basis.modes[i], basis.modes[j]);
            w.M_R(i, j) = mv; w.M_R(j, i) = mv;
            w.S_R(i, j) = sv; w.S_R(j, i) = sv;
        }
    w.proj.resize(snaps.count(), R_ref);
    for (int k = 0; k < snaps.count(); ++k) {
        const std::vector<double> a = project_P_r(snaps.fields[k], basis, R_ref);
        for (int j = 0; j < R_ref; ++j) w.proj(k, j) = a[j];
    }
    return w;
}

namespace detail {

/// Maps each snapshot time to a trajectory row index; throws on misalignment.
inline std::vector<int> align_times(const Trajectory& traj, const std::vector<double>& snap_times) {
    std::vector<int> rows(snap_times.size());
    size_t pos = 0;
    const double dt = traj.times.size() > 1 ? traj.times[1] - traj.times[0] : 1.0;
    for (size_t k = 0; k < snap_times.size(); ++k) {
        while (pos < traj.times.size() && traj.times[pos] < snap_times[k] - 1e-9 * dt) ++pos;
        if (pos >= traj.times.size() || std::abs(traj.times[pos] - snap_times[k]) > 1e-9 * std::max(dt, 1.0))
            throw std::invalid_argument("error metric: trajectory and snapshot time grids misaligned");
        rows[k] = static_cast<int>(pos);
    }
    return rows;
}

inline double mean_sq_error(const Trajectory& traj, const std::vector<double>& snap_times,
                            const ErrorWeights& w, const Eigen::MatrixXd& G) {
    const std::vector<int> rows = align_times(traj, snap_times);
    const int R = w.R_ref;
    const int r = static_cast<int>(traj.coeffs.cols());
    if (r > R) throw std::invalid_argument("error metric: trajectory dimension exceeds R_ref");
    double acc = 0.0;
    Eigen::VectorXd d(R);
    for (size_t k = 0; k < rows.size(); ++k) {
        d = w.proj.row(k).transpose();
        d.head(r) -= traj.coeffs.row(rows[k]).transpose();
        acc += d.dot(G * d);
    }
    return acc / static_cast<double>(rows.size());
}

}  // namespace detail

/// Mean squared L2 error (1/(M+1)) sum ||P_R u^k - u_r^k||^2.
inline double error_l2(const Trajectory& traj, const std::vector<double>& snap_times,
                       const ErrorWeights& w) {
    return detail::mean_sq_error(traj, snap_times, w, w.M_R);
}
inline double error_l2(const Trajectory& traj, const SnapshotSet& snaps, const PodBasis& basis,
                       int R_ref) {
    return error_l2(traj, snaps.times, build_error_weights(snaps, basis, R_ref));
}

/// Mean squared H10 error with gradient weighting.
inline double error_h10(const Trajectory& traj, const std::vector<double>& snap_times,
                        const ErrorWeights& w) {
    return detail::mean_sq_error(traj, snap_times, w, w.S_R);
}
inline double error_h10(const Trajectory& traj, const SnapshotSet& snaps, const PodBasis& basis,
                        int R_ref) {
    return error_h10(traj, snaps.times, build_error_weights(snaps, basis, R_ref));
}

/// Squared H10 error of the time-mean fields.
inline double error_avg_h10(const Trajectory& traj, const std::vector<double>& snap_times,
                            const ErrorWeights& w) {
    const std::vector<int> rows = detail::align_times(traj, snap_times);
    const int R = w.R_ref;
    const int r = static_cast<int>(traj.coeffs.cols());
    if (r > R) throw std::invalid_argument("error metric: trajectory dimension exceeds R_ref");
    Eigen::VectorXd d = Eigen::VectorXd::Zero(R);
    for (size_t k = 0; k < rows.size(); ++k) {
        d += w.proj.row(k).transpose();
        d.head(r) -= traj.coeffs.row(rows[k]).transpose();
    }
    d /= static_cast<double>(rows.size());
    return d.dot(w.S_R * d);
}
inline double error_avg_h10(const Trajectory& traj, const SnapshotSet& snaps, const PodBasis& basis,
                            int R_ref) {
    return error_avg_h10(traj, snaps.times, build_error_weights(snaps, basis, R_ref));
}

// ---------------------------------------------------------------- chi scalings

struct ChiInputs {
    double nu = 1.0;
    double dt = 1.0;
    double N = 1.0;        // FOM resolution proxy
    double k = 1.0, s = 0.0;  // regularity indices
    double delta = 0.0;
    double lambda_l2 = 0.0;   // Lambda_L2(r)
    double lambda_h10 = 0.0;  // Lambda_H10(r)
    double s_r_norm = 0.0;    // ||S_r||_2
    double C_sr = 0.0;

    void validate() const {
        if (!(nu > 0.0 && dt > 0.0 && N > 0.0))
            throw std::invalid_argument("ChiInputs: nu, dt, N must be positive");
        if (delta < 0.0 || lambda_l2 < 0.0 || lambda_h10 < 0.0 || s_r_norm < 0.0 || C_sr < 0.0)
            throw std::invalid_argument("ChiInputs: negative input");
    }
};

struct TermTable {
    std::vector<std::pair<std::string, double>> terms;
    double operator[](const std::string& name) const {
        for (const auto& [n, v] : terms)
            if (n == name) return v;
        throw std::out_of_range("TermTable: unknown term " + name);
    }
};

/// The named error-bound terms, one column each.
inline TermTable term_magnitudes(const ChiInputs& in, double chi) {
    in.validate();
    const double N = in.N, dt = in.dt;
    TermTable t;
    t.terms = {
        {"N^(-2s-2)", std::pow(N, -2.0 * in.s - 2.0)},
        {"dt^2", dt * dt},
        {"chi^2*delta^4", chi * chi * std::pow(in.delta, 4)},
        {"chi^2*N^(-2k-2)", chi * chi * std::pow(N, -2.0 * in.k - 2.0)},
        {"chi^2*Lambda_L2", chi * chi * in.lambda_l2},
        {"sqrt(Lambda_L2*Lambda_H10)", std::sqrt(in.lambda_l2 * in.lambda_h10)},
        {"N^(-2k)", std::pow(N, -2.0 * in.k)},
        {"S_r*N^(-2k-2)", in.s_r_norm * std::pow(N, -2.0 * in.k - 2.0)},
        {"Lambda_H10", in.lambda_h10},
    };
    return t;
}

/// Consistency-term aggregate; the printed N^(k-1) factor of the source
/// formula is a typo for N^(-k-1) and is implemented as the latter
/// (toggle audit_variant to evaluate the printed form).
inline double term_A(const ChiInputs& in, bool audit_variant = false) {
    in.validate();
    const double N = in.N, dt = in.dt, k = in.k;
    const double Sr = in.s_r_norm;
    const double sqrt_ll2 = std::sqrt(in.lambda_l2), sqrt_lh10 = std::sqrt(in.lambda_h10);
    const double Nk = std::pow(N, -k);
    const double Nk1 = std::pow(N, -k - 1.0);
    const double h10_factor = (audit_variant ? std::pow(N, k - 1.0) : Nk1) + dt * dt * dt;
    return std::pow(N, -2.0 * k - 1.0) + dt * dt * dt * Nk +
           std::sqrt(Sr) * Nk1 * dt * dt * dt +
           std::sqrt(1.0 + Sr) * Nk1 * dt * dt * dt +
           std::sqrt(1.0 + Sr) * std::pow(dt, 6) +
           Nk * sqrt_ll2 +
           std::sqrt(Sr) * std::pow(N, -2.0 * k - 2.0) +
           h10_factor * sqrt_lh10 +
           std::sqrt(Sr) * Nk1 * sqrt_ll2 +
           std::sqrt(1.0 + Sr) * dt * dt * dt * sqrt_ll2;
}

namespace detail {

inline double group_L(const ChiInputs& in) {
    return std::pow(in.N, -2.0 * in.k - 2.0) + std::pow(in.dt, 6) + in.lambda_l2;
}
inline double group_H(const ChiInputs& in) {
    return std::pow(in.N, -2.0 * in.k) + in.s_r_norm * std::pow(in.N, -2.0 * in.k - 2.0) +
           (1.0 + in.s_r_norm) * std::pow(in.dt, 6) + in.lambda_h10;
}
inline double chi_numerator(const ChiInputs& in) {
    const double inv_nu = 1.0 / in.nu;
    return inv_nu * (in.dt * in.dt + std::pow(in.N, -2.0 * in.s - 2.0) + term_A(in) +
                     std::sqrt(in.lambda_l2 * in.lambda_h10)) +
           (in.nu + inv_nu * in.C_sr) * group_H(in);
}
inline double chi_denominator(const ChiInputs& in) {
    return (1.0 / in.nu) * (std::pow(in.delta, 4) + group_L(in) + in.delta * in.delta * group_H(in));
}

}  // namespace detail

/// The bound as a function of chi; the closed-form chi minimizes P/chi + Q*chi.
inline double chi_objective_F(const ChiInputs& in, double chi) {
    if (!(chi > 0.0)) throw std::invalid_argument("chi_objective_F: chi must be positive");
    return detail::chi_numerator(in) / chi + detail::chi_denominator(in) * chi;
}

inline double chi_theory_full(const ChiInputs& in) {
    in.validate();
    const double den = detail::chi_denominator(in);
    if (!(den > 0.0)) throw std::invalid_argument("chi_theory_full: zero denominator");
    return std::sqrt(detail::chi_numerator(in) / den);
}

inline double chi_theory_simplified(const ChiInputs& in) {
    in.validate();
    const double den = in.lambda_l2 + in.delta * in.delta * in.lambda_h10 + std::pow(in.delta, 4);
    if (!(den > 0.0)) throw std::invalid_argument("chi_theory_simplified: zero denominator");
    return std::sqrt((std::sqrt(in.lambda_l2 * in.lambda_h10) + in.C_sr * in.lambda_h10) / den);
}

inline double chi_theory_r(const ChiInputs& in) {
    in.validate();
    const double den = in.lambda_l2 + in.delta * in.delta * in.lambda_h10 + std::pow(in.delta, 4);
    if (!(den > 0.0)) throw std::invalid_argument("chi_theory_r: zero denominator");
    return std::sqrt(in.lambda_h10 / den);
}

/// Energy-based filter radius interpolating between mesh size h and length L.
inline double delta_energy(int r, const std::vector<double>& eigenvalues, double h, double L) {
    if (eigenvalues.empty()) throw std::invalid_argument("delta_energy: empty spectrum");
    if (!(h > 0.0 && L > 0.0)) throw std::invalid_argument("delta_energy: h, L must be positive");
    double total = 0.0, partial = 0.0;
    for (size_t i = 0; i < eigenvalues.size(); ++i) {
        total += eigenvalues[i];
        if (static_cast<int>(i) < r) partial += eigenvalues[i];
    }
    const double Lam = total > 0.0 ? partial / total : 0.0;
    return std::pow(Lam * std::pow(h, 2.0 / 3.0) + (1.0 - Lam) * std::pow(L, 2.0 / 3.0), 1.5);
}

// ---------------------------------------------------------------- sweep records

struct StudyRecord {
    int r = 0;
    double delta = 0.0;
    double chi = 0.0;
    double eps_l2 = 0.0;
    double eps_h10 = 0.0;
    double eps_avg_h10 = 0.0;
    double lambda_l2_tail = 0.0;
    double lambda_h10_tail = 0.0;
    double s_r_norm = 0.0;
    std::string scheme = "implicit_be";
    std::string status = "ok";
    double wall_time_s = 0.0;
};

inline bool record_order(const StudyRecord& a, const StudyRecord& b) {
    if (a.r != b.r) return a.r < b.r;
    if (a.delta != b.delta) return a.delta < b.delta;
    return a.chi < b.chi;
}

enum class Metric { eps_l2, eps_h10, eps_avg_h10 };

inline double metric_value(const StudyRecord& rec, Metric m) {
    switch (m) {
        case Metric::eps_l2: return rec.eps_l2;
        case Metric::eps_h10: return rec.eps_h10;
        default: return rec.eps_avg_h10;
    }
}

/// Largest chi whose metric is within (1+tol) of the best; ties in the argmin
/// resolve toward the larger chi.
inline double find_chi_effective(const std::vector<StudyRecord>& records, Metric metric,
                                 double tol = 0.05) {
    double best = std::numeric_limits<double>::infinity();
    bool any = false;
    for (const auto& rec : records) {
        if (rec.status != "ok") continue;
        any = true;
        best = std::min(best, metric_value(rec, metric));
    }
    if (!any) throw std::runtime_error("find_chi_effective: all runs failed");
    const double thresh = best * (1.0 + tol);
    double chi_eff = -std::numeric_limits<double>::infinity();
    for (const auto& rec : records)
        if (rec.status == "ok" && metric_value(rec, metric) <= thresh)
            chi_eff = std::max(chi_eff, rec.chi);
    return chi_eff;
}

struct ChiAnchor {
    double chi_eff = 0.0;
    double chi_theory = 0.0;
};

struct Extrapolation {
    double rho_bar = 0.0;
    std::vector<double> predicted;  // rho_bar * chi_theory(target)
};

inline Extrapolation extrapolate_chi(const std::vector<ChiAnchor>& anchors,
                                     const std::vector<double>& target_chi_theory) {
    if (anchors.empty()) throw std::invalid_argument("extrapolate_chi: no anchors");
    double acc = 0.0;
    for (const auto& a : anchors) {
        if (!(a.chi_theory > 0.0)) throw std::invalid_argument("extrapolate_chi: zero chi_theory anchor");
        acc += a.chi_eff / a.chi_theory;
    }
    Extrapolation out;
    out.rho_bar = acc / static_cast<double>(anchors.size());
    out.predicted.reserve(target_chi_theory.size());
    for (double ct : target_chi_theory) out.predicted.push_back(out.rho_bar * ct);
    return out;
}

// ---------------------------------------------------------------- regression

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;  // of log y vs log x
    double r_squared = 0.0;
};

inline RateFit fit_rate(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("fit_rate: need >= 2 matching points");
    const size_t n = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        if (!(xs[i] > 0.0 && ys[i] > 0.0)) throw std::invalid_argument("fit_rate: non-positive data");
        const double lx = std::log(xs[i]), ly = std::log(ys[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly; syy += ly * ly;
    }
    const double dn = static_cast<double>(n);
    const double vxx = sxx - sx * sx / dn;
    const double vxy = sxy - sx * sy / dn;
    const double vyy = syy - sy * sy / dn;
    RateFit f;
    f.slope = vxy / vxx;
    f.intercept = (sy - f.slope * sx) / dn;
    f.r_squared = vyy > 0.0 ? (vxy * vxy) / (vxx * vyy) : 1.0;
    return f;
}

struct PiecewiseFit {
    int break_index = 0;  // first index of the right segment
    double slope_left = 0.0, slope_right = 0.0;
    double sse = 0.0;
};

/// Two-segment log-log fit minimizing total squared residual over breakpoints.
inline PiecewiseFit fit_two_segment(const std::vector<double>& xs, const std::vector<double>& ys) {
    const int n = static_cast<int>(xs.size());
    if (n < 4) throw std::invalid_argument("fit_two_segment: need >= 4 points");
    auto sse_of = [&](int lo, int hi, double* slope) {
        std::vector<double> x(xs.begin() + lo, xs.begin() + hi);
        std::vector<double> y(ys.begin() + lo, ys.begin() + hi);
        const RateFit f = fit_rate(x, y);
        if (slope) *slope = f.slope;
        double sse = 0.0;
        for (size_t i = 0; i < x.size(); ++i) {
            const double resid = std::log(y[i]) - (f.intercept + f.slope * std::log(x[i]));
            sse += resid * resid;
        }
        return sse;
    };
    PiecewiseFit best;
    best.sse = std::numeric_limits<double>::infinity();
    for (int b = 2; b <= n - 2; ++b) {
        double sl = 0.0, sr = 0.0;
        const double sse = sse_of(0, b, &sl) + sse_of(b, n, &sr);
        if (sse < best.sse) best = {b, sl, sr, sse};
    }
    return best;
}

// ---------------------------------------------------------------- sweep runner

struct SweepSpec {
    std::vector<int> rs;
    std::vector<double> deltas;
    std::vector<double> chis;
    Scheme scheme = Scheme::implicit_be;
    ConvectionForm form = ConvectionForm::skew;
    int substeps = 1;       // ROM steps per snapshot interval
    double tol = 1e-10;
    int max_iters = 50;
    bool use_newton = false;
    bool record_timing = false;  // off by default so CSVs are byte-reproducible
};

/// One ROM run per (r, delta, chi) grid point against the snapshot set;
/// deterministic ordering, per-point failures captured in the record status.
inline std::vector<StudyRecord> run_sweep(const SnapshotSet& snaps, const PodBasis& basis,
                                          double nu, const SweepSpec& spec) {
    std::vector<StudyRecord> out;
    if (spec.rs.empty() || spec.deltas.empty() || spec.chis.empty()) return out;

    std::vector<int> rs = spec.rs;
    std::vector<double> deltas = spec.deltas, chis = spec.chis;
    std::sort(rs.begin(), rs.end());
    std::sort(deltas.begin(), deltas.end());
    std::sort(chis.begin(), chis.end());

    const int r_max = rs.back();
    const RomOperators ops_full = assemble_operators(basis, r_max, nu);
    const TailSums ts = tails(basis);
    const ErrorWeights weights = build_error_weights(snaps, basis, basis.R);

    const double dt_snap = snaps.times[1] - snaps.times[0];
    const double dt = dt_snap / spec.substeps;
    const int m_steps = (snaps.count() - 1) * spec.substeps;

    for (int r : rs) {
        const RomOperators ops = truncate(ops_full, r);
        const std::vector<double> a0v = project_P_r(snaps.fields[0], basis, r);
        const Eigen::VectorXd a0 = Eigen::Map<const Eigen::VectorXd>(a0v.data(), r);
        for (double delta : deltas) {
            const FilterOp filt = build_filter(ops, delta);
            for (double chi : chis) {
                TrRomParams p;
                p.r = r; p.nu = nu; p.dt = dt; p.chi = chi; p.delta = delta;
                p.scheme = spec.scheme; p.form = spec.form;
                p.tol = spec.tol; p.max_iters = spec.max_iters; p.use_newton = spec.use_newton;
                p.m_steps = m_steps; p.t0 = snaps.times[0];

                StudyRecord rec;
                rec.r = r; rec.delta = delta; rec.chi = chi;
                rec.lambda_l2_tail = ts.lambda_l2[r];
                rec.lambda_h10_tail = ts.lambda_h10[r];
                rec.s_r_norm = ts.s_r_norm[r];
                rec.scheme = spec.scheme == Scheme::implicit_be ? "implicit_be" : "semi_implicit";

                const auto t_begin = std::chrono::steady_clock::now();
                const Trajectory traj = run_rom(a0, p, ops, filt);
                if (traj.diverged) {
                    rec.status = "diverged";
                } else {
                    rec.eps_l2 = error_l2(traj, snaps.times, weights);
                    rec.eps_h10 = error_h10(traj, snaps.times, weights);
                    rec.eps_avg_h10 = error_avg_h10(traj, snaps.times, weights);
                }
                if (spec.record_timing) {
                    const auto t_end = std::chrono::steady_clock::now();
                    rec.wall_time_s = std::chrono::duration<double>(t_end - t_begin).count();
                }
                out.push_back(std::move(rec));
            }
        }
    }
    std::sort(out.begin(), out.end(), record_order);
    return out;
}

}  // namespace trrom
