/// @file tr_rom.hpp
/// @brief Time integration of the reduced coefficient system with time
/// relaxation, plus the per-step energy-inequality monitor.
///
/// Implicit backward Euler solves
///   (M/dt + nu A + X) a^{n+1} + c(a^{n+1}) = M a^n / dt + f - nu A[:,0]
/// with relaxation matrix X = chi (M - M F).  The semi-implicit scheme is
/// BDF3 on the linear terms with 3rd-order extrapolated convection.  With the
/// skew convection form and zero lift, each converged BE step satisfies the
/// discrete energy inequality exactly up to the nonlinear residual.

#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

#include "trrom/rom_ops.hpp"

namespace trrom {

enum class Scheme { implicit_be, semi_implicit };
enum class ConvectionForm { skew, standard };

struct TrRomParams {
    int r = 0;
    double nu = 0.0;
    double dt = 0.0;
    double chi = 0.0;
    double delta = 0.0;
    Scheme scheme = Scheme::implicit_be;
    ConvectionForm form = ConvectionForm::skew;
    double tol = 1e-10;
    int max_iters = 50;
    bool use_newton = false;
    int m_steps = 0;
    double t0 = 0.0;

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("TrRomParams: dt must be positive");
        if (!(tol > 0.0)) throw std::invalid_argument("TrRomParams: tol must be positive");
        if (chi < 0.0 || delta < 0.0) throw std::invalid_argument("TrRomParams: chi, delta must be >= 0");
    }
};

struct Trajectory {
    Eigen::MatrixXd coeffs;           // (m_steps+1) x r, row 0 = initial
    std::vector<double> times;
    std::vector<double> energy;       // a^T M a
    std::vector<double> grad_sq;      // a^T A_{1..r} a
    std::vector<double> relax_sq;     // a^T (M - M F) a (relaxation dissipation)
    std::vector<int> iters;
    Scheme scheme = Scheme::implicit_be;
    ConvectionForm form = ConvectionForm::skew;
    bool diverged = false;
    int fail_step = -1;
    std::string fail_msg;

    int steps_completed() const { return static_cast<int>(times.size()) - 1; }
};

struct StabilityReport {
    std::vector<double> energy;          // ||u^n||_M^2 per step
    std::vector<double> grad_accum;      // nu dt sum ||grad u^k||^2
    std::vector<double> relax_accum;     // 2 chi dt sum relax_sq
    std::vector<bool> step_ok;           // per-step inequality flags
    std::vector<double> step_slack;      // rhs - lhs, relative to energy scale
    double bound_C = 0.0;                // C_{s,r}
    bool all_steps_ok = false;
    bool accumulated_ok = false;
    double min_slack = 0.0;
};

/// Owns the factorizations and tensor slices for repeated stepping.
class RomStepper {
  public:
    RomStepper(const TrRomParams& params, const RomOperators& ops, const FilterOp& filt)
        : p_(params), ops_(ops) {
        p_.validate();
        const int r = ops.r;
        if (p_.r != r) throw std::invalid_argument("RomStepper: params.r != ops.r");
        if (filt.F.rows() != r) throw std::invalid_argument("RomStepper: filter dimension mismatch");
        T_.reserve(r);
        const bool skew = p_.form == ConvectionForm::skew;
        for (int i = 1; i <= r; ++i) T_.push_back(ops.tensor_row(i, skew));
        const Eigen::MatrixXd MF = ops.M * filt.F;
        X_ = p_.chi * (ops.M - 0.5 * (MF + MF.transpose()));
        X_ = 0.5 * (X_ + X_.transpose()).eval();
        A11_ = ops.A.block(1, 1, r, r);
        lift_rhs_ = p_.nu * ops.A.block(1, 0, r, 1).col(0);
        L_ = ops.M / p_.dt + p_.nu * A11_ + X_;
        lu_ = L_.partialPivLu();
        L3_ = (11.0 / 6.0) * ops.M / p_.dt + p_.nu * A11_ + X_;
        lu3_ = L3_.partialPivLu();
    }

    const Eigen::MatrixXd& relax_matrix() const { return X_; }
    const Eigen::MatrixXd& grad_matrix() const { return A11_; }

    Eigen::VectorXd convect(const Eigen::VectorXd& a) const {
        const int r = p_.r;
        Eigen::VectorXd ahat(r + 1);
        ahat(0) = 1.0;
        ahat.tail(r) = a;
        Eigen::VectorXd c(r);
        for (int i = 0; i < r; ++i) c(i) = ahat.dot(T_[i] * ahat);
        return c;
    }

    /// One implicit-BE step; returns a^{n+1}, reports iteration count.
    Eigen::VectorXd step_implicit_be(const Eigen::VectorXd& a_n, int* iters_out = nullptr) const {
        const Eigen::VectorXd rhs = ops_.M * a_n / p_.dt + ops_.f - lift_rhs_;
        Eigen::VectorXd a = a_n;
        double damping = 1.0;
        double res_prev = std::numeric_limits<double>::infinity();
        for (int it = 1; it <= p_.max_iters; ++it) {
            const Eigen::VectorXd R = L_ * a + convect(a) - rhs;
            const double res = R.lpNorm<Eigen::Infinity>();
            if (!std::isfinite(res)) throw std::runtime_error("implicit_be: diverged (non-finite residual)");
            if (res <= p_.tol) {
                if (iters_out) *iters_out = it - 1;
                return a;
            }
            if (p_.use_newton) {
                Eigen::MatrixXd J = L_ + convect_jacobian(a);
                a -= J.partialPivLu().solve(R);
            } else {
                if (res > res_prev) damping = 0.5;
                const Eigen::VectorXd a_fp = lu_.solve(rhs - convect(a));
                a += damping * (a_fp - a);
            }
            res_prev = res;
        }
        const Eigen::VectorXd R = L_ * a + convect(a) - rhs;
        throw std::runtime_error("implicit_be: no convergence in " + std::to_string(p_.max_iters) +
                                 " iterations, residual " + std::to_string(R.lpNorm<Eigen::Infinity>()));
    }

    /// One BDF3/EXT3 step given the three latest rows (a_n most recent).
    Eigen::VectorXd step_semi_implicit(const Eigen::VectorXd& a_n, const Eigen::VectorXd& a_nm1,
                                       const Eigen::VectorXd& a_nm2) const {
        const Eigen::VectorXd hist = ops_.M * (3.0 * a_n - 1.5 * a_nm1 + (1.0 / 3.0) * a_nm2) / p_.dt;
        const Eigen::VectorXd cE = 3.0 * convect(a_n) - 3.0 * convect(a_nm1) + convect(a_nm2);
        return lu3_.solve(hist + ops_.f - lift_rhs_ - cE);
    }

  private:
    Eigen::MatrixXd convect_jacobian(const Eigen::VectorXd& a) const {
        const int r = p_.r;
        Eigen::VectorXd ahat(r + 1);
        ahat(0) = 1.0;
        ahat.tail(r) = a;
        Eigen::MatrixXd J(r, r);
        for (int i = 0; i < r; ++i) {
            const Eigen::VectorXd g = (T_[i] + T_[i].transpose()) * ahat;
            J.row(i) = g.tail(r).transpose();
        }
        return J;
    }

    TrRomParams p_;
    RomOperators ops_;
    std::vector<Eigen::MatrixXd> T_;
    Eigen::MatrixXd X_, A11_, L_, L3_;
    Eigen::VectorXd lift_rhs_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_, lu3_;
};

/// Single-step conveniences matching the stepper methods.
inline Eigen::VectorXd step_implicit_be(const Eigen::VectorXd& a_n, const TrRomParams& params,
                                        const RomOperators& ops, const FilterOp& filt) {
    return RomStepper(params, ops, filt).step_implicit_be(a_n);
}
inline Eigen::VectorXd step_semi_implicit(const Eigen::VectorXd& a_n, const Eigen::VectorXd& a_nm1,
                                          const Eigen::VectorXd& a_nm2, const TrRomParams& params,
                                          const RomOperators& ops, const FilterOp& filt) {
    return RomStepper(params, ops, filt).step_semi_implicit(a_n, a_nm1, a_nm2);
}

inline Trajectory run_rom(const Eigen::VectorXd& initial, const TrRomParams& params,
                          const RomOperators& ops, const FilterOp& filt) {
    RomStepper stepper(params, ops, filt);
    const int r = params.r;
    const int n = params.m_steps;

    Trajectory traj;
    traj.scheme = params.scheme;
    traj.form = params.form;
    traj.coeffs.resize(n + 1, r);
    traj.coeffs.row(0) = initial.transpose();

    auto push_diag = [&](const Eigen::VectorXd& a, double t, int its) {
        traj.times.push_back(t);
        traj.energy.push_back(a.dot(ops.M * a));
        traj.grad_sq.push_back(a.dot(stepper.grad_matrix() * a));
        const double chi = params.chi;
        traj.relax_sq.push_back(chi > 0.0 ? a.dot(stepper.relax_matrix() * a) / chi : 0.0);
        traj.iters.push_back(its);
    };
    push_diag(initial, params.t0, 0);

    const double guard = 1e6 * std::max(1.0, initial.norm());
    Eigen::VectorXd a = initial;
    for (int k = 1; k <= n; ++k) {
        try {
            int its = 0;
            Eigen::VectorXd a_next;
            if (params.scheme == Scheme::implicit_be || k < 3) {
                a_next = stepper.step_implicit_be(a, &its);
            } else {
                a_next = stepper.step_semi_implicit(traj.coeffs.row(k - 1).transpose(),
                                                    traj.coeffs.row(k - 2).transpose(),
                                                    traj.coeffs.row(k - 3).transpose());
            }
            if (!a_next.allFinite() || a_next.norm() > guard)
                throw std::runtime_error("coefficient norm exceeded divergence guard");
            a = std::move(a_next);
            traj.coeffs.row(k) = a.transpose();
            push_diag(a, params.t0 + k * params.dt, its);
        } catch (const std::exception& e) {
            traj.diverged = true;
            traj.fail_step = k;
            traj.fail_msg = "step " + std::to_string(k) + ": " + e.what();
            traj.coeffs.conservativeResize(k, r);
            return traj;
        }
    }
    return traj;
}

/// Verifies the per-step and accumulated energy inequalities for an
/// implicit-BE, skew-form trajectory.  u0_norm is ||u^0|| (not squared);
/// f_dual_bound bounds the dual norm of the forcing per step.
inline StabilityReport stability_check(const Trajectory& traj, const TrRomParams& params,
                                       double u0_norm, double f_dual_bound) {
    if (traj.scheme != Scheme::implicit_be || traj.form != ConvectionForm::skew)
        throw std::invalid_argument("stability_check: requires implicit_be scheme with skew convection");
    const int n = traj.steps_completed();
    StabilityReport rep;
    rep.energy = traj.energy;
    rep.bound_C = u0_norm * u0_norm +
                  (params.dt / params.nu) * f_dual_bound * f_dual_bound * n;
    rep.grad_accum.resize(n + 1);
    rep.relax_accum.resize(n + 1);
    rep.grad_accum[0] = 0.0;
    rep.relax_accum[0] = 0.0;
    rep.step_ok.assign(n + 1, true);
    rep.step_slack.assign(n + 1, 0.0);
    rep.min_slack = std::numeric_limits<double>::infinity();
    const double step_rhs = (params.dt / params.nu) * f_dual_bound * f_dual_bound;
    bool all_ok = true;
    for (int k = 1; k <= n; ++k) {
        rep.grad_accum[k] = rep.grad_accum[k - 1] + params.nu * params.dt * traj.grad_sq[k];
        rep.relax_accum[k] = rep.relax_accum[k - 1] + 2.0 * params.chi * params.dt * traj.relax_sq[k];
        const double lhs = traj.energy[k] - traj.energy[k - 1] +
                           params.nu * params.dt * traj.grad_sq[k] +
                           2.0 * params.chi * params.dt * traj.relax_sq[k];
        const double scale = std::max({1.0, traj.energy[k], traj.energy[k - 1]});
        const double slack = (step_rhs - lhs) / scale;
        rep.step_slack[k] = slack;
        rep.min_slack = std::min(rep.min_slack, slack);
        if (slack < -1e-12) {
            rep.step_ok[k] = false;
            all_ok = false;
        }
    }
    rep.all_steps_ok = all_ok;
    const double accum = traj.energy[n] + rep.grad_accum[n] + rep.relax_accum[n];
    rep.accumulated_ok = accum <= rep.bound_C * (1.0 + 1e-12) + 1e-12;
    return rep;
}

}  // namespace trrom
