#include <catch_amalgamated.hpp>

#include "trrom/tr_rom.hpp"

using namespace trrom;

namespace {

/// Diagonal linear operators with M = I, no advection, no lift.
RomOperators diag_ops(std::vector<double> diag, double nu) {
    const int r = static_cast<int>(diag.size());
    RomOperators ops;
    ops.r = r;
    ops.nu = nu;
    ops.M = Eigen::MatrixXd::Identity(r, r);
    ops.A = Eigen::MatrixXd::Zero(r + 1, r + 1);
    for (int j = 0; j < r; ++j) ops.A(j + 1, j + 1) = diag[j];
    ops.Braw.assign(r + 1, Eigen::MatrixXd::Zero(r + 1, r + 1));
    ops.f = Eigen::VectorXd::Zero(r);
    return ops;
}

TrRomParams base_params(int r, double nu, double dt) {
    TrRomParams p;
    p.r = r;
    p.nu = nu;
    p.dt = dt;
    return p;
}

}  // namespace

TEST_CASE("implicit BE scalar closed form") {
    // r=1, A=1, nu=1, chi=1, delta=1, dt=1: F=1/2, L = 1 + 1 + 1/2 = 2.5
    const RomOperators ops = diag_ops({1.0}, 1.0);
    TrRomParams p = base_params(1, 1.0, 1.0);
    p.chi = 1.0;
    p.delta = 1.0;
    const FilterOp filt = build_filter(ops, 1.0);
    Eigen::VectorXd a(1);
    a << 1.0;
    const Eigen::VectorXd next = step_implicit_be(a, p, ops, filt);
    CHECK_THAT(next(0), Catch::Matchers::WithinRel(0.4, 1e-12));
}

TEST_CASE("chi = 0 with no advection is a backward Euler diffusion step") {
    const RomOperators ops = diag_ops({1.0, 3.0, 7.0}, 0.5);
    TrRomParams p = base_params(3, 0.5, 0.1);
    const FilterOp filt = build_filter(ops, 0.2);
    Eigen::VectorXd a(3);
    a << 1.0, -2.0, 0.5;
    const Eigen::VectorXd next = step_implicit_be(a, p, ops, filt);
    for (int j = 0; j < 3; ++j)
        CHECK_THAT(next(j), Catch::Matchers::WithinRel(a(j) / (1.0 + 0.1 * 0.5 * ops.A(j + 1, j + 1)), 1e-12));
}

TEST_CASE("delta = 0 makes the relaxation term vanish for any chi") {
    const RomOperators ops = diag_ops({1.0, 2.0}, 0.3);
    Eigen::VectorXd a0(2);
    a0 << 0.7, -0.3;
    auto run = [&](double chi, double delta) {
        TrRomParams p = base_params(2, 0.3, 0.05);
        p.chi = chi;
        p.delta = delta;
        p.m_steps = 40;
        return run_rom(a0, p, ops, build_filter(ops, delta));
    };
    const Trajectory t1 = run(5.0, 0.0);
    const Trajectory t2 = run(0.0, 0.0);
    CHECK((t1.coeffs - t2.coeffs).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("semi-implicit scheme consistency") {
    SECTION("linear problem reaches the implicit-BE steady state") {
        RomOperators ops = diag_ops({2.0, 5.0}, 1.0);
        ops.f << 1.0, 2.0;  // steady state a_j = f_j / (nu A_jj)
        const FilterOp filt = build_filter(ops, 0.1);
        Eigen::VectorXd a0 = Eigen::VectorXd::Zero(2);
        TrRomParams p = base_params(2, 1.0, 0.1);
        p.m_steps = 400;
        p.scheme = Scheme::semi_implicit;
        const Trajectory traj = run_rom(a0, p, ops, filt);
        REQUIRE_FALSE(traj.diverged);
        CHECK_THAT(traj.coeffs(400, 0), Catch::Matchers::WithinAbs(0.5, 1e-8));
        CHECK_THAT(traj.coeffs(400, 1), Catch::Matchers::WithinAbs(0.4, 1e-8));
    }
    SECTION("constant-in-time exact solution is preserved per step") {
        // choose f so that a* = (0.8, -0.6) is a fixed point of the full
        // nonlinear system, advection included
        const int r = 2;
        RomOperators ops = diag_ops({1.5, 4.0}, 0.7);
        ops.Braw[1](1, 2) = 0.3;
        ops.Braw[2](2, 1) = -0.2;
        ops.Braw[1](2, 2) = 0.1;
        const double delta = 0.25, chi = 0.8;
        const FilterOp filt = build_filter(ops, delta);
        Eigen::VectorXd astar(r);
        astar << 0.8, -0.6;
        TrRomParams p = base_params(r, 0.7, 0.05);
        p.chi = chi;
        p.delta = delta;
        p.tol = 1e-13;
        RomStepper probe(p, ops, filt);
        Eigen::VectorXd ahat(r + 1);
        ahat << 1.0, astar(0), astar(1);
        ops.f = p.nu * ops.A.block(1, 1, r, r) * astar + chi * (ops.M - ops.M * filt.F) * astar +
                probe.convect(astar);
        RomStepper stepper(p, ops, filt);
        Eigen::VectorXd a = astar;
        for (int k = 0; k < 5; ++k) {
            a = stepper.step_implicit_be(a);
            CHECK((a - astar).cwiseAbs().maxCoeff() <= 1e-10);
        }
        const Eigen::VectorXd a3 = stepper.step_semi_implicit(astar, astar, astar);
        CHECK((a3 - astar).cwiseAbs().maxCoeff() <= 1e-10);
    }
    SECTION("order 3 on a smooth linear problem") {
        // da/dt = -lambda a with lambda = nu A + chi (I - F); exact history fed
        const RomOperators ops = diag_ops({2.0}, 1.0);
        const double delta = 0.5, chi = 1.0;
        const FilterOp filt = build_filter(ops, delta);
        const double lambda = 1.0 * 2.0 + chi * filt.I_minus_F(0, 0);
        const double T = 1.0;
        std::vector<double> dts = {0.02, 0.01, 0.005};
        std::vector<double> errs;
        for (double dt : dts) {
            TrRomParams p = base_params(1, 1.0, dt);
            p.chi = chi;
            p.delta = delta;
            RomStepper stepper(p, ops, filt);
            const int n = static_cast<int>(std::lround(T / dt));
            auto exact = [&](int m) {
                Eigen::VectorXd v(1);
                v << std::exp(-lambda * m * dt);
                return v;
            };
            // exact bootstrap, then genuine three-term recursion
            Eigen::VectorXd am2 = exact(0), am1 = exact(1), a = exact(2);
            for (int k = 3; k <= n; ++k) {
                Eigen::VectorXd next = stepper.step_semi_implicit(a, am1, am2);
                am2 = am1;
                am1 = a;
                a = next;
            }
            errs.push_back(std::abs(a(0) - std::exp(-lambda * T)));
        }
        const double slope = std::log2(errs[0] / errs[2]) / 2.0;
        CHECK(slope > 2.7);
        CHECK(slope < 3.3);
    }
}

TEST_CASE("run_rom bookkeeping") {
    const RomOperators ops = diag_ops({1.0, 2.0}, 1.0);
    const FilterOp filt = build_filter(ops, 0.1);
    SECTION("m_steps = 0 returns only the initial row") {
        Eigen::VectorXd a0(2);
        a0 << 0.1, 0.2;
        TrRomParams p = base_params(2, 1.0, 0.1);
        p.m_steps = 0;
        const Trajectory traj = run_rom(a0, p, ops, filt);
        CHECK(traj.coeffs.rows() == 1);
        CHECK(traj.times.size() == 1);
        CHECK(traj.coeffs(0, 1) == 0.2);
    }
    SECTION("zero initial data, forcing, and lift stay identically zero") {
        TrRomParams p = base_params(2, 1.0, 0.1);
        p.m_steps = 20;
        const Trajectory traj = run_rom(Eigen::VectorXd::Zero(2), p, ops, filt);
        CHECK(traj.coeffs.cwiseAbs().maxCoeff() == 0.0);
    }
}

namespace {

/// Zero-lift Taylor-Green POD setup shared by the tracking and stability tests.
struct TgRom {
    SnapshotSet snaps;
    PodBasis basis;
    RomOperators ops;

    explicit TgRom(int R, int harmonics = 3) {
        FomConfig c;
        c.nx = c.ny = 32;
        c.lx = c.ly = 2 * M_PI;
        c.nu = 0.01;
        c.dt = 2e-3;
        c.t_end = 1.0;
        c.dt_sample = 0.05;
        c.tg_harmonics = harmonics;
        snaps = run_fom(c);
        basis = compute_pod(snaps, R);
        ops = assemble_operators(basis, R, c.nu);
    }
};

}  // namespace

TEST_CASE("G-ROM at full rank tracks the projected FOM") {
    TgRom tg(6);
    const FilterOp filt = build_filter(tg.ops, 0.0);
    const std::vector<double> a0v = project_P_r(tg.snaps.fields[0], tg.basis, 6);
    TrRomParams p = base_params(6, 0.01, 0.05 / 8);
    p.m_steps = 8 * (tg.snaps.count() - 1);
    p.t0 = tg.snaps.times[0];
    p.tol = 1e-12;
    const Trajectory traj = run_rom(Eigen::Map<const Eigen::VectorXd>(a0v.data(), 6), p, tg.ops, filt);
    REQUIRE_FALSE(traj.diverged);
    // compare final ROM coefficients against the projected final snapshot
    const std::vector<double> aTv = project_P_r(tg.snaps.fields.back(), tg.basis, 6);
    const Eigen::VectorXd aT = Eigen::Map<const Eigen::VectorXd>(aTv.data(), 6);
    const double err = (traj.coeffs.row(p.m_steps).transpose() - aT).norm();
    CHECK(err <= 0.05 * aT.norm());
}

TEST_CASE("unconditional stability of the implicit-BE skew scheme") {
    TgRom tg(6);
    const double delta = 0.3, chi = 0.7;
    const FilterOp filt = build_filter(tg.ops, delta);
    const std::vector<double> a0v = project_P_r(tg.snaps.fields[0], tg.basis, 6);
    const Eigen::VectorXd a0 = Eigen::Map<const Eigen::VectorXd>(a0v.data(), 6);

    for (double dt : {1e-3, 1e-2, 1e-1, 1.0}) {
        TrRomParams p = base_params(6, 0.01, dt);
        p.chi = chi;
        p.delta = delta;
        p.tol = 1e-13;
        p.use_newton = true;
        p.max_iters = 200;
        p.m_steps = 30;
        const Trajectory traj = run_rom(a0, p, tg.ops, filt);
        REQUIRE_FALSE(traj.diverged);
        const double u0 = std::sqrt(a0.dot(tg.ops.M * a0));
        const StabilityReport rep = stability_check(traj, p, u0, 0.0);
        INFO("dt = " << dt << " min_slack = " << rep.min_slack);
        CHECK(rep.all_steps_ok);
        CHECK(rep.min_slack >= -1e-12);
        CHECK(rep.accumulated_ok);
    }
}

TEST_CASE("chi = 0 stability degenerates gracefully") {
    TgRom tg(4);
    const FilterOp filt = build_filter(tg.ops, 0.3);
    const std::vector<double> a0v = project_P_r(tg.snaps.fields[0], tg.basis, 4);
    const Eigen::VectorXd a0 = Eigen::Map<const Eigen::VectorXd>(a0v.data(), 4);
    TrRomParams p = base_params(4, 0.01, 0.05);
    p.tol = 1e-13;
    p.m_steps = 20;
    const Trajectory traj = run_rom(a0, p, tg.ops, filt);
    const StabilityReport rep = stability_check(traj, p, std::sqrt(a0.squaredNorm()), 0.0);
    CHECK(rep.all_steps_ok);
    CHECK(rep.relax_accum.back() == 0.0);
}

TEST_CASE("final energy is non-increasing in chi") {
    TgRom tg(5);
    const FilterOp filt = build_filter(tg.ops, 0.4);
    const std::vector<double> a0v = project_P_r(tg.snaps.fields[0], tg.basis, 5);
    const Eigen::VectorXd a0 = Eigen::Map<const Eigen::VectorXd>(a0v.data(), 5);
    double prev = std::numeric_limits<double>::infinity();
    for (double chi : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        TrRomParams p = base_params(5, 0.01, 0.05);
        p.chi = chi;
        p.delta = 0.4;
        p.tol = 1e-13;
        p.m_steps = 40;
        const Trajectory traj = run_rom(a0, p, tg.ops, filt);
        REQUIRE_FALSE(traj.diverged);
        CHECK(traj.energy.back() <= prev * (1 + 1e-10));
        prev = traj.energy.back();
    }
}

TEST_CASE("stability_check enforces its scheme preconditions") {
    const RomOperators ops = diag_ops({1.0}, 1.0);
    const FilterOp filt = build_filter(ops, 0.1);
    TrRomParams p = base_params(1, 1.0, 0.1);
    p.scheme = Scheme::semi_implicit;
    p.m_steps = 5;
    Eigen::VectorXd a0(1);
    a0 << 1.0;
    const Trajectory traj = run_rom(a0, p, ops, filt);
    CHECK_THROWS_AS(stability_check(traj, p, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("solver failure is detected and truncates the trajectory") {
    // strong quadratic term defeats the fixed-point iteration budget
    RomOperators ops = diag_ops({1.0}, 1.0);
    ops.Braw[1](1, 1) = 10.0;
    const FilterOp filt = build_filter(ops, 0.0);
    TrRomParams p = base_params(1, 1.0, 0.5);
    p.m_steps = 200;
    p.max_iters = 3;
    p.form = ConvectionForm::standard;  // keep the diagonal quadratic term
    Eigen::VectorXd a0(1);
    a0 << 5.0;
    const Trajectory traj = run_rom(a0, p, ops, filt);
    CHECK(traj.diverged);
    CHECK(traj.fail_step >= 1);
    CHECK(traj.coeffs.rows() == traj.fail_step);
}

