#include <catch_amalgamated.hpp>

#include "trrom/fom.hpp"

using namespace trrom;

namespace {

GridPtr torus_2pi(int n) { return std::make_shared<Grid>(n, n, 2 * M_PI, 2 * M_PI, Bc::periodic); }

FomConfig tg_config(int n, double dt) {
    FomConfig c;
    c.nx = c.ny = n;
    c.lx = c.ly = 2 * M_PI;
    c.nu = 0.01;
    c.dt = dt;
    return c;
}

}  // namespace

TEST_CASE("taylor_green_exact basics") {
    auto g = torus_2pi(32);
    SECTION("kinetic energy at t=0 is pi^2") {
        CHECK_THAT(kinetic_energy(taylor_green_exact(0.0, 0.01, g)),
                   Catch::Matchers::WithinRel(M_PI * M_PI, 1e-12));
    }
    SECTION("large t decays to zero") {
        CHECK(l2_norm(taylor_green_exact(1e4, 0.01, g)) < 1e-12);
    }
    SECTION("nu=0 freezes the field") {
        auto a = taylor_green_exact(0.0, 0.0, g);
        auto b = taylor_green_exact(7.3, 0.0, g);
        b.axpy(-1.0, a);
        CHECK(l2_norm(b) < 1e-14);
    }
    SECTION("non-periodic grid rejected") {
        auto cav = std::make_shared<Grid>(8, 8, 1.0, 1.0, Bc::cavity);
        CHECK_THROWS_AS(taylor_green_exact(0.0, 0.01, cav), std::invalid_argument);
    }
}

TEST_CASE("kinetic_energy basics") {
    auto g = std::make_shared<Grid>(8, 8, 1.0, 1.0, Bc::periodic);
    CHECK(kinetic_energy(VectorField(g)) == 0.0);
    VectorField c(g);
    for (double& x : c.u) x = 1.0;
    CHECK_THAT(kinetic_energy(c), Catch::Matchers::WithinRel(0.5, 1e-13));
}

TEST_CASE("FomConfig validation") {
    FomConfig c = tg_config(64, 1e-3);
    SECTION("dt_sample must be a multiple of dt") {
        c.dt_sample = 2.5e-3;
        CHECK_THROWS_AS(validate(c), std::invalid_argument);
    }
    SECTION("CFL estimate bound") {
        c.dt = 0.2;  // dt * n / L_cell far beyond 0.5
        c.dt_sample = 0.2;
        CHECK_THROWS_AS(validate(c), std::invalid_argument);
    }
    SECTION("negative viscosity rejected") {
        c.nu = -1.0;
        CHECK_THROWS_AS(validate(c), std::invalid_argument);
    }
}

TEST_CASE("runtime CFL guard aborts on a too-large step") {
    FomConfig c = tg_config(64, 0.5);
    MacSolver solver(c);
    CHECK_THROWS_AS(solver.step(), CflError);
}

TEST_CASE("Taylor-Green self-convergence is 2nd order in space") {
    const double t_final = 0.25;
    std::vector<double> errs;
    for (int n : {16, 32, 64}) {
        FomConfig c = tg_config(n, 1e-3);
        c.t_start = t_final;
        c.t_end = t_final;
        c.dt_sample = 1e-3;
        const SnapshotSet s = run_fom(c);
        VectorField d = s.fields[0];
        d.axpy(-1.0, taylor_green_exact(t_final, c.nu, s.grid));
        errs.push_back(l2_norm(d));
    }
    const double rate1 = std::log2(errs[0] / errs[1]);
    const double rate2 = std::log2(errs[1] / errs[2]);
    CHECK(rate1 > 1.8);
    CHECK(rate1 < 2.2);
    CHECK(rate2 > 1.8);
    CHECK(rate2 < 2.2);
}

TEST_CASE("Taylor-Green kinetic energy follows the analytic decay") {
    FomConfig c = tg_config(64, 2e-3);
    c.t_start = 1.0;
    c.t_end = 1.0;
    c.dt_sample = 2e-3;
    const SnapshotSet s = run_fom(c);
    const double ke = kinetic_energy(s.fields[0]);
    CHECK_THAT(ke, Catch::Matchers::WithinRel(M_PI * M_PI * std::exp(-4 * c.nu * 1.0), 0.01));
}

TEST_CASE("sampled fields are discretely divergence-free") {
    FomConfig c = tg_config(32, 2e-3);
    c.t_end = 0.1;
    c.dt_sample = 0.02;
    const SnapshotSet s = run_fom(c);
    for (const auto& f : s.fields) CHECK(max_divergence(f) <= 1e-8);
}

TEST_CASE("cavity run: snapshot bookkeeping") {
    FomConfig c;
    c.flow_case = FlowCase::lid_cavity;
    c.nx = c.ny = 32;
    c.nu = 0.01;  // Re = 100
    c.dt = 5e-3;
    c.t_start = 0.2;
    c.t_end = 0.7;
    c.dt_sample = 0.05;
    const SnapshotSet s = run_fom(c);
    SECTION("snapshot count arithmetic") {
        CHECK(s.count() == 11);  // (t_end - t_start)/dt_sample + 1
        CHECK(s.times.front() == Catch::Approx(0.2));
        CHECK(s.times.back() == Catch::Approx(0.7));
    }
    SECTION("lift is the field at t_start, so the first fluctuation is zero") {
        CHECK(l2_norm(s.fields[0]) == 0.0);
        CHECK(l2_norm(s.lift) > 0.0);
    }
    SECTION("fluctuation + lift restores the raw field divergence-freedom") {
        VectorField raw = s.fields[5];
        raw.axpy(1.0, s.lift);
        CHECK(max_divergence(raw) <= 1e-8);
    }
    SECTION("cavity flow is energizing from rest under the moving lid") {
        VectorField raw = s.fields.back();
        raw.axpy(1.0, s.lift);
        CHECK(kinetic_energy(raw) > kinetic_energy(s.lift));
    }
}

TEST_CASE("config hash separates distinct configs") {
    FomConfig a = tg_config(64, 1e-3);
    FomConfig b = a;
    b.nu = 0.02;
    CHECK(a.hash() != b.hash());
    CHECK(a.hash() == tg_config(64, 1e-3).hash());
}
