#include <catch_amalgamated.hpp>

#include <random>

#include "trrom/pod.hpp"

using namespace trrom;

namespace {

GridPtr small_grid(Bc bc = Bc::periodic) { return std::make_shared<Grid>(12, 12, 1.0, 1.0, bc); }

VectorField random_field(GridPtr g, std::mt19937& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    VectorField f(g);
    for (double& x : f.u) x = dist(rng);
    for (double& x : f.v) x = dist(rng);
    return f;
}

SnapshotSet random_snaps(int count, unsigned seed, GridPtr g) {
    std::mt19937 rng(seed);
    SnapshotSet s;
    s.grid = g;
    s.lift = VectorField(g);
    for (int k = 0; k < count; ++k) {
        s.fields.push_back(random_field(g, rng));
        s.times.push_back(0.1 * k);
    }
    return s;
}

VectorField normalized(VectorField f) {
    f.scale(1.0 / l2_norm(f));
    return f;
}

}  // namespace

TEST_CASE("build_gramian small closed forms") {
    auto g = small_grid();
    SECTION("two orthonormal snapshots give diag(1/2, 1/2)") {
        SnapshotSet s;
        s.grid = g;
        s.lift = VectorField(g);
        VectorField a(g), b(g);
        for (int i = 0; i < g->unx(); ++i)
            for (int j = 0; j < g->uny(); ++j) a.at_u(i, j) = std::sin(2 * M_PI * g->ux(i));
        for (int i = 0; i < g->vnx(); ++i)
            for (int j = 0; j < g->vny(); ++j) b.at_v(i, j) = std::cos(2 * M_PI * g->vy(j));
        s.fields = {normalized(a), normalized(b)};
        s.times = {0.0, 1.0};
        const Eigen::MatrixXd K = build_gramian(s);
        CHECK_THAT(K(0, 0), Catch::Matchers::WithinAbs(0.5, 1e-13));
        CHECK_THAT(K(1, 1), Catch::Matchers::WithinAbs(0.5, 1e-13));
        CHECK_THAT(K(0, 1), Catch::Matchers::WithinAbs(0.0, 1e-13));
    }
    SECTION("one snapshot of norm c gives [c^2]") {
        std::mt19937 rng(3);
        SnapshotSet s;
        s.grid = g;
        s.lift = VectorField(g);
        VectorField f = normalized(random_field(g, rng));
        f.scale(1.7);
        s.fields = {f};
        s.times = {0.0};
        const Eigen::MatrixXd K = build_gramian(s);
        CHECK_THAT(K(0, 0), Catch::Matchers::WithinRel(1.7 * 1.7, 1e-12));
    }
    SECTION("duplicated unit snapshot has eigenvalues {1, 0}") {
        std::mt19937 rng(5);
        SnapshotSet s;
        s.grid = g;
        s.lift = VectorField(g);
        VectorField f = normalized(random_field(g, rng));
        s.fields = {f, f};
        s.times = {0.0, 1.0};
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(build_gramian(s));
        CHECK_THAT(eig.eigenvalues()(1), Catch::Matchers::WithinAbs(1.0, 1e-12));
        CHECK_THAT(eig.eigenvalues()(0), Catch::Matchers::WithinAbs(0.0, 1e-12));
    }
}

TEST_CASE("compute_pod of a duplicated snapshot recovers u/||u||") {
    auto g = small_grid();
    std::mt19937 rng(9);
    SnapshotSet s;
    s.grid = g;
    s.lift = VectorField(g);
    const VectorField f = random_field(g, rng);
    s.fields = {f, f};
    s.times = {0.0, 1.0};
    const PodBasis basis = compute_pod(s, 1);
    VectorField d = basis.modes[0];
    const double sign = l2_inner(d, f) > 0 ? 1.0 : -1.0;
    d.scale(sign);
    VectorField fn = normalized(f);
    d.axpy(-1.0, fn);
    CHECK(l2_norm(d) < 1e-10);
}

TEST_CASE("compute_pod rejects ranks beyond the numerical rank") {
    auto g = small_grid();
    std::mt19937 rng(13);
    SnapshotSet s;
    s.grid = g;
    s.lift = VectorField(g);
    const VectorField f = random_field(g, rng);
    s.fields = {f, f, f};  // rank 1
    s.times = {0.0, 1.0, 2.0};
    CHECK_THROWS_WITH(compute_pod(s, 3), Catch::Matchers::ContainsSubstring("numerical rank"));
}

TEST_CASE("POD of a random snapshot set: identities and tails") {
    auto g = small_grid();
    const int n = 10;
    const SnapshotSet s = random_snaps(n, 17, g);
    const PodBasis basis = compute_pod(s, n);
    const TailSums ts = tails(basis);

    SECTION("modes are L2-orthonormal") {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) {
                const double expect = i == j ? 1.0 : 0.0;
                CHECK(std::abs(l2_inner(basis.modes[i], basis.modes[j]) - expect) <= 1e-8);
            }
    }
    SECTION("eigenvalues are non-increasing and non-negative") {
        for (int j = 1; j < n; ++j) CHECK(basis.eigenvalues[j] <= basis.eigenvalues[j - 1]);
        CHECK(basis.eigenvalues[n - 1] >= 0.0);
    }
    SECTION("tail endpoints") {
        CHECK(ts.lambda_l2[n] == 0.0);
        CHECK(ts.lambda_h10[n] == 0.0);
        double total = 0.0;
        for (double l : basis.eigenvalues) total += l;
        CHECK_THAT(ts.lambda_l2[0], Catch::Matchers::WithinRel(total, 1e-12));
    }
    SECTION("stiffness norms are non-decreasing in r") {
        for (int r = 2; r <= n; ++r) CHECK(ts.s_r_norm[r] >= ts.s_r_norm[r - 1] * (1 - 1e-12));
    }
    SECTION("L2 tail identity via brute-force projection") {
        for (int r = 0; r <= n; ++r) {
            double acc = 0.0;
            for (int l = 0; l < n; ++l) {
                const std::vector<double> a = project_P_r(s.fields[l], basis, r);
                VectorField resid = s.fields[l];
                resid.axpy(-1.0, reconstruct(basis, a));
                acc += l2_inner(resid, resid);
            }
            acc /= n;
            CHECK(std::abs(acc - ts.lambda_l2[r]) <= 1e-8 * std::max(ts.lambda_l2[0], ts.lambda_l2[r]));
        }
    }
    SECTION("H10 tail identity via brute-force projection") {
        for (int r = 0; r <= n; ++r) {
            double acc = 0.0;
            for (int l = 0; l < n; ++l) {
                const std::vector<double> a = project_P_r(s.fields[l], basis, r);
                VectorField resid = s.fields[l];
                resid.axpy(-1.0, reconstruct(basis, a));
                acc += h10_norm_sq(resid);
            }
            acc /= n;
            CHECK(std::abs(acc - ts.lambda_h10[r]) <=
                  1e-8 * std::max(ts.lambda_h10[0], ts.lambda_h10[r]));
        }
    }
    SECTION("full-rank reconstruction residual vanishes") {
        for (int l = 0; l < n; ++l) {
            const std::vector<double> a = project_P_r(s.fields[l], basis, n);
            VectorField resid = s.fields[l];
            resid.axpy(-1.0, reconstruct(basis, a));
            CHECK(l2_norm(resid) <= 1e-10 * l2_norm(s.fields[l]));
        }
    }
}

TEST_CASE("projection properties on random inputs") {
    auto g = small_grid();
    const SnapshotSet s = random_snaps(8, 29, g);
    const PodBasis basis = compute_pod(s, 6);
    std::mt19937 rng(31);
    SECTION("u = phi_1 projects to (1, 0, ..., 0)") {
        const std::vector<double> a = project_P_r(basis.modes[0], basis, 6);
        CHECK_THAT(a[0], Catch::Matchers::WithinAbs(1.0, 1e-10));
        for (int j = 1; j < 6; ++j) CHECK(std::abs(a[j]) < 1e-10);
    }
    SECTION("Pythagoras and L2 stability") {
        for (int t = 0; t < 20; ++t) {
            const VectorField u = random_field(g, rng);
            const std::vector<double> a = project_P_r(u, basis, 6);
            const VectorField pu = reconstruct(basis, a);
            VectorField resid = u;
            resid.axpy(-1.0, pu);
            const double u2 = l2_inner(u, u);
            const double p2 = l2_inner(pu, pu);
            CHECK(std::abs(u2 - (p2 + l2_inner(resid, resid))) <= 1e-10 * u2);
            CHECK(std::sqrt(p2) <= std::sqrt(u2) * (1 + 1e-10));
        }
    }
    SECTION("r exceeding R rejected") {
        CHECK_THROWS_AS(project_P_r(basis.modes[0], basis, 7), std::invalid_argument);
    }
    SECTION("inverse estimate over random coefficient vectors") {
        const TailSums ts = tails(basis);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (int t = 0; t < 100; ++t) {
            std::vector<double> a(6);
            for (double& x : a) x = dist(rng);
            const VectorField f = reconstruct(basis, a);
            CHECK(std::sqrt(h10_norm_sq(f)) <=
                  std::sqrt(ts.s_r_norm[6]) * l2_norm(f) + 1e-10);
        }
    }
}

TEST_CASE("POD modes of solver snapshots stay divergence-free") {
    FomConfig c;
    c.nx = c.ny = 32;
    c.lx = c.ly = 2 * M_PI;
    c.nu = 0.01;
    c.dt = 2e-3;
    c.t_end = 0.4;
    c.dt_sample = 0.04;
    c.tg_harmonics = 3;
    const SnapshotSet s = run_fom(c);
    const Eigen::MatrixXd K = build_gramian(s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
    Eigen::VectorXd desc = eig.eigenvalues().reverse();
    const int rank = numerical_rank(desc);
    const PodBasis basis = compute_pod(s, std::min(rank, 6));
    for (const auto& m : basis.modes) CHECK(max_divergence(m) <= 1e-7);
}
