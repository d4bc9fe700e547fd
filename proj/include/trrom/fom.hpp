/// @file fom.hpp
/// @brief Desk-scale full-order solver: incompressible NSE on a MAC grid with
/// explicit 2nd-order convection-diffusion (Heun) and Chorin pressure
/// projection.  Periodic Poisson solves use a real-to-complex FFT; the cavity
/// (Neumann) solves use DCT-II/III transforms.  Both invert the compact
/// 5-point MAC Laplacian exactly, so sampled fields are discretely
/// divergence-free to roundoff.

#pragma once

#include <fftw3.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "trrom/field_ops.hpp"
#include "trrom/grid.hpp"

namespace trrom {

enum class FlowCase { taylor_green, lid_cavity };

struct FomConfig {
    int nx = 64, ny = 64;
    double lx = 1.0, ly = 1.0;
    double nu = 1e-2;
    double dt = 1e-3;
    double t_start = 0.0;   // sampling window start
    double t_end = 1.0;     // sampling window end
    double dt_sample = 0.05;
    FlowCase flow_case = FlowCase::taylor_green;
    bool regularized_lid = true;
    double poisson_tol = 1e-10;
    int tg_harmonics = 1;   // extra Taylor-Green harmonics in the initial condition

    Bc bc() const { return flow_case == FlowCase::taylor_green ? Bc::periodic : Bc::cavity; }

    uint64_t hash() const {
        auto mix = [](uint64_t h, uint64_t x) {
            h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            return h;
        };
        auto bits = [](double d) { uint64_t u; std::memcpy(&u, &d, 8); return u; };
        uint64_t h = 1469598103934665603ULL;
        h = mix(h, static_cast<uint64_t>(nx));
        h = mix(h, static_cast<uint64_t>(ny));
        h = mix(h, bits(lx)); h = mix(h, bits(ly));
        h = mix(h, bits(nu)); h = mix(h, bits(dt));
        h = mix(h, bits(t_start)); h = mix(h, bits(t_end)); h = mix(h, bits(dt_sample));
        h = mix(h, static_cast<uint64_t>(flow_case));
        h = mix(h, static_cast<uint64_t>(regularized_lid));
        h = mix(h, static_cast<uint64_t>(tg_harmonics));
        return h;
    }
};

struct SnapshotSet {
    GridPtr grid;
    std::vector<VectorField> fields;  // fluctuations u(t_k) - lift
    VectorField lift;                 // zeroth mode
    std::vector<double> times;
    uint64_t config_hash = 0;

    int count() const { return static_cast<int>(fields.size()); }
};

struct CflError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Exact Taylor-Green vortex on the periodic [0, 2pi]^2 box.
inline VectorField taylor_green_exact(double t, double nu, GridPtr grid) {
    if (grid->bc != Bc::periodic)
        throw std::invalid_argument("taylor_green_exact: periodic grid required");
    VectorField f(grid);
    const double decay = std::exp(-2.0 * nu * t);
    for (int i = 0; i < grid->unx(); ++i)
        for (int j = 0; j < grid->uny(); ++j)
            f.at_u(i, j) = std::sin(grid->ux(i)) * std::cos(grid->uy(j)) * decay;
    for (int i = 0; i < grid->vnx(); ++i)
        for (int j = 0; j < grid->vny(); ++j)
            f.at_v(i, j) = -std::cos(grid->vx(i)) * std::sin(grid->vy(j)) * decay;
    return f;
}

namespace detail {

inline std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

/// Direct solver for the compact MAC Laplacian on cell centers.
class PoissonSolver {
  public:
    PoissonSolver(const Grid& g) : nx_(g.nx), ny_(g.ny), hx_(g.hx()), hy_(g.hy()), periodic_(g.bc == Bc::periodic) {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        work_ = fftw_alloc_real(static_cast<size_t>(nx_) * ny_);
        if (periodic_) {
            spec_ = fftw_alloc_complex(static_cast<size_t>(nx_) * (ny_ / 2 + 1));
            fwd_ = fftw_plan_dft_r2c_2d(nx_, ny_, work_, spec_, FFTW_ESTIMATE);
            bwd_ = fftw_plan_dft_c2r_2d(nx_, ny_, spec_, work_, FFTW_ESTIMATE);
        } else {
            fwd_ = fftw_plan_r2r_2d(nx_, ny_, work_, work_, FFTW_REDFT10, FFTW_REDFT10, FFTW_ESTIMATE);
            bwd_ = fftw_plan_r2r_2d(nx_, ny_, work_, work_, FFTW_REDFT01, FFTW_REDFT01, FFTW_ESTIMATE);
        }
    }
    ~PoissonSolver() {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(work_);
        if (spec_) fftw_free(spec_);
    }
    PoissonSolver(const PoissonSolver&) = delete;
    PoissonSolver& operator=(const PoissonSolver&) = delete;

    /// Solves lap(p) = rhs (cell-centered, zero-mean); result in p.
    void solve(const std::vector<double>& rhs, std::vector<double>& p) {
        const size_t n = static_cast<size_t>(nx_) * ny_;
        double mean = 0.0;
        for (size_t k = 0; k < n; ++k) mean += rhs[k];
        mean /= static_cast<double>(n);
        for (size_t k = 0; k < n; ++k) work_[k] = rhs[k] - mean;
        fftw_execute(fwd_);
        if (periodic_) {
            const int nyh = ny_ / 2 + 1;
            for (int i = 0; i < nx_; ++i)
                for (int j = 0; j < nyh; ++j) {
                    const double lam = eig_per(i, nx_, hx_) + eig_per(j, ny_, hy_);
                    const size_t k = static_cast<size_t>(i) * nyh + j;
                    if (i == 0 && j == 0) {
                        spec_[k][0] = spec_[k][1] = 0.0;
                    } else {
                        spec_[k][0] /= lam;
                        spec_[k][1] /= lam;
                    }
                }
            fftw_execute(bwd_);
            const double norm = 1.0 / n;
            p.resize(n);
            for (size_t k = 0; k < n; ++k) p[k] = work_[k] * norm;
        } else {
            for (int i = 0; i < nx_; ++i)
                for (int j = 0; j < ny_; ++j) {
                    const double lam = eig_neu(i, nx_, hx_) + eig_neu(j, ny_, hy_);
                    const size_t k = static_cast<size_t>(i) * ny_ + j;
                    work_[k] = (i == 0 && j == 0) ? 0.0 : work_[k] / lam;
                }
            fftw_execute(bwd_);
            const double norm = 1.0 / (4.0 * n);
            p.resize(n);
            for (size_t k = 0; k < n; ++k) p[k] = work_[k] * norm;
        }
    }

  private:
    static double eig_per(int k, int n, double h) {
        return (2.0 * std::cos(2.0 * M_PI * k / n) - 2.0) / (h * h);
    }
    static double eig_neu(int k, int n, double h) {
        return (2.0 * std::cos(M_PI * k / n) - 2.0) / (h * h);
    }

    int nx_, ny_;
    double hx_, hy_;
    bool periodic_;
    double* work_ = nullptr;
    fftw_complex* spec_ = nullptr;
    fftw_plan fwd_{}, bwd_{};
};

}  // namespace detail

/// Time stepper owning the solver state for one FOM run.
class MacSolver {
  public:
    explicit MacSolver(const FomConfig& cfg)
        : cfg_(cfg),
          grid_(std::make_shared<Grid>(cfg.nx, cfg.ny, cfg.lx, cfg.ly, cfg.bc())),
          poisson_(*grid_),
          state_(grid_) {
        if (cfg.flow_case == FlowCase::taylor_green) {
            state_ = taylor_green_exact(0.0, cfg.nu, grid_);
            for (int m = 2; m <= cfg.tg_harmonics; ++m) {
                const double amp = std::pow(2.0, -(m - 1));
                for (int i = 0; i < grid_->unx(); ++i)
                    for (int j = 0; j < grid_->uny(); ++j)
                        state_.at_u(i, j) += amp * std::sin(m * grid_->ux(i)) * std::cos(m * grid_->uy(j));
                for (int i = 0; i < grid_->vnx(); ++i)
                    for (int j = 0; j < grid_->vny(); ++j)
                        state_.at_v(i, j) -= amp * std::cos(m * grid_->vx(i)) * std::sin(m * grid_->vy(j));
            }
        }
        apply_bc(state_);
        project(state_);
    }

    const VectorField& state() const { return state_; }
    GridPtr grid() const { return grid_; }
    double time() const { return t_; }

    double lid_velocity(double x) const {
        if (!cfg_.regularized_lid) return 1.0;
        const double s = x / cfg_.lx;
        return 16.0 * s * s * (1.0 - s) * (1.0 - s);
    }

    void step() {
        check_cfl();
        VectorField k1 = rhs(state_);
        VectorField stage(grid_);
        stage = state_;
        stage.axpy(cfg_.dt, k1);
        apply_bc(stage);
        project(stage);
        VectorField k2 = rhs(stage);
        VectorField next = state_;
        next.axpy(0.5 * cfg_.dt, k1);
        next.axpy(0.5 * cfg_.dt, k2);
        apply_bc(next);
        project(next);
        state_ = std::move(next);
        t_ += cfg_.dt;
        if (!state_.finite())
            throw std::runtime_error("FOM state diverged at t=" + std::to_string(t_));
    }

  private:
    void check_cfl() const {
        double umax = 0.0, vmax = 0.0;
        for (double x : state_.u) umax = std::max(umax, std::abs(x));
        for (double x : state_.v) vmax = std::max(vmax, std::abs(x));
        const double cfl = cfg_.dt * (umax / grid_->hx() + vmax / grid_->hy());
        if (cfl > 1.0)
            throw CflError("CFL violation at t=" + std::to_string(t_) +
                           ": advective CFL=" + std::to_string(cfl));
    }

    // ghost-extended accessors (cavity: no-slip walls, moving lid)
    double U(const VectorField& f, int i, int j) const {
        const Grid& g = *grid_;
        if (g.bc == Bc::periodic)
            return f.at_u((i + g.unx()) % g.unx(), (j + g.uny()) % g.uny());
        if (j < 0) return -f.at_u(i, 0);
        if (j >= g.uny()) return 2.0 * lid_velocity(g.ux(i)) - f.at_u(i, g.uny() - 1);
        return f.at_u(i, j);
    }
    double V(const VectorField& f, int i, int j) const {
        const Grid& g = *grid_;
        if (g.bc == Bc::periodic)
            return f.at_v((i + g.vnx()) % g.vnx(), (j + g.vny()) % g.vny());
        if (i < 0) return -f.at_v(0, j);
        if (i >= g.vnx()) return -f.at_v(g.vnx() - 1, j);
        return f.at_v(i, j);
    }

    VectorField rhs(const VectorField& f) const {
        const Grid& g = *grid_;
        const double hx = g.hx(), hy = g.hy(), nu = cfg_.nu;
        VectorField out(grid_);
        const bool per = g.bc == Bc::periodic;
        const int ulo = per ? 0 : 1, uhi = per ? g.unx() : g.unx() - 1;
        for (int i = ulo; i < uhi; ++i)
            for (int j = 0; j < g.uny(); ++j) {
                const double uc = U(f, i, j);
                const double vbar = 0.25 * (V(f, i - 1, j) + V(f, i - 1, j + 1) + V(f, i, j) + V(f, i, j + 1));
                const double dudx = (U(f, i + 1, j) - U(f, i - 1, j)) / (2 * hx);
                const double dudy = (U(f, i, j + 1) - U(f, i, j - 1)) / (2 * hy);
                const double lap = (U(f, i + 1, j) - 2 * uc + U(f, i - 1, j)) / (hx * hx) +
                                   (U(f, i, j + 1) - 2 * uc + U(f, i, j - 1)) / (hy * hy);
                out.at_u(i, j) = -(uc * dudx + vbar * dudy) + nu * lap;
            }
        const int vlo = per ? 0 : 1, vhi = per ? g.vny() : g.vny() - 1;
        for (int i = 0; i < g.vnx(); ++i)
            for (int j = vlo; j < vhi; ++j) {
                const double vc = V(f, i, j);
                const double ubar = 0.25 * (U(f, i, j - 1) + U(f, i, j) + U(f, i + 1, j - 1) + U(f, i + 1, j));
                const double dvdx = (V(f, i + 1, j) - V(f, i - 1, j)) / (2 * hx);
                const double dvdy = (V(f, i, j + 1) - V(f, i, j - 1)) / (2 * hy);
                const double lap = (V(f, i + 1, j) - 2 * vc + V(f, i - 1, j)) / (hx * hx) +
                                   (V(f, i, j + 1) - 2 * vc + V(f, i, j - 1)) / (hy * hy);
                out.at_v(i, j) = -(ubar * dvdx + vc * dvdy) + nu * lap;
            }
        return out;
    }

    void apply_bc(VectorField& f) const {
        if (grid_->bc == Bc::periodic) return;
        const Grid& g = *grid_;
        for (int j = 0; j < g.uny(); ++j) {
            f.at_u(0, j) = 0.0;
            f.at_u(g.unx() - 1, j) = 0.0;
        }
        for (int i = 0; i < g.vnx(); ++i) {
            f.at_v(i, 0) = 0.0;
            f.at_v(i, g.vny() - 1) = 0.0;
        }
    }

    void project(VectorField& f) {
        const Grid& g = *grid_;
        const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
        std::vector<double> div(static_cast<size_t>(g.nx) * g.ny);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) {
                double ue, uw, vn, vs;
                if (g.bc == Bc::periodic) {
                    uw = f.at_u(i, j);
                    ue = f.at_u((i + 1) % g.nx, j);
                    vs = f.at_v(i, j);
                    vn = f.at_v(i, (j + 1) % g.ny);
                } else {
                    uw = f.at_u(i, j);
                    ue = f.at_u(i + 1, j);
                    vs = f.at_v(i, j);
                    vn = f.at_v(i, j + 1);
                }
                div[static_cast<size_t>(i) * g.ny + j] = (ue - uw) * ihx + (vn - vs) * ihy;
            }
        std::vector<double> p;
        poisson_.solve(div, p);
        auto pc = [&](int i, int j) {
            if (g.bc == Bc::periodic) {
                i = (i + g.nx) % g.nx;
                j = (j + g.ny) % g.ny;
            }
            return p[static_cast<size_t>(i) * g.ny + j];
        };
        if (g.bc == Bc::periodic) {
            for (int i = 0; i < g.unx(); ++i)
                for (int j = 0; j < g.uny(); ++j)
                    f.at_u(i, j) -= (pc(i, j) - pc(i - 1, j)) * ihx;
            for (int i = 0; i < g.vnx(); ++i)
                for (int j = 0; j < g.vny(); ++j)
                    f.at_v(i, j) -= (pc(i, j) - pc(i, j - 1)) * ihy;
        } else {
            for (int i = 1; i < g.unx() - 1; ++i)
                for (int j = 0; j < g.uny(); ++j)
                    f.at_u(i, j) -= (pc(i, j) - pc(i - 1, j)) * ihx;
            for (int i = 0; i < g.vnx(); ++i)
                for (int j = 1; j < g.vny() - 1; ++j)
                    f.at_v(i, j) -= (pc(i, j) - pc(i, j - 1)) * ihy;
        }
    }

    FomConfig cfg_;
    GridPtr grid_;
    detail::PoissonSolver poisson_;
    VectorField state_;
    double t_ = 0.0;
};

inline void validate(const FomConfig& cfg) {
    if (!(cfg.nu > 0.0)) throw std::invalid_argument("FomConfig: nu must be positive");
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("FomConfig: dt must be positive");
    const double ratio = cfg.dt_sample / cfg.dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || ratio < 1.0 - 1e-12)
        throw std::invalid_argument("FomConfig: dt_sample must be an integer multiple of dt");
    if (cfg.t_end < cfg.t_start) throw std::invalid_argument("FomConfig: t_end < t_start");
    // CFL estimate with unit velocity scale (lid speed / Taylor-Green amplitude)
    const Grid g(cfg.nx, cfg.ny, cfg.lx, cfg.ly, cfg.bc());
    const double est = cfg.dt * (1.0 / g.hx() + 1.0 / g.hy()) * 0.5;
    if (est > 0.5)
        throw std::invalid_argument("FomConfig: CFL estimate " + std::to_string(est) + " exceeds 0.5");
}

/// Runs the FOM and collects fluctuation snapshots over [t_start, t_end].
inline SnapshotSet run_fom(const FomConfig& cfg,
                           const std::function<void(int, int)>& progress = {}) {
    validate(cfg);
    MacSolver solver(cfg);

    const long n_warm = std::lround(cfg.t_start / cfg.dt);
    const long n_total = std::lround(cfg.t_end / cfg.dt);
    const long every = std::lround(cfg.dt_sample / cfg.dt);

    SnapshotSet snaps;
    snaps.grid = solver.grid();
    snaps.config_hash = cfg.hash();

    std::vector<VectorField> raw;
    auto maybe_sample = [&](long n) {
        if (n >= n_warm && (n - n_warm) % every == 0) {
            const VectorField& f = solver.state();
            const double dv = max_divergence(f);
            if (dv > 1e-8)
                throw std::runtime_error("sampled field not divergence-free: max|div|=" + std::to_string(dv));
            raw.push_back(f);
            snaps.times.push_back(n * cfg.dt);
        }
    };
    maybe_sample(0);
    for (long n = 1; n <= n_total; ++n) {
        solver.step();
        maybe_sample(n);
        if (progress) progress(static_cast<int>(n), static_cast<int>(n_total));
    }

    if (cfg.flow_case == FlowCase::taylor_green) {
        snaps.lift = VectorField(snaps.grid);  // zero lift
    } else {
        snaps.lift = raw.front();  // FOM field at t_start
    }
    snaps.fields.reserve(raw.size());
    for (auto& f : raw) {
        VectorField fluct = f;
        fluct.axpy(-1.0, snaps.lift);
        snaps.fields.push_back(std::move(fluct));
    }
    return snaps;
}

}  // namespace trrom
