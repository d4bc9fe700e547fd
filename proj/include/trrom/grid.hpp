/// @file grid.hpp
/// @brief Staggered (MAC) grid and discrete velocity fields.
///
/// Layout: u lives on x-faces, v on y-faces.  For periodic boundaries the
/// duplicate closing face is not stored, so u and v are both nx-by-ny.
/// For the cavity, boundary faces are stored explicitly: u is (nx+1)-by-ny
/// and v is nx-by-(ny+1).

#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

namespace trrom {

enum class Bc { periodic, cavity };

struct Grid {
    int nx = 0;
    int ny = 0;
    double lx = 0.0;
    double ly = 0.0;
    Bc bc = Bc::periodic;

    Grid() = default;
    Grid(int nx_, int ny_, double lx_, double ly_, Bc bc_)
        : nx(nx_), ny(ny_), lx(lx_), ly(ly_), bc(bc_) {
        if (nx < 4 || ny < 4) throw std::invalid_argument("Grid: nx, ny must be >= 4");
        if (!(lx > 0.0) || !(ly > 0.0)) throw std::invalid_argument("Grid: lx, ly must be positive");
    }

    double hx() const { return lx / nx; }
    double hy() const { return ly / ny; }

    // u-component array extents
    int unx() const { return bc == Bc::periodic ? nx : nx + 1; }
    int uny() const { return ny; }
    // v-component array extents
    int vnx() const { return nx; }
    int vny() const { return bc == Bc::periodic ? ny : ny + 1; }

    // face coordinates
    double ux(int i) const { return i * hx(); }
    double uy(int j) const { return (j + 0.5) * hy(); }
    double vx(int i) const { return (i + 0.5) * hx(); }
    double vy(int j) const { return j * hy(); }

    bool operator==(const Grid& o) const {
        return nx == o.nx && ny == o.ny && lx == o.lx && ly == o.ly && bc == o.bc;
    }
};

using GridPtr = std::shared_ptr<const Grid>;

/// Discrete vector field on a MAC grid.  Immutable by convention once built;
/// all field operations treat their inputs as const.
struct VectorField {
    GridPtr grid;
    std::vector<double> u;  // unx*uny, index i*uny + j
    std::vector<double> v;  // vnx*vny, index i*vny + j

    VectorField() = default;
    explicit VectorField(GridPtr g)
        : grid(std::move(g)),
          u(static_cast<size_t>(grid->unx()) * grid->uny(), 0.0),
          v(static_cast<size_t>(grid->vnx()) * grid->vny(), 0.0) {}

    double& at_u(int i, int j) { return u[static_cast<size_t>(i) * grid->uny() + j]; }
    double& at_v(int i, int j) { return v[static_cast<size_t>(i) * grid->vny() + j]; }
    double at_u(int i, int j) const { return u[static_cast<size_t>(i) * grid->uny() + j]; }
    double at_v(int i, int j) const { return v[static_cast<size_t>(i) * grid->vny() + j]; }

    bool finite() const {
        for (double x : u) if (!std::isfinite(x)) return false;
        for (double x : v) if (!std::isfinite(x)) return false;
        return true;
    }

    void axpy(double alpha, const VectorField& other) {
        for (size_t k = 0; k < u.size(); ++k) u[k] += alpha * other.u[k];
        for (size_t k = 0; k < v.size(); ++k) v[k] += alpha * other.v[k];
    }
    void scale(double alpha) {
        for (double& x : u) x *= alpha;
        for (double& x : v) x *= alpha;
    }
};

/// Trapezoid-consistent quadrature weights, factorized per direction.
/// Positive everywhere; each component's weights sum to lx*ly.
struct InnerProductWeights {
    std::vector<double> wux, wuy, wvx, wvy;

    explicit InnerProductWeights(const Grid& g) {
        const double hx = g.hx(), hy = g.hy();
        wux.assign(g.unx(), hx);
        wuy.assign(g.uny(), hy);
        wvx.assign(g.vnx(), hx);
        wvy.assign(g.vny(), hy);
        if (g.bc == Bc::cavity) {
            // boundary faces carry half a cell
            wux.front() = 0.5 * hx;
            wux.back() = 0.5 * hx;
            wvy.front() = 0.5 * hy;
            wvy.back() = 0.5 * hy;
        }
    }
};

inline void require_same_grid(const VectorField& a, const VectorField& b) {
    if (!a.grid || !b.grid || !(*a.grid == *b.grid))
        throw std::invalid_argument("fields live on different grids");
}

}  // namespace trrom
