/// @file field_ops.hpp
/// @brief Inner products, discrete gradients, and trilinear forms on MAC fields.
///
/// All derivatives are 2nd-order: centered in the interior, one-sided at
/// cavity walls, wrapped for periodic boundaries.  The skew form b* is always
/// evaluated as the half-difference of two b evaluations so that
/// b*(a, v, v) = 0 holds to machine precision for any quadrature.

#pragma once

#include <cmath>
#include <vector>

#include "trrom/grid.hpp"

namespace trrom {

inline double l2_inner(const VectorField& a, const VectorField& b) {
    require_same_grid(a, b);
    const Grid& g = *a.grid;
    InnerProductWeights w(g);
    double s = 0.0;
    for (int i = 0; i < g.unx(); ++i)
        for (int j = 0; j < g.uny(); ++j)
            s += w.wux[i] * w.wuy[j] * a.at_u(i, j) * b.at_u(i, j);
    for (int i = 0; i < g.vnx(); ++i)
        for (int j = 0; j < g.vny(); ++j)
            s += w.wvx[i] * w.wvy[j] * a.at_v(i, j) * b.at_v(i, j);
    return s;
}

inline double l2_norm(const VectorField& a) { return std::sqrt(l2_inner(a, a)); }

inline double kinetic_energy(const VectorField& a) { return 0.5 * l2_inner(a, a); }

/// Gradients of both components, sampled at their native face locations.
struct FieldGradient {
    std::vector<double> dudx, dudy, dvdx, dvdy;
};

namespace detail {

// 1D derivative along the rows (i-direction) of a ni-by-nj array
inline void ddx(const std::vector<double>& f, int ni, int nj, double h, bool periodic,
                std::vector<double>& out) {
    out.resize(f.size());
    const double c = 1.0 / (2.0 * h);
    for (int i = 0; i < ni; ++i) {
        for (int j = 0; j < nj; ++j) {
            const size_t k = static_cast<size_t>(i) * nj + j;
            if (periodic) {
                const int ip = (i + 1) % ni, im = (i + ni - 1) % ni;
                out[k] = c * (f[static_cast<size_t>(ip) * nj + j] - f[static_cast<size_t>(im) * nj + j]);
            } else if (i == 0) {
                out[k] = c * (-3.0 * f[k] + 4.0 * f[static_cast<size_t>(1) * nj + j] -
                              f[static_cast<size_t>(2) * nj + j]);
            } else if (i == ni - 1) {
                out[k] = c * (3.0 * f[k] - 4.0 * f[static_cast<size_t>(ni - 2) * nj + j] +
                              f[static_cast<size_t>(ni - 3) * nj + j]);
            } else {
                out[k] = c * (f[static_cast<size_t>(i + 1) * nj + j] - f[static_cast<size_t>(i - 1) * nj + j]);
            }
        }
    }
}

inline void ddy(const std::vector<double>& f, int ni, int nj, double h, bool periodic,
                std::vector<double>& out) {
    out.resize(f.size());
    const double c = 1.0 / (2.0 * h);
    for (int i = 0; i < ni; ++i) {
        const size_t row = static_cast<size_t>(i) * nj;
        for (int j = 0; j < nj; ++j) {
            if (periodic) {
                const int jp = (j + 1) % nj, jm = (j + nj - 1) % nj;
                out[row + j] = c * (f[row + jp] - f[row + jm]);
            } else if (j == 0) {
                out[row + j] = c * (-3.0 * f[row] + 4.0 * f[row + 1] - f[row + 2]);
            } else if (j == nj - 1) {
                out[row + j] = c * (3.0 * f[row + j] - 4.0 * f[row + j - 1] + f[row + j - 2]);
            } else {
                out[row + j] = c * (f[row + j + 1] - f[row + j - 1]);
            }
        }
    }
}

}  // namespace detail

inline FieldGradient gradient(const VectorField& f) {
    const Grid& g = *f.grid;
    const bool per = g.bc == Bc::periodic;
    FieldGradient out;
    detail::ddx(f.u, g.unx(), g.uny(), g.hx(), per, out.dudx);
    detail::ddy(f.u, g.unx(), g.uny(), g.hy(), per, out.dudy);
    detail::ddx(f.v, g.vnx(), g.vny(), g.hx(), per, out.dvdx);
    detail::ddy(f.v, g.vnx(), g.vny(), g.hy(), per, out.dvdy);
    return out;
}

inline double h10_inner(const FieldGradient& ga, const FieldGradient& gb, const Grid& g) {
    InnerProductWeights w(g);
    double s = 0.0;
    for (int i = 0; i < g.unx(); ++i)
        for (int j = 0; j < g.uny(); ++j) {
            const size_t k = static_cast<size_t>(i) * g.uny() + j;
            s += w.wux[i] * w.wuy[j] * (ga.dudx[k] * gb.dudx[k] + ga.dudy[k] * gb.dudy[k]);
        }
    for (int i = 0; i < g.vnx(); ++i)
        for (int j = 0; j < g.vny(); ++j) {
            const size_t k = static_cast<size_t>(i) * g.vny() + j;
            s += w.wvx[i] * w.wvy[j] * (ga.dvdx[k] * gb.dvdx[k] + ga.dvdy[k] * gb.dvdy[k]);
        }
    return s;
}

inline double h10_inner(const VectorField& a, const VectorField& b) {
    require_same_grid(a, b);
    return h10_inner(gradient(a), gradient(b), *a.grid);
}

inline double h10_norm_sq(const VectorField& a) { return h10_inner(a, a); }

/// v-component of `f` interpolated to u-face locations (4-point average;
/// odd reflection across cavity walls).
inline std::vector<double> interp_v_at_u(const VectorField& f) {
    const Grid& g = *f.grid;
    std::vector<double> out(static_cast<size_t>(g.unx()) * g.uny());
    auto vv = [&](int i, int j) -> double {
        if (g.bc == Bc::periodic) {
            return f.at_v((i + g.vnx()) % g.vnx(), (j + g.vny()) % g.vny());
        }
        double sgn = 1.0;
        if (i < 0) { i = 0; sgn = -1.0; }
        if (i >= g.vnx()) { i = g.vnx() - 1; sgn = -1.0; }
        return sgn * f.at_v(i, j);
    };
    for (int i = 0; i < g.unx(); ++i)
        for (int j = 0; j < g.uny(); ++j)
            out[static_cast<size_t>(i) * g.uny() + j] =
                0.25 * (vv(i - 1, j) + vv(i - 1, j + 1) + vv(i, j) + vv(i, j + 1));
    return out;
}

/// u-component of `f` interpolated to v-face locations.
inline std::vector<double> interp_u_at_v(const VectorField& f) {
    const Grid& g = *f.grid;
    std::vector<double> out(static_cast<size_t>(g.vnx()) * g.vny());
    auto uu = [&](int i, int j) -> double {
        if (g.bc == Bc::periodic) {
            return f.at_u((i + g.unx()) % g.unx(), (j + g.uny()) % g.uny());
        }
        double sgn = 1.0;
        if (j < 0) { j = 0; sgn = -1.0; }
        if (j >= g.uny()) { j = g.uny() - 1; sgn = -1.0; }
        return sgn * f.at_u(i, j);
    };
    for (int i = 0; i < g.vnx(); ++i)
        for (int j = 0; j < g.vny(); ++j)
            out[static_cast<size_t>(i) * g.vny() + j] =
                0.25 * (uu(i, j - 1) + uu(i, j) + uu(i + 1, j - 1) + uu(i + 1, j));
    return out;
}

/// b(a, v, w) = ((a . grad) v, w)
inline double trilinear_b(const VectorField& a, const VectorField& v, const VectorField& w) {
    require_same_grid(a, v);
    require_same_grid(a, w);
    const Grid& g = *a.grid;
    InnerProductWeights wt(g);
    const FieldGradient gv = gradient(v);
    const std::vector<double> av_at_u = interp_v_at_u(a);
    const std::vector<double> au_at_v = interp_u_at_v(a);
    double s = 0.0;
    for (int i = 0; i < g.unx(); ++i)
        for (int j = 0; j < g.uny(); ++j) {
            const size_t k = static_cast<size_t>(i) * g.uny() + j;
            const double conv = a.u[k] * gv.dudx[k] + av_at_u[k] * gv.dudy[k];
            s += wt.wux[i] * wt.wuy[j] * conv * w.u[k];
        }
    for (int i = 0; i < g.vnx(); ++i)
        for (int j = 0; j < g.vny(); ++j) {
            const size_t k = static_cast<size_t>(i) * g.vny() + j;
            const double conv = au_at_v[k] * gv.dvdx[k] + a.v[k] * gv.dvdy[k];
            s += wt.wvx[i] * wt.wvy[j] * conv * w.v[k];
        }
    return s;
}

/// b*(a, v, w) = (b(a,v,w) - b(a,w,v)) / 2, exactly skew in (v, w).
inline double trilinear_b_star(const VectorField& a, const VectorField& v, const VectorField& w) {
    return 0.5 * (trilinear_b(a, v, w) - trilinear_b(a, w, v));
}

/// Max pointwise MAC divergence over cells.
inline double max_divergence(const VectorField& f) {
    const Grid& g = *f.grid;
    const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
    double m = 0.0;
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
            m = std::max(m, std::abs((ue - uw) * ihx + (vn - vs) * ihy));
        }
    return m;
}

}  // namespace trrom
