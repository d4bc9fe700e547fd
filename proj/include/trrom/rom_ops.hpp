/// @file rom_ops.hpp
/// @brief Reduced operators (mass, stiffness, advection tensor with lift
/// coupling) and the differential filter F = (M + delta^2 A)^{-1} M.
///
/// The advection tensor is stored in raw form Braw[i](j,k) = b(psi_j, psi_k,
/// psi_i) over the augmented index set 0..r (0 = lift).  The skew tensor is
/// derived from it as an exact half-difference, so the discrete analogue of
/// b*(a, v, v) = 0 holds to roundoff.

#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "trrom/pod.hpp"

namespace trrom {

struct RomOperators {
    int r = 0;
    double nu = 0.0;
    Eigen::MatrixXd M;                 // r x r reduced mass
    Eigen::MatrixXd A;                 // (r+1) x (r+1), index 0 = lift
    std::vector<Eigen::MatrixXd> Braw; // size r+1; Braw[i](j,k) = b(psi_j, psi_k, psi_i)
    Eigen::VectorXd f;                 // reduced forcing, length r

    /// Advection tensor slice tested against psi_i, in skew or standard form.
    Eigen::MatrixXd tensor_row(int i, bool skew) const {
        if (!skew) return Braw[i];
        Eigen::MatrixXd T = Braw[i];
        for (int j = 0; j <= r; ++j)
            for (int k = 0; k <= r; ++k) T(j, k) = 0.5 * (Braw[i](j, k) - Braw[k](j, i));
        return T;
    }

    /// Convection contraction c_i = sum_{j,k} T_i(j,k) ahat_j ahat_k, i = 1..r,
    /// with ahat the lift-augmented coefficient vector (ahat_0 = 1).
    Eigen::VectorXd convect(const Eigen::VectorXd& ahat, bool skew) const {
        Eigen::VectorXd c(r);
        for (int i = 1; i <= r; ++i) c(i - 1) = ahat.dot(tensor_row(i, skew) * ahat);
        return c;
    }
};

struct FilterOp {
    double delta = 0.0;
    Eigen::MatrixXd F;
    Eigen::MatrixXd I_minus_F;
};

inline RomOperators assemble_operators(const PodBasis& basis, int r, double nu) {
    if (r > basis.R) throw std::invalid_argument("assemble_operators: r exceeds retained rank R");
    const Grid& g = *basis.grid;
    const int nu_sz = g.unx() * g.uny();
    const int nv_sz = g.vnx() * g.vny();
    const int n = nu_sz + nv_sz;
    const int m = r + 1;

    // augmented fields psi_0 = lift, psi_j = phi_j
    std::vector<const VectorField*> psi(m);
    psi[0] = &basis.lift;
    for (int j = 1; j <= r; ++j) psi[j] = &basis.modes[j - 1];

    RomOperators ops;
    ops.r = r;
    ops.nu = nu;
    ops.f = Eigen::VectorXd::Zero(r);

    ops.M.resize(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = i; j < r; ++j) {
            const double v = l2_inner(basis.modes[i], basis.modes[j]);
            ops.M(i, j) = v;
            ops.M(j, i) = v;
        }

    std::vector<FieldGradient> grads(m);
    for (int j = 0; j < m; ++j) grads[j] = gradient(*psi[j]);
    ops.A.resize(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
            const double v = h10_inner(grads[i], grads[j], g);
            ops.A(i, j) = v;
            ops.A(j, i) = v;
        }

    // weighted test matrix: row i = quadrature-weighted psi_i over all faces
    InnerProductWeights w(g);
    Eigen::MatrixXd Wt(m, n);
    for (int t = 0; t < m; ++t) {
        for (int i = 0; i < g.unx(); ++i)
            for (int j = 0; j < g.uny(); ++j) {
                const int k = i * g.uny() + j;
                Wt(t, k) = w.wux[i] * w.wuy[j] * psi[t]->u[k];
            }
        for (int i = 0; i < g.vnx(); ++i)
            for (int j = 0; j < g.vny(); ++j) {
                const int k = i * g.vny() + j;
                Wt(t, nu_sz + k) = w.wvx[i] * w.wvy[j] * psi[t]->v[k];
            }
    }

    std::vector<std::vector<double>> ivu(m), iuv(m);
    for (int j = 0; j < m; ++j) {
        ivu[j] = interp_v_at_u(*psi[j]);
        iuv[j] = interp_u_at_v(*psi[j]);
    }

    ops.Braw.assign(m, Eigen::MatrixXd::Zero(m, m));
    Eigen::MatrixXd C(n, m);
    for (int j = 0; j < m; ++j) {
        // column k of C: convection field (psi_j . grad) psi_k over all faces
        for (int k = 0; k < m; ++k) {
            for (int p = 0; p < nu_sz; ++p)
                C(p, k) = psi[j]->u[p] * grads[k].dudx[p] + ivu[j][p] * grads[k].dudy[p];
            for (int p = 0; p < nv_sz; ++p)
                C(nu_sz + p, k) = iuv[j][p] * grads[k].dvdx[p] + psi[j]->v[p] * grads[k].dvdy[p];
        }
        const Eigen::MatrixXd P = Wt * C;  // P(i, k) = b(psi_j, psi_k, psi_i)
        for (int i = 0; i < m; ++i)
            for (int k = 0; k < m; ++k) ops.Braw[i](j, k) = P(i, k);
    }
    return ops;
}

/// Restriction of max-rank operators to a smaller dimension (same basis prefix).
inline RomOperators truncate(const RomOperators& ops, int r) {
    if (r > ops.r) throw std::invalid_argument("truncate: r exceeds assembled dimension");
    RomOperators out;
    out.r = r;
    out.nu = ops.nu;
    out.M = ops.M.topLeftCorner(r, r);
    out.A = ops.A.topLeftCorner(r + 1, r + 1);
    out.f = ops.f.head(r);
    out.Braw.reserve(r + 1);
    for (int i = 0; i <= r; ++i) out.Braw.push_back(ops.Braw[i].topLeftCorner(r + 1, r + 1));
    return out;
}

inline FilterOp build_filter(const RomOperators& ops, double delta) {
    if (delta < 0.0) throw std::invalid_argument("build_filter: delta must be >= 0");
    const int r = ops.r;
    FilterOp filt;
    filt.delta = delta;
    const Eigen::MatrixXd lhs = ops.M + delta * delta * ops.A.block(1, 1, r, r);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);
    if (std::abs(lu.determinant()) < 1e-300)
        throw std::runtime_error("build_filter: M + delta^2 A is singular");
    filt.F = lu.solve(ops.M);
    // symmetrize: (M + d^2 A)^{-1} M is symmetric when M = I, up to roundoff
    filt.F = 0.5 * (filt.F + filt.F.transpose()).eval();
    filt.I_minus_F = Eigen::MatrixXd::Identity(r, r) - filt.F;
    return filt;
}

/// *-norm sqrt(a^T (I - F) a), the high-frequency content seminorm.
inline double star_norm(const Eigen::VectorXd& a, const FilterOp& filt) {
    if (a.size() != filt.F.rows()) throw std::invalid_argument("star_norm: dimension mismatch");
    const double q = a.dot(filt.I_minus_F * a);
    if (q < -1e-12 * std::max(1.0, a.squaredNorm()))
        throw std::runtime_error("star_norm: I - F not PSD within tolerance");
    return std::sqrt(std::max(q, 0.0));
}

}  // namespace trrom
