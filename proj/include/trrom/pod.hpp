/// @file pod.hpp
/// @brief L2-POD basis from snapshot sets via the Gramian eigenproblem, plus
/// the truncation diagnostics (tail sums, stiffness spectral norms).

#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

#include "trrom/field_ops.hpp"
#include "trrom/fom.hpp"

namespace trrom {

struct PodBasis {
    GridPtr grid;
    VectorField lift;
    std::vector<VectorField> modes;      // phi_1..phi_R
    std::vector<double> eigenvalues;     // lambda_1 >= ... >= lambda_R >= 0
    std::vector<double> grad_norms_sq;   // ||grad phi_j||^2
    int R = 0;
};

struct TailSums {
    std::vector<double> lambda_l2;   // index r = 0..R
    std::vector<double> lambda_h10;  // index r = 0..R
    std::vector<double> s_r_norm;    // index r = 0..R, [0] = 0 by convention
};

/// Gramian K_ij = (1/(M+1)) (u_i, u_j); symmetric PSD.
inline Eigen::MatrixXd build_gramian(const SnapshotSet& snaps) {
    const int n = snaps.count();
    if (n < 1) throw std::invalid_argument("build_gramian: empty snapshot set");
    Eigen::MatrixXd K(n, n);
    const double scale = 1.0 / n;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double v = scale * l2_inner(snaps.fields[i], snaps.fields[j]);
            K(i, j) = v;
            K(j, i) = v;
        }
    return K;
}

/// Number of Gramian eigenvalues above the rank threshold 1e-12 * lambda_1.
inline int numerical_rank(const Eigen::VectorXd& eigs_desc) {
    if (eigs_desc.size() == 0) return 0;
    const double thresh = 1e-12 * eigs_desc(0);
    int rank = 0;
    while (rank < eigs_desc.size() && eigs_desc(rank) > thresh) ++rank;
    return rank;
}

inline PodBasis compute_pod(const SnapshotSet& snaps, int R) {
    if (snaps.count() < 2) throw std::invalid_argument("compute_pod: need >= 2 snapshots");
    const int n = snaps.count();
    const Eigen::MatrixXd K = build_gramian(snaps);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
    // ascending from Eigen; flip to descending
    Eigen::VectorXd lam(n);
    Eigen::MatrixXd Z(n, n);
    for (int j = 0; j < n; ++j) {
        lam(j) = eig.eigenvalues()(n - 1 - j);
        Z.col(j) = eig.eigenvectors().col(n - 1 - j);
    }
    const int rank = numerical_rank(lam);
    if (R > rank)
        throw std::invalid_argument("compute_pod: requested rank " + std::to_string(R) +
                                    " exceeds numerical rank " + std::to_string(rank) +
                                    " (threshold 1e-12*lambda_1 = " + std::to_string(1e-12 * lam(0)) + ")");
    PodBasis basis;
    basis.grid = snaps.grid;
    basis.lift = snaps.lift;
    basis.R = R;
    basis.eigenvalues.resize(R);
    basis.grad_norms_sq.resize(R);
    basis.modes.reserve(R);
    for (int j = 0; j < R; ++j) {
        const double lj = std::max(lam(j), 0.0);
        basis.eigenvalues[j] = lj;
        VectorField phi(snaps.grid);
        const double scale = 1.0 / std::sqrt(static_cast<double>(n) * lj);
        for (int l = 0; l < n; ++l) phi.axpy(scale * Z(l, j), snaps.fields[l]);
        basis.grad_norms_sq[j] = h10_norm_sq(phi);
        basis.modes.push_back(std::move(phi));
    }
    return basis;
}

/// Tail sums Lambda_L2(r), Lambda_H10(r) and stiffness norms ||S_r||_2.
inline TailSums tails(const PodBasis& basis) {
    const int R = basis.R;
    TailSums t;
    t.lambda_l2.assign(R + 1, 0.0);
    t.lambda_h10.assign(R + 1, 0.0);
    for (int r = R - 1; r >= 0; --r) {
        t.lambda_l2[r] = t.lambda_l2[r + 1] + basis.eigenvalues[r];
        t.lambda_h10[r] = t.lambda_h10[r + 1] + basis.grad_norms_sq[r] * basis.eigenvalues[r];
    }
    Eigen::MatrixXd S(R, R);
    for (int i = 0; i < R; ++i)
        for (int j = i; j < R; ++j) {
            const double v = h10_inner(basis.modes[j], basis.modes[i]);
            S(i, j) = v;
            S(j, i) = v;
        }
    t.s_r_norm.assign(R + 1, 0.0);
    for (int r = 1; r <= R; ++r) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S.topLeftCorner(r, r));
        t.s_r_norm[r] = es.eigenvalues().maxCoeff();
    }
    return t;
}

/// L2 projection coefficients a_j = (u, phi_j), j = 1..r.
inline std::vector<double> project_P_r(const VectorField& u, const PodBasis& basis, int r) {
    if (r > basis.R) throw std::invalid_argument("project_P_r: r exceeds retained rank R");
    std::vector<double> a(static_cast<size_t>(r));
    for (int j = 0; j < r; ++j) a[j] = l2_inner(u, basis.modes[j]);
    return a;
}

/// Reconstruct sum a_j phi_j (+ lift if requested).
inline VectorField reconstruct(const PodBasis& basis, const std::vector<double>& a,
                               bool include_lift = false) {
    VectorField f(basis.grid);
    if (include_lift) f.axpy(1.0, basis.lift);
    for (size_t j = 0; j < a.size(); ++j) f.axpy(a[j], basis.modes[j]);
    return f;
}

}  // namespace trrom
