// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dgieti/assembly.hpp"
#include "dgieti/schur.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace dgieti {

/// One Lagrange multiplier row: couples the copy dof (patch_copy, w_copy)
/// with its owner (patch_owner, w_owner), coefficients +1 / -1. The scaled
/// jump operator uses the multiplicity weights (1/2 each in 2D).
struct Multiplier {
    int patch_copy;
    int w_copy;
    int patch_owner;
    int w_owner;
    double weight = 0.5;
};

struct PcgResult {
    Vector lambda;
    int iterations = 0;
    bool converged = false;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double kappa = 0.0;
};

using LinOp = std::function<Vector(const Vector&)>;

/// PCG with the Lanczos tridiagonal accumulated from the alpha/beta
/// coefficients; kappa estimate = extreme Ritz value ratio.
PcgResult pcg_solve(const LinOp& apply_op, const LinOp& apply_prec, const Vector& rhs, double tol,
                    int maxit);

/// The dG-IETI-DP operator set: vertex primal constraints, jump operator,
/// coarse problem, scaled Dirichlet preconditioner.
///
/// Functions in the subassembled space W-tilde use the nodal layout
/// [dual dofs of patch 0, dual dofs of patch 1, ..., global primal values].
class IetiSystem {
public:
    IetiSystem(const MultiPatch& mp, const std::vector<PatchSystem>& systems,
               const std::vector<PatchSchur>& schur);

    int num_multipliers() const { return static_cast<int>(multipliers_.size()); }
    int num_primal() const { return n_primal_; }
    int num_dual() const { return n_dual_total_; }
    int wt_size() const { return n_dual_total_ + n_primal_; }
    const std::vector<Multiplier>& multipliers() const { return multipliers_; }
    /// W indices of the primal (corner) dofs of patch k.
    std::vector<int> corner_w_dofs(int k) const;

    /// Nodal W-tilde vector -> per-patch W vectors (corners from primal).
    std::vector<Vector> expand(const Vector& wt) const;
    /// Adjoint of expand: per-patch W functionals -> nodal layout.
    Vector gather(const std::vector<Vector>& w_patches) const;

    Vector stilde_apply(const Vector& wt) const;
    Vector stilde_solve(const Vector& b) const;

    /// Full jump operator B on W (all copy/owner pairs, primal ones included).
    Vector jump_all(const std::vector<Vector>& w_patches) const;

    Vector bt_tilde(const Vector& lambda) const;  // B~^T
    Vector b_tilde(const Vector& wt) const;       // B~

    Vector apply_F(const Vector& lambda) const;
    Vector apply_MsD_inv(const Vector& r) const;

    /// g~ from per-patch condensed loads g^(k) = f_B - K_BI K_II^{-1} f_I.
    Vector assemble_gtilde(const std::vector<Vector>& condensed) const;
    std::vector<Vector> condensed_loads() const;

    struct Solution {
        std::vector<Vector> ext;  // per patch, active extended layout
        double jump_inf = 0.0;    // max |B u| over all pairs
    };
    /// u = S~^{-1}(g~ - B~^T lambda), interiors recovered with the load.
    Solution recover_solution(const Vector& lambda) const;

    /// Exact spectrum of M_sD^{-1} F, ascending (guard: <= 2000 multipliers).
    Vector dense_spectrum_oracle() const;
    DenseMatrix dense_F() const;
    DenseMatrix dense_MsD_inv() const;

private:
    struct PatchData {
        std::vector<int> w_dual;        // per w: dual local id or -1
        std::vector<int> w_corner;      // per w: local corner id or -1
        std::vector<int> corner_w;      // local corner -> w
        std::vector<int> corner_global; // local corner -> global primal id
        std::vector<int> dual_w;        // dual local -> w
        int dual_offset = 0;
        std::vector<int> bordered_ext;  // interior ext indices ++ dual ext indices
        std::unique_ptr<linalg::SpdFactorization> kc;
        DenseMatrix phi;    // n_ext x n_corner, energy-minimal primal basis
        DenseMatrix s_loc;  // corner Schur complement
    };

    Vector dual_block_solve(int k, const Vector& b_dual) const;

    const MultiPatch* mp_;
    const std::vector<PatchSystem>* systems_;
    const std::vector<PatchSchur>* schur_;

    std::vector<PatchData> data_;
    std::vector<Multiplier> multipliers_;
    std::vector<Multiplier> all_pairs_;  // including primal endpoint pairs
    int n_primal_ = 0;
    int n_dual_total_ = 0;
    DenseMatrix s_pp_;
    Eigen::LLT<DenseMatrix> s_pp_llt_;
};

/// End-to-end dG-IETI-DP solve. Degenerates to direct patch solves when no
/// interfaces are present.
struct IetiSolveResult {
    PcgResult pcg;
    std::vector<Vector> ext;  // per patch extended solution, active layout
    double jump_inf = 0.0;
    int n_multipliers = 0;
    int n_primal = 0;
};
IetiSolveResult solve_ieti(const MultiPatch& mp, std::vector<PatchSystem>& systems,
                           const std::vector<Vector>& loads, double tol, int maxit);

}  // namespace dgieti
