// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dgieti/assembly.hpp"
#include "dgieti/linalg.hpp"

#include <memory>

namespace dgieti {

/// Per-patch Schur complement on the extended boundary W and the two
/// discrete harmonic extensions. The interior factorization is computed once
/// and shared; concurrent solves against it are safe.
class PatchSchur {
public:
    explicit PatchSchur(const PatchSystem& sys);

    int n_interior() const { return sys_->map.n_interior; }
    int n_w() const { return sys_->map.n_w; }
    const PatchSystem& system() const { return *sys_; }

    /// S_e u = K_BB u - K_BI K_II^{-1} K_IB u; never forms S densely.
    Vector schur_apply(const Vector& u_w) const;

    /// Interior coefficients of the extension that is harmonic with respect
    /// to the full extended form a_e.
    Vector harmonic_extension_e(const Vector& u_w) const;

    /// Interior coefficients of the extension harmonic with respect to the
    /// volume form a only (copies carry no volume coupling).
    Vector harmonic_extension_a(const Vector& u_w) const;

    /// Interior solve with an interior load: K_II^{-1} (f_I - K_IB u_w).
    Vector interior_from_boundary(const Vector& f_i, const Vector& u_w) const;

    /// Extended-energy and d-energy (a + p) of the full vector (u_I, u_w).
    double energy_ae(const Vector& u_i, const Vector& u_w) const;
    double energy_d(const Vector& u_i, const Vector& u_w) const;

    /// Dense S_e for oracle use; guarded to small instances.
    DenseMatrix dense_schur() const;

    const linalg::SpdFactorization& interior_factorization() const { return *k_ii_fact_; }

private:
    Vector full_vector(const Vector& u_i, const Vector& u_w) const;

    const PatchSystem* sys_;
    linalg::SparseMatrix k_ii_, k_ib_, k_bi_, k_bb_;
    linalg::SparseMatrix k_vol_ib_;
    std::unique_ptr<linalg::SpdFactorization> k_ii_fact_;
};

}  // namespace dgieti
