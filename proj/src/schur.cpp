// SPDX-License-Identifier: Apache-2.0

#include "dgieti/schur.hpp"

namespace dgieti {

PatchSchur::PatchSchur(const PatchSystem& sys) : sys_(&sys) {
    const auto interior = sys.map.interior_indices();
    const auto w = sys.map.w_indices();
    k_ii_ = linalg::sparse_block(sys.K_e, interior, interior);
    k_ib_ = linalg::sparse_block(sys.K_e, interior, w);
    k_bi_ = linalg::sparse_block(sys.K_e, w, interior);
    k_bb_ = linalg::sparse_block(sys.K_e, w, w);
    k_vol_ib_ = linalg::sparse_block(sys.K_vol, interior, w);
    if (sys.map.n_interior > 0) k_ii_fact_ = std::make_unique<linalg::SpdFactorization>(k_ii_);
}

Vector PatchSchur::schur_apply(const Vector& u_w) const {
    if (u_w.size() != n_w()) throw DimensionError("schur_apply: size mismatch");
    Vector out = k_bb_ * u_w;
    if (k_ii_fact_) out -= k_bi_ * k_ii_fact_->solve(k_ib_ * u_w);
    return out;
}

Vector PatchSchur::harmonic_extension_e(const Vector& u_w) const {
    if (u_w.size() != n_w()) throw DimensionError("harmonic_extension_e: size mismatch");
    if (!k_ii_fact_) return Vector::Zero(0);
    return -k_ii_fact_->solve(k_ib_ * u_w);
}

Vector PatchSchur::harmonic_extension_a(const Vector& u_w) const {
    if (u_w.size() != n_w()) throw DimensionError("harmonic_extension_a: size mismatch");
    if (!k_ii_fact_) return Vector::Zero(0);
    return -k_ii_fact_->solve(k_vol_ib_ * u_w);
}

Vector PatchSchur::interior_from_boundary(const Vector& f_i, const Vector& u_w) const {
    if (u_w.size() != n_w() || f_i.size() != n_interior())
        throw DimensionError("interior_from_boundary: size mismatch");
    if (!k_ii_fact_) return Vector::Zero(0);
    return k_ii_fact_->solve(f_i - k_ib_ * u_w);
}

Vector PatchSchur::full_vector(const Vector& u_i, const Vector& u_w) const {
    Vector full(sys_->map.n_ext());
    full.head(n_interior()) = u_i;
    full.tail(n_w()) = u_w;
    return full;
}

double PatchSchur::energy_ae(const Vector& u_i, const Vector& u_w) const {
    const Vector full = full_vector(u_i, u_w);
    return full.dot(sys_->K_e * full);
}

double PatchSchur::energy_d(const Vector& u_i, const Vector& u_w) const {
    const Vector full = full_vector(u_i, u_w);
    return full.dot(sys_->K_vol * full) + full.dot(sys_->P_pen * full);
}

DenseMatrix PatchSchur::dense_schur() const {
    if (n_w() > 2000) throw DimensionError("dense_schur: size guard exceeded");
    DenseMatrix s = DenseMatrix::Zero(n_w(), n_w());
    Vector e = Vector::Zero(n_w());
    for (int j = 0; j < n_w(); ++j) {
        e.setZero();
        e[j] = 1.0;
        s.col(j) = schur_apply(e);
    }
    return s;
}

}  // namespace dgieti
