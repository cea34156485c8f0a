// SPDX-License-Identifier: Apache-2.0

#include "dgieti/ieti.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace dgieti {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

PcgResult pcg_solve(const LinOp& apply_op, const LinOp& apply_prec, const Vector& rhs, double tol,
                    int maxit) {
    if (tol <= 0.0) throw std::invalid_argument("pcg_solve: tol must be positive");
    const int n = static_cast<int>(rhs.size());
    PcgResult res;
    res.lambda = Vector::Zero(n);
    res.lambda_min = res.lambda_max = res.kappa = 1.0;
    if (n == 0) {
        res.converged = true;
        return res;
    }

    Vector r = rhs;
    Vector z = apply_prec(r);
    Vector p = z;
    double rz = r.dot(z);
    const double rz0 = rz;
    if (rz0 <= 0.0) {
        res.converged = true;
        return res;
    }

    std::vector<double> alphas, betas;
    for (int it = 0; it < maxit; ++it) {
        const Vector q = apply_op(p);
        const double alpha = rz / p.dot(q);
        alphas.push_back(alpha);
        res.lambda += alpha * p;
        r -= alpha * q;
        z = apply_prec(r);
        const double rz_next = r.dot(z);
        res.iterations = it + 1;
        if (std::sqrt(std::abs(rz_next)) <= tol * std::sqrt(rz0)) {
            res.converged = true;
            break;
        }
        const double beta = rz_next / rz;
        betas.push_back(beta);
        p = z + beta * p;
        rz = rz_next;
    }

    // Lanczos tridiagonal from the PCG coefficients
    const int m = static_cast<int>(alphas.size());
    if (m > 0) {
        DenseMatrix t = DenseMatrix::Zero(m, m);
        for (int j = 0; j < m; ++j) {
            t(j, j) = 1.0 / alphas[j];
            if (j > 0) t(j, j) += betas[j - 1] / alphas[j - 1];
            if (j + 1 < m) t(j, j + 1) = t(j + 1, j) = std::sqrt(betas[j]) / alphas[j];
        }
        const Vector ev = linalg::dense_sym_eig(t);
        res.lambda_min = ev[0];
        res.lambda_max = ev[m - 1];
        res.kappa = res.lambda_max / res.lambda_min;
    }
    return res;
}

IetiSystem::IetiSystem(const MultiPatch& mp, const std::vector<PatchSystem>& systems,
                       const std::vector<PatchSchur>& schur)
    : mp_(&mp), systems_(&systems), schur_(&schur) {
    const int np = mp.num_patches();
    data_.resize(np);

    std::vector<int> w_offset(np + 1, 0);
    for (int k = 0; k < np; ++k) w_offset[k + 1] = w_offset[k] + systems[k].map.n_w;
    UnionFind uf(w_offset[np]);
    std::vector<char> marked(w_offset[np], 0);

    // Corner identification: at each interface endpoint, unify the two own
    // corner dofs and the two copy endpoints that meet at the vertex.
    for (std::size_t i = 0; i < mp.interfaces().size(); ++i) {
        const auto& f = mp.interface(static_cast<int>(i));
        const auto& map_a = systems[f.a.patch].map;
        const auto& map_b = systems[f.b.patch].map;
        const auto& own_a = map_a.own_face_ext.at(static_cast<int>(i));
        const auto& own_b = map_b.own_face_ext.at(static_cast<int>(i));
        const auto& copy_a = map_a.copy_ext.at(static_cast<int>(i));  // b's dofs seen in a
        const auto& copy_b = map_b.copy_ext.at(static_cast<int>(i));  // a's dofs seen in b

        for (int e = 0; e < 2; ++e) {
            const int eb = f.orientation == Orientation::same ? e : 1 - e;
            const int pos_a = e == 0 ? 0 : static_cast<int>(own_a.size()) - 1;
            const int pos_b = eb == 0 ? 0 : static_cast<int>(own_b.size()) - 1;
            const int ids[4] = {own_a[pos_a], own_b[pos_b], copy_a[pos_b], copy_b[pos_a]};
            const int patches[4] = {f.a.patch, f.b.patch, f.a.patch, f.b.patch};
            int first = -1;
            for (int c = 0; c < 4; ++c) {
                if (ids[c] < 0) continue;
                const int w = ids[c] - systems[patches[c]].map.n_interior;
                const int key = w_offset[patches[c]] + w;
                marked[key] = 1;
                if (first < 0)
                    first = key;
                else
                    uf.unite(first, key);
            }
        }
    }

    // global primal enumeration, deterministic in (patch, w) order
    std::map<int, int> root_to_global;
    for (int k = 0; k < np; ++k) {
        auto& d = data_[k];
        const int nw = systems[k].map.n_w;
        d.w_dual.assign(nw, -1);
        d.w_corner.assign(nw, -1);
        for (int w = 0; w < nw; ++w) {
            const int key = w_offset[k] + w;
            if (!marked[key]) continue;
            const int root = uf.find(key);
            auto [it, inserted] = root_to_global.try_emplace(root, n_primal_);
            if (inserted) ++n_primal_;
            d.w_corner[w] = static_cast<int>(d.corner_w.size());
            d.corner_w.push_back(w);
            d.corner_global.push_back(it->second);
        }
    }

    // dual enumeration and nodal offsets
    for (int k = 0; k < np; ++k) {
        auto& d = data_[k];
        d.dual_offset = n_dual_total_;
        for (int w = 0; w < systems[k].map.n_w; ++w)
            if (d.w_corner[w] < 0) {
                d.w_dual[w] = static_cast<int>(d.dual_w.size());
                d.dual_w.push_back(w);
            }
        n_dual_total_ += static_cast<int>(d.dual_w.size());
    }

    // copy/owner pairs; non-primal ones become multipliers
    std::vector<std::vector<int>> owner_use(np);
    for (int k = 0; k < np; ++k) owner_use[k].assign(systems[k].map.n_w, 0);
    for (int k = 0; k < np; ++k) {
        const auto& map = systems[k].map;
        for (int w = 0; w < map.n_w; ++w) {
            const auto& wd = map.w_dofs[w];
            if (!wd.is_copy) continue;
            const int l = mp.other_side(wd.iface, k).patch;
            const int owner_ext = systems[l].map.own_to_ext[wd.own_flat];
            if (owner_ext < 0) throw Error("IetiSystem: copy of an eliminated owner dof");
            const int w_owner = owner_ext - systems[l].map.n_interior;
            Multiplier m{k, w, l, w_owner, 0.5};
            all_pairs_.push_back(m);
            const bool copy_primal = data_[k].w_corner[w] >= 0;
            const bool owner_primal = data_[l].w_corner[w_owner] >= 0;
            if (copy_primal != owner_primal)
                throw Error("IetiSystem: inconsistent primal classification of a pair");
            if (!copy_primal) {
                owner_use[l][w_owner]++;
                multipliers_.push_back(m);
            }
        }
    }
    for (int k = 0; k < np; ++k)
        for (int w = 0; w < systems[k].map.n_w; ++w)
            if (owner_use[k][w] > 1)
                throw Error("IetiSystem: non-corner dof owned by more than one multiplier");

    // bordered factorizations (corners pinned) and the energy-minimal primal basis
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < np; ++k) {
        try {
            auto& d = data_[k];
            const auto& sys = systems[k];
            const int ni = sys.map.n_interior;
            d.bordered_ext.reserve(ni + d.dual_w.size());
            for (int i = 0; i < ni; ++i) d.bordered_ext.push_back(i);
            for (int w : d.dual_w) d.bordered_ext.push_back(ni + w);
            if (!d.bordered_ext.empty()) {
                try {
                    d.kc = std::make_unique<linalg::SpdFactorization>(
                        linalg::sparse_block(sys.K_e, d.bordered_ext, d.bordered_ext));
                } catch (const NotSpdError&) {
                    throw Error(
                        "IetiSystem: singular dual block; missing Dirichlet or primal constraints "
                        "on patch " +
                        std::to_string(k));
                }
            }

            const int nc = static_cast<int>(d.corner_w.size());
            d.phi = DenseMatrix::Zero(sys.map.n_ext(), nc);
            for (int j = 0; j < nc; ++j) {
                const int ext_c = ni + d.corner_w[j];
                d.phi(ext_c, j) = 1.0;
                if (d.bordered_ext.empty()) continue;
                Vector rhs(static_cast<int>(d.bordered_ext.size()));
                for (std::size_t r = 0; r < d.bordered_ext.size(); ++r)
                    rhs[static_cast<int>(r)] = -sys.K_e.coeff(d.bordered_ext[r], ext_c);
                const Vector x = d.kc->solve(rhs);
                for (std::size_t r = 0; r < d.bordered_ext.size(); ++r)
                    d.phi(d.bordered_ext[r], j) = x[static_cast<int>(r)];
            }
            d.s_loc = d.phi.transpose() * (sys.K_e * d.phi);
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);

    // coarse problem
    s_pp_ = DenseMatrix::Zero(n_primal_, n_primal_);
    for (int k = 0; k < np; ++k) {
        const auto& d = data_[k];
        for (std::size_t i = 0; i < d.corner_w.size(); ++i)
            for (std::size_t j = 0; j < d.corner_w.size(); ++j)
                s_pp_(d.corner_global[i], d.corner_global[j]) += d.s_loc(i, j);
    }
    if (n_primal_ > 0) {
        s_pp_llt_.compute(s_pp_);
        if (s_pp_llt_.info() != Eigen::Success)
            throw Error("IetiSystem: coarse problem not SPD; primal constraints insufficient");
    }
}

std::vector<int> IetiSystem::corner_w_dofs(int k) const { return data_[k].corner_w; }

std::vector<Vector> IetiSystem::expand(const Vector& wt) const {
    if (wt.size() != wt_size()) throw DimensionError("expand: size mismatch");
    std::vector<Vector> out(mp_->num_patches());
    for (int k = 0; k < mp_->num_patches(); ++k) {
        const auto& d = data_[k];
        const int nw = (*systems_)[k].map.n_w;
        out[k] = Vector::Zero(nw);
        for (int w = 0; w < nw; ++w) {
            if (d.w_dual[w] >= 0)
                out[k][w] = wt[d.dual_offset + d.w_dual[w]];
            else
                out[k][w] = wt[n_dual_total_ + d.corner_global[d.w_corner[w]]];
        }
    }
    return out;
}

Vector IetiSystem::gather(const std::vector<Vector>& w_patches) const {
    Vector out = Vector::Zero(wt_size());
    for (int k = 0; k < mp_->num_patches(); ++k) {
        const auto& d = data_[k];
        for (int w = 0; w < static_cast<int>(w_patches[k].size()); ++w) {
            if (d.w_dual[w] >= 0)
                out[d.dual_offset + d.w_dual[w]] = w_patches[k][w];
            else
                out[n_dual_total_ + d.corner_global[d.w_corner[w]]] += w_patches[k][w];
        }
    }
    return out;
}

Vector IetiSystem::stilde_apply(const Vector& wt) const {
    auto w = expand(wt);
    std::vector<Vector> y(w.size());
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < static_cast<int>(w.size()); ++k) y[k] = (*schur_)[k].schur_apply(w[k]);
    return gather(y);
}

Vector IetiSystem::dual_block_solve(int k, const Vector& b_dual) const {
    const auto& d = data_[k];
    const int nb = static_cast<int>(d.bordered_ext.size());
    if (nb == 0) return Vector::Zero(0);
    Vector rhs = Vector::Zero(nb);
    rhs.tail(static_cast<int>(d.dual_w.size())) = b_dual;
    const Vector x = d.kc->solve(rhs);
    return x.tail(static_cast<int>(d.dual_w.size()));
}

Vector IetiSystem::stilde_solve(const Vector& b) const {
    if (b.size() != wt_size()) throw DimensionError("stilde_solve: size mismatch");
    const int np = mp_->num_patches();

    std::vector<Vector> x_dual(np);
    Vector rhs_pi = b.tail(n_primal_);
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < np; ++k) {
        const auto& d = data_[k];
        const int nd = static_cast<int>(d.dual_w.size());
        x_dual[k] = dual_block_solve(k, b.segment(d.dual_offset, nd));
    }
    for (int k = 0; k < np; ++k) {
        const auto& d = data_[k];
        const int nd = static_cast<int>(d.dual_w.size());
        if (d.corner_w.empty() || nd == 0) continue;
        // phi rows at dual dofs
        Vector contrib = Vector::Zero(static_cast<int>(d.corner_w.size()));
        const int ni = (*systems_)[k].map.n_interior;
        const Vector b_dual = b.segment(d.dual_offset, nd);
        for (int j = 0; j < static_cast<int>(d.corner_w.size()); ++j) {
            double acc = 0.0;
            for (int a = 0; a < nd; ++a) acc += d.phi(ni + d.dual_w[a], j) * b_dual[a];
            contrib[j] = acc;
        }
        for (std::size_t j = 0; j < d.corner_w.size(); ++j)
            rhs_pi[d.corner_global[j]] += contrib[static_cast<int>(j)];
    }

    Vector u_pi = Vector::Zero(n_primal_);
    if (n_primal_ > 0) u_pi = s_pp_llt_.solve(rhs_pi);

    Vector out = Vector::Zero(wt_size());
    out.tail(n_primal_) = u_pi;
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < np; ++k) {
        const auto& d = data_[k];
        const int nd = static_cast<int>(d.dual_w.size());
        if (nd == 0) continue;
        Vector u_d = x_dual[k];
        const int ni = (*systems_)[k].map.n_interior;
        for (int j = 0; j < static_cast<int>(d.corner_w.size()); ++j) {
            const double c = u_pi[d.corner_global[j]];
            if (c == 0.0) continue;
            for (int a = 0; a < nd; ++a) u_d[a] += d.phi(ni + d.dual_w[a], j) * c;
        }
        out.segment(d.dual_offset, nd) = u_d;
    }
    return out;
}

Vector IetiSystem::jump_all(const std::vector<Vector>& w_patches) const {
    Vector out(static_cast<int>(all_pairs_.size()));
    for (std::size_t r = 0; r < all_pairs_.size(); ++r) {
        const auto& m = all_pairs_[r];
        out[static_cast<int>(r)] =
            w_patches[m.patch_copy][m.w_copy] - w_patches[m.patch_owner][m.w_owner];
    }
    return out;
}

Vector IetiSystem::bt_tilde(const Vector& lambda) const {
    if (lambda.size() != num_multipliers()) throw DimensionError("bt_tilde: size mismatch");
    Vector out = Vector::Zero(wt_size());
    for (std::size_t r = 0; r < multipliers_.size(); ++r) {
        const auto& m = multipliers_[r];
        out[data_[m.patch_copy].dual_offset + data_[m.patch_copy].w_dual[m.w_copy]] +=
            lambda[static_cast<int>(r)];
        out[data_[m.patch_owner].dual_offset + data_[m.patch_owner].w_dual[m.w_owner]] -=
            lambda[static_cast<int>(r)];
    }
    return out;
}

Vector IetiSystem::b_tilde(const Vector& wt) const {
    if (wt.size() != wt_size()) throw DimensionError("b_tilde: size mismatch");
    Vector out(num_multipliers());
    for (std::size_t r = 0; r < multipliers_.size(); ++r) {
        const auto& m = multipliers_[r];
        out[static_cast<int>(r)] =
            wt[data_[m.patch_copy].dual_offset + data_[m.patch_copy].w_dual[m.w_copy]] -
            wt[data_[m.patch_owner].dual_offset + data_[m.patch_owner].w_dual[m.w_owner]];
    }
    return out;
}

Vector IetiSystem::apply_F(const Vector& lambda) const {
    return b_tilde(stilde_solve(bt_tilde(lambda)));
}

Vector IetiSystem::apply_MsD_inv(const Vector& r) const {
    if (r.size() != num_multipliers()) throw DimensionError("apply_MsD_inv: size mismatch");
    const int np = mp_->num_patches();
    std::vector<Vector> w(np);
    for (int k = 0; k < np; ++k) w[k] = Vector::Zero((*systems_)[k].map.n_w);
    for (std::size_t i = 0; i < multipliers_.size(); ++i) {
        const auto& m = multipliers_[i];
        w[m.patch_copy][m.w_copy] += m.weight * r[static_cast<int>(i)];
        w[m.patch_owner][m.w_owner] -= m.weight * r[static_cast<int>(i)];
    }
    std::vector<Vector> y(np);
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < np; ++k) y[k] = (*schur_)[k].schur_apply(w[k]);
    Vector out = Vector::Zero(num_multipliers());
    for (std::size_t i = 0; i < multipliers_.size(); ++i) {
        const auto& m = multipliers_[i];
        out[static_cast<int>(i)] =
            m.weight * y[m.patch_copy][m.w_copy] - m.weight * y[m.patch_owner][m.w_owner];
    }
    return out;
}

std::vector<Vector> IetiSystem::condensed_loads() const {
    const int np = mp_->num_patches();
    std::vector<Vector> g(np);
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < np; ++k) {
        const auto& sys = (*systems_)[k];
        const int ni = sys.map.n_interior;
        const int nw = sys.map.n_w;
        const Vector f_i = sys.f.head(ni);
        const Vector f_w = sys.f.tail(nw);
        if (ni > 0) {
            const auto interior = sys.map.interior_indices();
            const auto wids = sys.map.w_indices();
            const linalg::SparseMatrix k_bi = linalg::sparse_block(sys.K_e, wids, interior);
            g[k] = f_w - k_bi * (*schur_)[k].interior_factorization().solve(f_i);
        } else {
            g[k] = f_w;
        }
    }
    return g;
}

Vector IetiSystem::assemble_gtilde(const std::vector<Vector>& condensed) const {
    return gather(condensed);
}

IetiSystem::Solution IetiSystem::recover_solution(const Vector& lambda) const {
    const auto g = condensed_loads();
    Vector rhs = assemble_gtilde(g);
    if (num_multipliers() > 0) rhs -= bt_tilde(lambda);
    const Vector wt = stilde_solve(rhs);
    const auto w = expand(wt);

    Solution sol;
    sol.ext.resize(mp_->num_patches());
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < mp_->num_patches(); ++k) {
        const auto& sys = (*systems_)[k];
        const Vector u_i = (*schur_)[k].interior_from_boundary(sys.f.head(sys.map.n_interior), w[k]);
        Vector full(sys.map.n_ext());
        full.head(sys.map.n_interior) = u_i;
        full.tail(sys.map.n_w) = w[k];
        sol.ext[k] = full;
    }
    const Vector jumps = jump_all(w);
    sol.jump_inf = jumps.size() > 0 ? jumps.cwiseAbs().maxCoeff() : 0.0;
    return sol;
}

DenseMatrix IetiSystem::dense_F() const {
    const int n = num_multipliers();
    if (n > 2000) throw DimensionError("dense_F: size guard exceeded");
    DenseMatrix f(n, n);
    Vector e = Vector::Zero(n);
    for (int j = 0; j < n; ++j) {
        e.setZero();
        e[j] = 1.0;
        f.col(j) = apply_F(e);
    }
    return 0.5 * (f + f.transpose());
}

DenseMatrix IetiSystem::dense_MsD_inv() const {
    const int n = num_multipliers();
    if (n > 2000) throw DimensionError("dense_MsD_inv: size guard exceeded");
    DenseMatrix m(n, n);
    Vector e = Vector::Zero(n);
    for (int j = 0; j < n; ++j) {
        e.setZero();
        e[j] = 1.0;
        m.col(j) = apply_MsD_inv(e);
    }
    return 0.5 * (m + m.transpose());
}

Vector IetiSystem::dense_spectrum_oracle() const {
    const DenseMatrix f = dense_F();
    const DenseMatrix p = dense_MsD_inv();
    auto [ev, vecs] = linalg::dense_sym_eig_vectors(p);
    const Vector sqrt_ev = ev.cwiseMax(0.0).cwiseSqrt();
    const DenseMatrix p_half = vecs * sqrt_ev.asDiagonal() * vecs.transpose();
    DenseMatrix a = p_half * f * p_half;
    a = 0.5 * (a + a.transpose());
    return linalg::dense_sym_eig(a);
}

IetiSolveResult solve_ieti(const MultiPatch& mp, std::vector<PatchSystem>& systems,
                           const std::vector<Vector>& loads, double tol, int maxit) {
    for (int k = 0; k < mp.num_patches(); ++k) systems[k].f = loads[k];

    std::vector<PatchSchur> schur;
    schur.reserve(systems.size());
    for (const auto& s : systems) schur.emplace_back(s);

    IetiSystem ieti(mp, systems, schur);

    IetiSolveResult res;
    res.n_multipliers = ieti.num_multipliers();
    res.n_primal = ieti.num_primal();

    if (ieti.num_multipliers() > 0) {
        const Vector d = ieti.b_tilde(ieti.stilde_solve(ieti.assemble_gtilde(ieti.condensed_loads())));
        res.pcg = pcg_solve([&](const Vector& x) { return ieti.apply_F(x); },
                            [&](const Vector& x) { return ieti.apply_MsD_inv(x); }, d, tol, maxit);
    } else {
        res.pcg.lambda = Vector::Zero(0);
        res.pcg.converged = true;
        res.pcg.lambda_min = res.pcg.lambda_max = res.pcg.kappa = 1.0;
    }

    auto sol = ieti.recover_solution(res.pcg.lambda);
    res.ext = std::move(sol.ext);
    res.jump_inf = sol.jump_inf;
    return res;
}

}  // namespace dgieti
