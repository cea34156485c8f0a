// SPDX-License-Identifier: Apache-2.0

#include "dgieti/assembly.hpp"

#include "dgieti/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace dgieti {

namespace {

// 1D basis values/derivatives tabulated at Gauss nodes of every nonempty span.
struct Basis1DTable {
    struct Span {
        double a, b;
        int first;
        std::vector<std::vector<double>> vals;  // per node: p+1 values
        std::vector<std::vector<double>> ders;
        std::vector<double> nodes;  // parameter coordinates
        std::vector<double> weights;
    };
    std::vector<Span> spans;

    Basis1DTable(const KnotVector& kv, int npoints) {
        const auto& rule = gauss_rule(npoints);
        const auto bp = kv.breakpoints();
        for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
            Span sp;
            sp.a = bp[i];
            sp.b = bp[i + 1];
            for (int g = 0; g < npoints; ++g) {
                const double x = sp.a + rule.nodes[g] * (sp.b - sp.a);
                auto bd = kv.eval_basis_deriv(x);
                sp.first = bd.first;
                sp.vals.push_back(std::move(bd.values));
                sp.ders.push_back(std::move(bd.derivs));
                sp.nodes.push_back(x);
                sp.weights.push_back(rule.weights[g] * (sp.b - sp.a));
            }
            spans.push_back(std::move(sp));
        }
    }
};

template <typename Emit>
void for_each_volume_point(const Patch& patch, int npoints, const Emit& emit) {
    const auto& sp = patch.space();
    Basis1DTable t1(sp.kv(0), npoints);
    Basis1DTable t2(sp.kv(1), npoints);
    for (const auto& s1 : t1.spans)
        for (const auto& s2 : t2.spans)
            for (std::size_t g1 = 0; g1 < s1.nodes.size(); ++g1)
                for (std::size_t g2 = 0; g2 < s2.nodes.size(); ++g2)
                    emit(s1, g1, s2, g2, s1.weights[g1] * s2.weights[g2]);
}

}  // namespace

std::vector<int> PatchDofMap::interior_indices() const {
    std::vector<int> out(n_interior);
    for (int i = 0; i < n_interior; ++i) out[i] = i;
    return out;
}

std::vector<int> PatchDofMap::w_indices() const {
    std::vector<int> out(n_w);
    for (int i = 0; i < n_w; ++i) out[i] = n_interior + i;
    return out;
}

std::vector<PatchDofMap> build_dof_maps(const MultiPatch& mp) {
    std::vector<PatchDofMap> maps(mp.num_patches());

    // Dirichlet-eliminated flats per patch, needed across patches for copies.
    std::vector<std::set<int>> eliminated(mp.num_patches());
    for (int k = 0; k < mp.num_patches(); ++k)
        for (int s = 0; s < 4; ++s)
            if (mp.is_dirichlet(k, static_cast<SideId>(s)))
                for (int flat : side_dof_layer(mp.patch(k).space(), static_cast<SideId>(s)))
                    eliminated[k].insert(flat);

    for (int k = 0; k < mp.num_patches(); ++k) {
        PatchDofMap& m = maps[k];
        m.patch = k;
        const int n_own = mp.patch(k).space().size();
        m.own_to_ext.assign(n_own, -1);

        std::set<int> w_own;
        for (int i : mp.interfaces_of(k)) {
            const Side& own = mp.side_of(i, k);
            for (int flat : side_dof_layer(mp.patch(k).space(), own.id))
                if (!eliminated[k].count(flat)) w_own.insert(flat);
        }

        int next = 0;
        for (int flat = 0; flat < n_own; ++flat)
            if (!eliminated[k].count(flat) && !w_own.count(flat)) m.own_to_ext[flat] = next++;
        m.n_interior = next;

        for (int flat : w_own) {
            m.own_to_ext[flat] = next++;
            m.w_dofs.push_back({false, -1, -1, flat});
        }
        for (int i : mp.interfaces_of(k)) {
            const Side& other = mp.other_side(i, k);
            const auto owner_layer = side_dof_layer(mp.patch(other.patch).space(), other.id);
            auto& slots = m.copy_ext[i];
            slots.assign(owner_layer.size(), -1);
            for (std::size_t pos = 0; pos < owner_layer.size(); ++pos) {
                if (eliminated[other.patch].count(owner_layer[pos])) continue;
                slots[pos] = next++;
                m.w_dofs.push_back({true, i, static_cast<int>(pos), owner_layer[pos]});
            }
        }
        m.n_w = next - m.n_interior;

        for (int i : mp.interfaces_of(k)) {
            const Side& own = mp.side_of(i, k);
            const auto layer = side_dof_layer(mp.patch(k).space(), own.id);
            auto& slots = m.own_face_ext[i];
            slots.assign(layer.size(), -1);
            for (std::size_t pos = 0; pos < layer.size(); ++pos)
                slots[pos] = m.own_to_ext[layer[pos]];
        }
    }
    return maps;
}

linalg::SparseMatrix volume_stiffness(const Patch& patch, double alpha_override,
                                      int extra_points) {
    const double alpha = alpha_override > 0.0 ? alpha_override : patch.alpha();
    const auto& sp = patch.space();
    const int p1 = sp.kv(0).degree(), p2 = sp.kv(1).degree();
    const int npoints = std::max(p1, p2) + 1 + extra_points;
    const int m1 = sp.dim(0);

    std::vector<linalg::Triplet> trips;
    for_each_volume_point(patch, npoints, [&](const auto& s1, std::size_t g1, const auto& s2,
                                              std::size_t g2, double w) {
        const auto ge = patch.eval_geometry(s1.nodes[g1], s2.nodes[g2]);
        const double det = ge.jacobian.determinant();
        const Mat2 invJT = ge.jacobian.inverse().transpose();

        const int nf1 = p1 + 1, nf2 = p2 + 1;
        std::vector<Vec2> grads(nf1 * nf2);
        std::vector<int> flats(nf1 * nf2);
        for (int j2 = 0; j2 < nf2; ++j2)
            for (int j1 = 0; j1 < nf1; ++j1) {
                const int a = j2 * nf1 + j1;
                grads[a] = invJT * Vec2(s1.ders[g1][j1] * s2.vals[g2][j2],
                                        s1.vals[g1][j1] * s2.ders[g2][j2]);
                flats[a] = (s2.first + j2) * m1 + (s1.first + j1);
            }
        const double c = alpha * det * w;
        for (std::size_t a = 0; a < grads.size(); ++a)
            for (std::size_t b = 0; b < grads.size(); ++b) {
                const double v = c * grads[a].dot(grads[b]);
                if (v != 0.0) trips.emplace_back(flats[a], flats[b], v);
            }
    });
    return linalg::sparse_from_triplets(sp.size(), sp.size(), trips);
}

std::vector<double> merged_face_breakpoints(const MultiPatch& mp, int iface, int k) {
    const Side& own = mp.side_of(iface, k);
    const Side& other = mp.other_side(iface, k);
    const Orientation orient = mp.interface(iface).orientation;

    std::vector<double> pts =
        mp.patch(k).space().kv(side_face_dir(own.id)).breakpoints();
    for (double s : mp.patch(other.patch).space().kv(side_face_dir(other.id)).breakpoints())
        pts.push_back(oriented(orient, s));
    std::sort(pts.begin(), pts.end());
    std::vector<double> out;
    for (double t : pts)
        if (out.empty() || t - out.back() > 1e-12) out.push_back(t);
    return out;
}

InterfaceTerms interface_terms(const MultiPatch& mp, int iface, int k, double delta,
                               const std::vector<PatchDofMap>& maps) {
    if (delta <= 0.0) throw std::invalid_argument("interface_terms: delta must be positive");
    const Side& own = mp.side_of(iface, k);
    const Side& other = mp.other_side(iface, k);
    const Orientation orient = mp.interface(iface).orientation;
    const Patch& pk = mp.patch(k);
    const Patch& pl = mp.patch(other.patch);
    const PatchDofMap& map = maps[k];

    const double h_kl = harmonic_average(compute_metrics(pk).h, compute_metrics(pl).h);
    const double pen = delta * pk.alpha() / h_kl;

    const int fd = side_face_dir(own.id);
    const KnotVector& kv_face_l = pl.space().kv(side_face_dir(other.id));
    const int order = std::max(std::max(pk.space().kv(0).degree(), pk.space().kv(1).degree()),
                               std::max(pl.space().kv(0).degree(), pl.space().kv(1).degree())) +
                      1;
    const auto& rule = gauss_rule(order);
    const auto breaks = merged_face_breakpoints(mp, iface, k);
    const Vec2 nu_hat = side_param_normal(own.id);
    const Vec2 dxi_dt = fd == 0 ? Vec2(1.0, 0.0) : Vec2(0.0, 1.0);

    const int p1 = pk.space().kv(0).degree(), p2 = pk.space().kv(1).degree();
    const int n_own_active = (p1 + 1) * (p2 + 1);
    const int m1 = pk.space().dim(0);

    InterfaceTerms out;
    // active dof workspace: own functions first, then neighbor face copies
    std::vector<int> ext;
    std::vector<double> jump, dn;

    for (std::size_t seg = 0; seg + 1 < breaks.size(); ++seg) {
        const double t0 = breaks[seg], t1 = breaks[seg + 1];
        if (t1 - t0 <= 1e-14) continue;
        for (int g = 0; g < order; ++g) {
            const double t = t0 + rule.nodes[g] * (t1 - t0);
            const Vec2 xi = side_param_point(own.id, t);
            const auto ge = pk.eval_geometry(xi[0], xi[1]);
            const Mat2 invJT = ge.jacobian.inverse().transpose();
            const double arc = (ge.jacobian * dxi_dt).norm();
            const double w = rule.weights[g] * (t1 - t0) * arc;
            const Vec2 n = (invJT * nu_hat).normalized();

            ext.clear();
            jump.clear();
            dn.clear();

            const auto b1 = pk.space().kv(0).eval_basis_deriv(xi[0]);
            const auto b2 = pk.space().kv(1).eval_basis_deriv(xi[1]);
            for (int j2 = 0; j2 <= p2; ++j2)
                for (int j1 = 0; j1 <= p1; ++j1) {
                    const int flat = (b2.first + j2) * m1 + (b1.first + j1);
                    const Vec2 gp = invJT * Vec2(b1.derivs[j1] * b2.values[j2],
                                                 b1.values[j1] * b2.derivs[j2]);
                    ext.push_back(map.own_to_ext[flat]);
                    jump.push_back(-b1.values[j1] * b2.values[j2]);
                    dn.push_back(gp.dot(n));
                }

            const double s_par = oriented(orient, t);
            const auto bn = kv_face_l.eval_basis(s_par);
            const auto& copies = map.copy_ext.at(iface);
            for (std::size_t j = 0; j < bn.second.size(); ++j) {
                ext.push_back(copies[bn.first + static_cast<int>(j)]);
                jump.push_back(bn.second[j]);
                dn.push_back(0.0);
            }

            const double half_alpha = 0.5 * pk.alpha();
            for (std::size_t a = 0; a < ext.size(); ++a) {
                if (ext[a] < 0) continue;
                for (std::size_t b = 0; b < ext.size(); ++b) {
                    if (ext[b] < 0) continue;
                    const double pv = pen * jump[a] * jump[b] * w;
                    if (pv != 0.0) out.p.emplace_back(ext[a], ext[b], pv);
                    if (static_cast<int>(a) < n_own_active || static_cast<int>(b) < n_own_active) {
                        const double sv = half_alpha * (dn[a] * jump[b] + dn[b] * jump[a]) * w;
                        if (sv != 0.0) out.s.emplace_back(ext[a], ext[b], sv);
                    }
                }
            }
        }
    }
    return out;
}

PatchSystem assemble_patch(const MultiPatch& mp, int k, double delta,
                           const std::vector<PatchDofMap>& maps) {
    if (delta <= 0.0) throw std::invalid_argument("assemble_patch: delta must be positive");
    const Patch& patch = mp.patch(k);
    const PatchDofMap& map = maps[k];
    const int n = map.n_ext();

    PatchSystem sys;
    sys.map = map;
    sys.delta = delta;

    const auto metrics = compute_metrics(patch);
    sys.h = metrics.h;
    sys.H = metrics.H;

    // volume part, mapped onto active extended indices
    std::vector<linalg::Triplet> vol, pen, all;
    {
        const linalg::SparseMatrix kv = volume_stiffness(patch);
        for (int c = 0; c < kv.outerSize(); ++c)
            for (linalg::SparseMatrix::InnerIterator it(kv, c); it; ++it) {
                const int r = map.own_to_ext[it.row()];
                const int cc = map.own_to_ext[c];
                if (r >= 0 && cc >= 0) vol.emplace_back(r, cc, it.value());
            }
    }
    all = vol;

    for (int i : mp.interfaces_of(k)) {
        auto terms = interface_terms(mp, i, k, delta, maps);
        const Side& other = mp.other_side(i, k);
        sys.h_kl[i] = harmonic_average(metrics.h, compute_metrics(mp.patch(other.patch)).h);
        pen.insert(pen.end(), terms.p.begin(), terms.p.end());
        all.insert(all.end(), terms.s.begin(), terms.s.end());
        all.insert(all.end(), terms.p.begin(), terms.p.end());
    }

    sys.K_e = linalg::sparse_from_triplets(n, n, all);
    sys.P_pen = linalg::sparse_from_triplets(n, n, pen);
    sys.K_vol = linalg::sparse_from_triplets(n, n, vol);
    sys.f = Vector::Zero(n);
    return sys;
}

Vector assemble_load(const MultiPatch& mp, int k, const PatchDofMap& map, const VolumeLoad& f,
                     const BoundaryFlux& g_n) {
    const Patch& patch = mp.patch(k);
    const auto& sp = patch.space();
    const int p1 = sp.kv(0).degree(), p2 = sp.kv(1).degree();
    const int m1 = sp.dim(0);
    Vector out = Vector::Zero(map.n_ext());

    if (f) {
        for_each_volume_point(patch, std::max(p1, p2) + 1,
                              [&](const auto& s1, std::size_t g1, const auto& s2, std::size_t g2,
                                  double w) {
                                  const auto ge = patch.eval_geometry(s1.nodes[g1], s2.nodes[g2]);
                                  const double c =
                                      f(ge.point) * ge.jacobian.determinant() * w;
                                  for (int j2 = 0; j2 <= p2; ++j2)
                                      for (int j1 = 0; j1 <= p1; ++j1) {
                                          const int ext =
                                              map.own_to_ext[(s2.first + j2) * m1 + (s1.first + j1)];
                                          if (ext >= 0)
                                              out[ext] += c * s1.vals[g1][j1] * s2.vals[g2][j2];
                                      }
                              });
    }

    if (g_n) {
        for (int s = 0; s < 4; ++s) {
            const SideId side = static_cast<SideId>(s);
            const bool neumann = std::any_of(
                mp.neumann_sides().begin(), mp.neumann_sides().end(),
                [&](const Side& ns) { return ns.patch == k && ns.id == side; });
            if (!neumann) continue;

            const int fd = side_face_dir(side);
            const KnotVector& kv = sp.kv(fd);
            const auto layer = side_dof_layer(sp, side);
            const Vec2 nu_hat = side_param_normal(side);
            const Vec2 dxi_dt = fd == 0 ? Vec2(1.0, 0.0) : Vec2(0.0, 1.0);
            const auto& rule = gauss_rule(kv.degree() + 1);
            const auto bp = kv.breakpoints();
            for (std::size_t e = 0; e + 1 < bp.size(); ++e)
                for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
                    const double t = bp[e] + rule.nodes[g] * (bp[e + 1] - bp[e]);
                    const Vec2 xi = side_param_point(side, t);
                    const auto ge = patch.eval_geometry(xi[0], xi[1]);
                    const Vec2 n = (ge.jacobian.inverse().transpose() * nu_hat).normalized();
                    const double arc = (ge.jacobian * dxi_dt).norm();
                    const double c =
                        g_n(ge.point, n) * arc * rule.weights[g] * (bp[e + 1] - bp[e]);
                    const auto bv = kv.eval_basis(t);
                    for (std::size_t j = 0; j < bv.second.size(); ++j) {
                        const int ext = map.own_to_ext[layer[bv.first + static_cast<int>(j)]];
                        if (ext >= 0) out[ext] += c * bv.second[j];
                    }
                }
        }
    }
    return out;
}

std::vector<PatchSystem> assemble_all(const MultiPatch& mp, double delta) {
    const auto maps = build_dof_maps(mp);
    std::vector<PatchSystem> systems(mp.num_patches());
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < mp.num_patches(); ++k) {
        try {
            systems[k] = assemble_patch(mp, k, delta, maps);
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return systems;
}

GlobalDofMap build_global_dof_map(const MultiPatch& mp, const std::vector<PatchDofMap>& maps) {
    GlobalDofMap g;
    g.own_to_global.resize(mp.num_patches());
    int next = 0;
    for (int k = 0; k < mp.num_patches(); ++k) {
        g.own_to_global[k].assign(mp.patch(k).space().size(), -1);
        for (int flat = 0; flat < mp.patch(k).space().size(); ++flat)
            if (maps[k].own_to_ext[flat] >= 0) g.own_to_global[k][flat] = next++;
    }
    g.n_global = next;
    return g;
}

namespace {

// extended index -> global coupled index (copies resolve to their owner)
std::vector<int> ext_to_global(const MultiPatch& mp, const PatchDofMap& map,
                               const GlobalDofMap& gmap) {
    std::vector<int> out(map.n_ext(), -1);
    const int k = map.patch;
    for (int flat = 0; flat < static_cast<int>(map.own_to_ext.size()); ++flat)
        if (map.own_to_ext[flat] >= 0) out[map.own_to_ext[flat]] = gmap.own_to_global[k][flat];
    for (int w = 0; w < map.n_w; ++w) {
        const auto& d = map.w_dofs[w];
        if (!d.is_copy) continue;
        const int owner = mp.other_side(d.iface, k).patch;
        out[map.n_interior + w] = gmap.own_to_global[owner][d.own_flat];
    }
    return out;
}

}  // namespace

linalg::SparseMatrix assemble_global_matrix(const MultiPatch& mp,
                                            const std::vector<PatchSystem>& systems,
                                            const GlobalDofMap& gmap) {
    std::vector<linalg::Triplet> trips;
    for (int k = 0; k < mp.num_patches(); ++k) {
        const auto e2g = ext_to_global(mp, systems[k].map, gmap);
        const auto& m = systems[k].K_e;
        for (int c = 0; c < m.outerSize(); ++c)
            for (linalg::SparseMatrix::InnerIterator it(m, c); it; ++it)
                trips.emplace_back(e2g[it.row()], e2g[c], it.value());
    }
    return linalg::sparse_from_triplets(gmap.n_global, gmap.n_global, trips);
}

Vector assemble_global_load(const MultiPatch& mp, const std::vector<PatchSystem>& systems,
                            const GlobalDofMap& gmap, const std::vector<Vector>& patch_loads) {
    Vector out = Vector::Zero(gmap.n_global);
    for (int k = 0; k < mp.num_patches(); ++k) {
        const auto e2g = ext_to_global(mp, systems[k].map, gmap);
        for (int i = 0; i < patch_loads[k].size(); ++i)
            if (patch_loads[k][i] != 0.0) out[e2g[i]] += patch_loads[k][i];
    }
    return out;
}

ExtendedCoeffs to_full(const MultiPatch& mp, int k, const PatchDofMap& map, const Vector& ext) {
    if (ext.size() != map.n_ext()) throw DimensionError("to_full: size mismatch");
    ExtendedCoeffs full;
    full.own = Vector::Zero(mp.patch(k).space().size());
    for (int flat = 0; flat < full.own.size(); ++flat)
        if (map.own_to_ext[flat] >= 0) full.own[flat] = ext[map.own_to_ext[flat]];
    for (const auto& [iface, slots] : map.copy_ext) {
        Vector c = Vector::Zero(static_cast<int>(slots.size()));
        for (std::size_t pos = 0; pos < slots.size(); ++pos)
            if (slots[pos] >= 0) c[pos] = ext[slots[pos]];
        full.copies[iface] = std::move(c);
    }
    return full;
}

Vector from_full(const MultiPatch& mp, int k, const PatchDofMap& map, const ExtendedCoeffs& full) {
    if (full.own.size() != mp.patch(k).space().size())
        throw DimensionError("from_full: own size mismatch");
    Vector ext = Vector::Zero(map.n_ext());
    for (int flat = 0; flat < full.own.size(); ++flat)
        if (map.own_to_ext[flat] >= 0) ext[map.own_to_ext[flat]] = full.own[flat];
    for (const auto& [iface, slots] : map.copy_ext) {
        const auto it = full.copies.find(iface);
        if (it == full.copies.end()) continue;
        for (std::size_t pos = 0; pos < slots.size(); ++pos)
            if (slots[pos] >= 0) ext[slots[pos]] = it->second[pos];
    }
    return ext;
}

FieldEval eval_field(const Patch& patch, const Vector& full_coeffs, double x1, double x2) {
    const auto se = patch.space().eval(full_coeffs, x1, x2);
    const auto ge = patch.eval_geometry(x1, x2);
    return {se.value, ge.jacobian.inverse().transpose() * se.gradient, ge.point};
}

}  // namespace dgieti
