// SPDX-License-Identifier: Apache-2.0

#include "dgieti/norms.hpp"

#include "dgieti/quadrature.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace dgieti {

namespace {

struct FaceQuadPoint {
    double t;       // face parameter of patch k
    double s;       // face parameter of the neighbor
    double weight;  // physical arc measure
};

// Quadrature along the interface, merged breakpoints of both sides, arc
// length taken from patch k's parametrization.
std::vector<FaceQuadPoint> face_quadrature(const MultiPatch& mp, int iface, int k) {
    const Side& own = mp.side_of(iface, k);
    const Side& other = mp.other_side(iface, k);
    const Patch& pk = mp.patch(k);
    const Orientation orient = mp.interface(iface).orientation;
    const int fd = side_face_dir(own.id);
    const Vec2 dxi_dt = fd == 0 ? Vec2(1.0, 0.0) : Vec2(0.0, 1.0);

    const int order = std::max(std::max(pk.space().kv(0).degree(), pk.space().kv(1).degree()),
                               std::max(mp.patch(other.patch).space().kv(0).degree(),
                                        mp.patch(other.patch).space().kv(1).degree())) +
                      1;
    const auto& rule = gauss_rule(order);
    const auto breaks = merged_face_breakpoints(mp, iface, k);

    std::vector<FaceQuadPoint> pts;
    for (std::size_t seg = 0; seg + 1 < breaks.size(); ++seg) {
        const double t0 = breaks[seg], t1 = breaks[seg + 1];
        if (t1 - t0 <= 1e-14) continue;
        for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
            const double t = t0 + rule.nodes[g] * (t1 - t0);
            const Vec2 xi = side_param_point(own.id, t);
            const auto ge = pk.eval_geometry(xi[0], xi[1]);
            const double arc = (ge.jacobian * dxi_dt).norm();
            pts.push_back({t, oriented(orient, t), rule.weights[g] * (t1 - t0) * arc});
        }
    }
    return pts;
}

double eval_trace(const KnotVector& kv, const Vector& trace_coeffs, double t) {
    const auto b = kv.eval_basis(t);
    double v = 0.0;
    for (std::size_t j = 0; j < b.second.size(); ++j)
        v += trace_coeffs[b.first + static_cast<int>(j)] * b.second[j];
    return v;
}

Vector extract_trace(const TensorSplineSpace& space, const Vector& full, SideId side) {
    const auto layer = side_dof_layer(space, side);
    Vector t(static_cast<int>(layer.size()));
    for (std::size_t i = 0; i < layer.size(); ++i) t[static_cast<int>(i)] = full[layer[i]];
    return t;
}

double grad_energy_sq(const Patch& patch, const Vector& full, double alpha) {
    const auto& sp = patch.space();
    const int np = std::max(sp.kv(0).degree(), sp.kv(1).degree()) + 1;
    const auto& rule = gauss_rule(np);
    const auto b1 = sp.kv(0).breakpoints();
    const auto b2 = sp.kv(1).breakpoints();
    double acc = 0.0;
    for (std::size_t e1 = 0; e1 + 1 < b1.size(); ++e1)
        for (std::size_t e2 = 0; e2 + 1 < b2.size(); ++e2)
            for (std::size_t g1 = 0; g1 < rule.nodes.size(); ++g1)
                for (std::size_t g2 = 0; g2 < rule.nodes.size(); ++g2) {
                    const double x1 = b1[e1] + rule.nodes[g1] * (b1[e1 + 1] - b1[e1]);
                    const double x2 = b2[e2] + rule.nodes[g2] * (b2[e2 + 1] - b2[e2]);
                    const auto se = sp.eval(full, x1, x2);
                    const auto ge = patch.eval_geometry(x1, x2);
                    const Vec2 gp = ge.jacobian.inverse().transpose() * se.gradient;
                    acc += alpha * gp.squaredNorm() * ge.jacobian.determinant() *
                           rule.weights[g1] * rule.weights[g2] * (b1[e1 + 1] - b1[e1]) *
                           (b2[e2 + 1] - b2[e2]);
                }
    return acc;
}

}  // namespace

double interface_jump_energy_sq(const MultiPatch& mp, const std::vector<Vector>& own_full,
                                double delta) {
    double acc = 0.0;
    for (int k = 0; k < mp.num_patches(); ++k) {
        const Patch& pk = mp.patch(k);
        for (int i : mp.interfaces_of(k)) {
            const Side& own = mp.side_of(i, k);
            const Side& other = mp.other_side(i, k);
            const Patch& pl = mp.patch(other.patch);
            const double h_kl =
                harmonic_average(compute_metrics(pk).h, compute_metrics(pl).h);
            const Vector tr_k = extract_trace(pk.space(), own_full[k], own.id);
            const Vector tr_l = extract_trace(pl.space(), own_full[other.patch], other.id);
            const KnotVector& kv_k = pk.space().kv(side_face_dir(own.id));
            const KnotVector& kv_l = pl.space().kv(side_face_dir(other.id));
            double jump_sq = 0.0;
            for (const auto& q : face_quadrature(mp, i, k)) {
                const double d = eval_trace(kv_k, tr_k, q.t) - eval_trace(kv_l, tr_l, q.s);
                jump_sq += d * d * q.weight;
            }
            acc += delta * pk.alpha() / h_kl * jump_sq;
        }
    }
    return acc;
}

double dg_norm_sq(const MultiPatch& mp, const std::vector<Vector>& own_full, double delta) {
    if (static_cast<int>(own_full.size()) != mp.num_patches())
        throw DimensionError("dg_norm_sq: one coefficient vector per patch expected");
    double acc = interface_jump_energy_sq(mp, own_full, delta);
    for (int k = 0; k < mp.num_patches(); ++k) {
        const Patch& pk = mp.patch(k);
        if (own_full[k].size() != pk.space().size())
            throw DimensionError("dg_norm_sq: coefficient size mismatch");
        acc += grad_energy_sq(pk, own_full[k], pk.alpha());
    }
    return acc;
}

double dg_norm(const MultiPatch& mp, const std::vector<Vector>& own_full, double delta) {
    return std::sqrt(dg_norm_sq(mp, own_full, delta));
}

double dg_norm_extended_sq(const MultiPatch& mp, int k, const ExtendedCoeffs& u, double delta) {
    const Patch& pk = mp.patch(k);
    if (u.own.size() != pk.space().size())
        throw DimensionError("dg_norm_extended_sq: coefficient size mismatch");
    double acc = grad_energy_sq(pk, u.own, pk.alpha());
    for (int i : mp.interfaces_of(k)) {
        const Side& own = mp.side_of(i, k);
        const Side& other = mp.other_side(i, k);
        const Patch& pl = mp.patch(other.patch);
        const double h_kl = harmonic_average(compute_metrics(pk).h, compute_metrics(pl).h);
        const Vector tr_k = extract_trace(pk.space(), u.own, own.id);
        const Vector& copy = u.copies.at(i);
        const KnotVector& kv_k = pk.space().kv(side_face_dir(own.id));
        const KnotVector& kv_l = pl.space().kv(side_face_dir(other.id));
        double jump_sq = 0.0;
        for (const auto& q : face_quadrature(mp, i, k)) {
            const double d = eval_trace(kv_k, tr_k, q.t) - eval_trace(kv_l, copy, q.s);
            jump_sq += d * d * q.weight;
        }
        acc += delta * pk.alpha() / h_kl * jump_sq;
    }
    return acc;
}

double l2_norm_sq(const Patch& patch, const Vector& full_coeffs) {
    const auto& sp = patch.space();
    const int np = std::max(sp.kv(0).degree(), sp.kv(1).degree()) + 1;
    const auto& rule = gauss_rule(np);
    const auto b1 = sp.kv(0).breakpoints();
    const auto b2 = sp.kv(1).breakpoints();
    double acc = 0.0;
    for (std::size_t e1 = 0; e1 + 1 < b1.size(); ++e1)
        for (std::size_t e2 = 0; e2 + 1 < b2.size(); ++e2)
            for (std::size_t g1 = 0; g1 < rule.nodes.size(); ++g1)
                for (std::size_t g2 = 0; g2 < rule.nodes.size(); ++g2) {
                    const double x1 = b1[e1] + rule.nodes[g1] * (b1[e1 + 1] - b1[e1]);
                    const double x2 = b2[e2] + rule.nodes[g2] * (b2[e2 + 1] - b2[e2]);
                    const auto se = sp.eval(full_coeffs, x1, x2);
                    const auto ge = patch.eval_geometry(x1, x2);
                    acc += se.value * se.value * ge.jacobian.determinant() * rule.weights[g1] *
                           rule.weights[g2] * (b1[e1 + 1] - b1[e1]) * (b2[e2 + 1] - b2[e2]);
                }
    return acc;
}

double h1_seminorm_sq(const Patch& patch, const Vector& full_coeffs) {
    const linalg::SparseMatrix k1 = volume_stiffness(patch, 1.0);
    return full_coeffs.dot(k1 * full_coeffs);
}

FaceGram build_face_gram(const MultiPatch& mp, int iface, int k) {
    const Side& own = mp.side_of(iface, k);
    const Side& other = mp.other_side(iface, k);
    const KnotVector& kv_k = mp.patch(k).space().kv(side_face_dir(own.id));
    const KnotVector& kv_l = mp.patch(other.patch).space().kv(side_face_dir(other.id));
    const int nk = kv_k.num_basis();
    const int nl = kv_l.num_basis();

    FaceGram g;
    g.mass = DenseMatrix::Zero(nl, nl);
    g.mixed = DenseMatrix::Zero(nl, nk);
    for (const auto& q : face_quadrature(mp, iface, k)) {
        const auto bl = kv_l.eval_basis(q.s);
        const auto bk = kv_k.eval_basis(q.t);
        for (std::size_t i = 0; i < bl.second.size(); ++i) {
            const int gi = bl.first + static_cast<int>(i);
            for (std::size_t j = 0; j < bl.second.size(); ++j)
                g.mass(gi, bl.first + static_cast<int>(j)) +=
                    bl.second[i] * bl.second[j] * q.weight;
            for (std::size_t j = 0; j < bk.second.size(); ++j)
                g.mixed(gi, bk.first + static_cast<int>(j)) +=
                    bl.second[i] * bk.second[j] * q.weight;
        }
    }
    return g;
}

Vector l2_project_face(const MultiPatch& mp, int iface, int k, const Vector& own_trace) {
    const FaceGram g = build_face_gram(mp, iface, k);
    if (own_trace.size() != g.mixed.cols())
        throw DimensionError("l2_project_face: trace coefficient size mismatch");
    Eigen::LLT<DenseMatrix> llt(g.mass);
    if (llt.info() != Eigen::Success)
        throw NotSpdError("l2_project_face: face Gram matrix not SPD");
    return llt.solve(g.mixed * own_trace);
}

double face_projection_error_sq(const MultiPatch& mp, int iface, int k, const Vector& own_trace) {
    const Vector proj = l2_project_face(mp, iface, k, own_trace);
    const Side& own = mp.side_of(iface, k);
    const Side& other = mp.other_side(iface, k);
    const KnotVector& kv_k = mp.patch(k).space().kv(side_face_dir(own.id));
    const KnotVector& kv_l = mp.patch(other.patch).space().kv(side_face_dir(other.id));
    double acc = 0.0;
    for (const auto& q : face_quadrature(mp, iface, k)) {
        const double d = eval_trace(kv_k, own_trace, q.t) - eval_trace(kv_l, proj, q.s);
        acc += d * d * q.weight;
    }
    return acc;
}

DiscreteNorms discrete_norms(const TensorSplineSpace& space, const Vector& full_coeffs) {
    if (full_coeffs.size() != space.size())
        throw DimensionError("discrete_norms: coefficient size mismatch");
    const int m1 = space.dim(0), m2 = space.dim(1);
    const double hh = space.mesh_size();
    DiscreteNorms n{0.0, 0.0};
    n.box_sq = full_coeffs.squaredNorm() * hh * hh;
    for (int i2 = 0; i2 < m2; ++i2)
        for (int i1 = 1; i1 < m1; ++i1) {
            const double d = full_coeffs[space.flat(i1, i2)] - full_coeffs[space.flat(i1 - 1, i2)];
            n.grad_sq += d * d;
        }
    for (int i2 = 1; i2 < m2; ++i2)
        for (int i1 = 0; i1 < m1; ++i1) {
            const double d = full_coeffs[space.flat(i1, i2)] - full_coeffs[space.flat(i1, i2 - 1)];
            n.grad_sq += d * d;
        }
    return n;
}

double face_box_sq(const Vector& coeffs, double hpar) { return coeffs.squaredNorm() * hpar; }

double discrete_dg_norm_sq(const MultiPatch& mp, int k, const ExtendedCoeffs& u, double delta) {
    const Patch& pk = mp.patch(k);
    double acc = discrete_norms(pk.space(), u.own).grad_sq;
    const double hk = pk.space().mesh_size();
    for (int i : mp.interfaces_of(k)) {
        const Side& own = mp.side_of(i, k);
        const Side& other = mp.other_side(i, k);
        const double hl = mp.patch(other.patch).space().mesh_size();
        const double h_kl = harmonic_average(hk, hl);
        const Vector trace = extract_trace(pk.space(), u.own, own.id);
        const Vector proj = l2_project_face(mp, i, k, trace);
        acc += delta / h_kl * face_box_sq(u.copies.at(i) - proj, hl);
    }
    return acc;
}

}  // namespace dgieti
