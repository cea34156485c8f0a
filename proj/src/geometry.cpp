// SPDX-License-Identifier: Apache-2.0

#include "dgieti/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dgieti {

const char* side_name(SideId s) {
    switch (s) {
        case SideId::west: return "west";
        case SideId::east: return "east";
        case SideId::south: return "south";
        case SideId::north: return "north";
    }
    return "?";
}

SideId side_from_name(const std::string& name) {
    if (name == "west") return SideId::west;
    if (name == "east") return SideId::east;
    if (name == "south") return SideId::south;
    if (name == "north") return SideId::north;
    throw ConfigError("unknown side name: " + name);
}

int side_face_dir(SideId s) {
    return (s == SideId::west || s == SideId::east) ? 1 : 0;
}

Vec2 side_param_point(SideId s, double t) {
    switch (s) {
        case SideId::west: return {0.0, t};
        case SideId::east: return {1.0, t};
        case SideId::south: return {t, 0.0};
        case SideId::north: return {t, 1.0};
    }
    return {0.0, 0.0};
}

Vec2 side_param_normal(SideId s) {
    switch (s) {
        case SideId::west: return {-1.0, 0.0};
        case SideId::east: return {1.0, 0.0};
        case SideId::south: return {0.0, -1.0};
        case SideId::north: return {0.0, 1.0};
    }
    return {0.0, 0.0};
}

Patch::Patch(TensorSplineSpace geom_space, std::vector<Vec2> control_points,
             TensorSplineSpace solution_space, double alpha)
    : geom_space_(std::move(geom_space)),
      cps_(std::move(control_points)),
      space_(std::move(solution_space)),
      alpha_(alpha) {
    if (static_cast<int>(cps_.size()) != geom_space_.size())
        throw DimensionError("Patch: control net size does not match geometry space");
    if (alpha_ <= 0.0) throw std::domain_error("Patch: alpha must be positive");
}

Patch::GeomEval Patch::eval_geometry(double x1, double x2) const {
    const auto b1 = geom_space_.kv(0).eval_basis_deriv(x1);
    const auto b2 = geom_space_.kv(1).eval_basis_deriv(x2);
    const int m1 = geom_space_.dim(0);
    GeomEval out;
    out.point.setZero();
    out.jacobian.setZero();
    for (int j2 = 0; j2 <= geom_space_.kv(1).degree(); ++j2)
        for (int j1 = 0; j1 <= geom_space_.kv(0).degree(); ++j1) {
            const Vec2& p = cps_[(b2.first + j2) * m1 + (b1.first + j1)];
            out.point += p * (b1.values[j1] * b2.values[j2]);
            out.jacobian.col(0) += p * (b1.derivs[j1] * b2.values[j2]);
            out.jacobian.col(1) += p * (b1.values[j1] * b2.derivs[j2]);
        }
    if (out.jacobian.determinant() <= 0.0)
        throw GeometryError("eval_geometry: non-positive Jacobian determinant");
    return out;
}

MultiPatch::MultiPatch(std::vector<Patch> patches, std::vector<Interface> interfaces,
                       std::vector<Side> dirichlet_sides, std::vector<Side> neumann_sides)
    : patches_(std::move(patches)),
      interfaces_(std::move(interfaces)),
      dirichlet_(std::move(dirichlet_sides)),
      neumann_(std::move(neumann_sides)) {
    const int n = num_patches();
    iface_of_patch_.resize(n);

    auto check_side = [&](const Side& s) {
        if (s.patch < 0 || s.patch >= n) throw TopologyError("side references unknown patch");
    };

    std::vector<std::vector<int>> side_use(n, std::vector<int>(4, 0));
    auto mark = [&](const Side& s) { side_use[s.patch][static_cast<int>(s.id)]++; };

    for (std::size_t i = 0; i < interfaces_.size(); ++i) {
        const auto& f = interfaces_[i];
        check_side(f.a);
        check_side(f.b);
        mark(f.a);
        mark(f.b);
        iface_of_patch_[f.a.patch].push_back(static_cast<int>(i));
        iface_of_patch_[f.b.patch].push_back(static_cast<int>(i));
    }
    for (const auto& s : dirichlet_) {
        check_side(s);
        mark(s);
    }
    for (const auto& s : neumann_) {
        check_side(s);
        mark(s);
    }

    if (dirichlet_.empty()) throw TopologyError("MultiPatch: Dirichlet boundary must be nonempty");
    for (int k = 0; k < n; ++k)
        for (int s = 0; s < 4; ++s) {
            if (side_use[k][s] == 0)
                throw TopologyError("MultiPatch: untagged side " +
                                    std::string(side_name(static_cast<SideId>(s))) + " of patch " +
                                    std::to_string(k));
            if (side_use[k][s] > 1)
                throw TopologyError("MultiPatch: side " +
                                    std::string(side_name(static_cast<SideId>(s))) + " of patch " +
                                    std::to_string(k) + " tagged more than once");
        }
}

std::optional<int> MultiPatch::interface_at(int k, SideId side) const {
    for (int i : iface_of_patch_[k]) {
        const auto& f = interfaces_[i];
        if ((f.a.patch == k && f.a.id == side) || (f.b.patch == k && f.b.id == side)) return i;
    }
    return std::nullopt;
}

bool MultiPatch::is_dirichlet(int k, SideId side) const {
    return std::any_of(dirichlet_.begin(), dirichlet_.end(),
                       [&](const Side& s) { return s.patch == k && s.id == side; });
}

const Side& MultiPatch::side_of(int iface, int k) const {
    const auto& f = interfaces_[iface];
    if (f.a.patch == k) return f.a;
    if (f.b.patch == k) return f.b;
    throw TopologyError("side_of: patch is not part of the interface");
}

const Side& MultiPatch::other_side(int iface, int k) const {
    const auto& f = interfaces_[iface];
    if (f.a.patch == k) return f.b;
    if (f.b.patch == k) return f.a;
    throw TopologyError("other_side: patch is not part of the interface");
}

std::vector<TopologyViolation> verify_topology(const MultiPatch& mp, double tol) {
    std::vector<TopologyViolation> out;
    constexpr int kSamples = 17;
    for (std::size_t i = 0; i < mp.interfaces().size(); ++i) {
        const auto& f = mp.interface(static_cast<int>(i));
        const double scale =
            std::max(compute_metrics(mp.patch(f.a.patch)).H, compute_metrics(mp.patch(f.b.patch)).H);
        double dmax = 0.0;
        for (int s = 0; s < kSamples; ++s) {
            const double t = static_cast<double>(s) / (kSamples - 1);
            const Vec2 pa = side_param_point(f.a.id, t);
            const Vec2 pb = side_param_point(f.b.id, oriented(f.orientation, t));
            const Vec2 xa = mp.patch(f.a.patch).eval_geometry(pa[0], pa[1]).point;
            const Vec2 xb = mp.patch(f.b.patch).eval_geometry(pb[0], pb[1]).point;
            dmax = std::max(dmax, (xa - xb).norm());
        }
        if (dmax > tol * scale)
            out.push_back({static_cast<int>(i), dmax,
                           "interface " + std::to_string(i) + ": sides deviate by " +
                               std::to_string(dmax)});
    }
    return out;
}

std::vector<int> side_dof_layer(const TensorSplineSpace& space, SideId side) {
    const int m1 = space.dim(0);
    const int m2 = space.dim(1);
    std::vector<int> out;
    switch (side) {
        case SideId::west:
            for (int i2 = 0; i2 < m2; ++i2) out.push_back(space.flat(0, i2));
            break;
        case SideId::east:
            for (int i2 = 0; i2 < m2; ++i2) out.push_back(space.flat(m1 - 1, i2));
            break;
        case SideId::south:
            for (int i1 = 0; i1 < m1; ++i1) out.push_back(space.flat(i1, 0));
            break;
        case SideId::north:
            for (int i1 = 0; i1 < m1; ++i1) out.push_back(space.flat(i1, m2 - 1));
            break;
    }
    return out;
}

FaceDofSets face_dof_sets(const MultiPatch& mp, int iface, int k) {
    const Side& own = mp.side_of(iface, k);
    const Side& other = mp.other_side(iface, k);
    FaceDofSets out;
    out.own = side_dof_layer(mp.patch(k).space(), own.id);
    out.neighbor = side_dof_layer(mp.patch(other.patch).space(), other.id);
    return out;
}

PatchMetrics compute_metrics(const Patch& patch) {
    PatchMetrics m{0.0, 0.0, {}};

    const auto b1 = patch.space().kv(0).breakpoints();
    const auto b2 = patch.space().kv(1).breakpoints();
    // mapped element diameter from the four mapped element corners
    auto corner = [&](double x, double y) { return patch.eval_geometry(x, y).point; };
    for (std::size_t i = 0; i + 1 < b1.size(); ++i)
        for (std::size_t j = 0; j + 1 < b2.size(); ++j) {
            const Vec2 c[4] = {corner(b1[i], b2[j]), corner(b1[i + 1], b2[j]),
                               corner(b1[i], b2[j + 1]), corner(b1[i + 1], b2[j + 1])};
            for (int a = 0; a < 4; ++a)
                for (int b = a + 1; b < 4; ++b) m.h = std::max(m.h, (c[a] - c[b]).norm());
        }

    const auto& cps = patch.control_points();
    for (std::size_t a = 0; a < cps.size(); ++a)
        for (std::size_t b = a + 1; b < cps.size(); ++b)
            m.H = std::max(m.H, (cps[a] - cps[b]).norm());

    // face mesh size per side: max mapped span length along the side
    for (int s = 0; s < 4; ++s) {
        const SideId side = static_cast<SideId>(s);
        const auto& bk = side_face_dir(side) == 0 ? b1 : b2;
        double hf = 0.0;
        for (std::size_t i = 0; i + 1 < bk.size(); ++i) {
            const Vec2 pa = side_param_point(side, bk[i]);
            const Vec2 pb = side_param_point(side, bk[i + 1]);
            const Vec2 xa = patch.eval_geometry(pa[0], pa[1]).point;
            const Vec2 xb = patch.eval_geometry(pb[0], pb[1]).point;
            hf = std::max(hf, (xa - xb).norm());
        }
        m.h_face.push_back(hf);
    }
    return m;
}

double harmonic_average(double ha, double hb) {
    if (ha <= 0.0 || hb <= 0.0) throw std::domain_error("harmonic_average: inputs must be positive");
    return 2.0 * ha * hb / (ha + hb);
}

}  // namespace dgieti
