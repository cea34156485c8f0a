// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dgieti/bspline.hpp"
#include "dgieti/linalg.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dgieti {

enum class SideId { west, east, south, north };

const char* side_name(SideId s);
SideId side_from_name(const std::string& name);

/// Parameter direction running along a side: 0 for south/north, 1 for west/east.
int side_face_dir(SideId s);
/// Parameter point of a side at face parameter t in [0,1].
Vec2 side_param_point(SideId s, double t);
/// Outward unit normal of the side in the parameter domain.
Vec2 side_param_normal(SideId s);

struct Side {
    int patch;
    SideId id;
    bool operator==(const Side&) const = default;
};

enum class Orientation { same, reversed };

/// Neighbor face parameter matching t on the master side.
inline double oriented(Orientation o, double t) {
    return o == Orientation::same ? t : 1.0 - t;
}

struct Interface {
    Side a;
    Side b;
    Orientation orientation = Orientation::same;
};

/// One mapped tensor-product B-spline patch. The geometry space stays on its
/// coarse discretization; the solution space is refined independently.
class Patch {
public:
    Patch(TensorSplineSpace geom_space, std::vector<Vec2> control_points,
          TensorSplineSpace solution_space, double alpha = 1.0);

    const TensorSplineSpace& geom_space() const { return geom_space_; }
    const TensorSplineSpace& space() const { return space_; }
    const std::vector<Vec2>& control_points() const { return cps_; }
    double alpha() const { return alpha_; }

    struct GeomEval {
        Vec2 point;
        Mat2 jacobian;  // columns dG/dxi1, dG/dxi2
    };
    /// G(xi) and its Jacobian. Throws GeometryError if det <= 0.
    GeomEval eval_geometry(double x1, double x2) const;

private:
    TensorSplineSpace geom_space_;
    std::vector<Vec2> cps_;
    TensorSplineSpace space_;
    double alpha_;
};

struct PatchMetrics {
    double h;  // max mapped element diameter
    double H;  // patch diameter (control hull)
    std::vector<double> h_face;  // per side, mesh size on the face from this patch
};

struct TopologyViolation {
    int interface_id;
    double max_distance;
    std::string detail;
};

class MultiPatch {
public:
    MultiPatch(std::vector<Patch> patches, std::vector<Interface> interfaces,
               std::vector<Side> dirichlet_sides, std::vector<Side> neumann_sides);

    int num_patches() const { return static_cast<int>(patches_.size()); }
    const Patch& patch(int k) const { return patches_[k]; }
    const std::vector<Interface>& interfaces() const { return interfaces_; }
    const Interface& interface(int i) const { return interfaces_[i]; }
    const std::vector<Side>& dirichlet_sides() const { return dirichlet_; }
    const std::vector<Side>& neumann_sides() const { return neumann_; }

    /// Interface ids touching patch k.
    const std::vector<int>& interfaces_of(int k) const { return iface_of_patch_[k]; }
    /// Interface id through (k, side), if any.
    std::optional<int> interface_at(int k, SideId side) const;
    bool is_dirichlet(int k, SideId side) const;

    /// The side of interface i belonging to patch k (a or b). Throws
    /// TopologyError if k is not part of the interface.
    const Side& side_of(int iface, int k) const;
    /// The opposite side of interface i, seen from patch k.
    const Side& other_side(int iface, int k) const;

private:
    std::vector<Patch> patches_;
    std::vector<Interface> interfaces_;
    std::vector<Side> dirichlet_, neumann_;
    std::vector<std::vector<int>> iface_of_patch_;
};

std::vector<TopologyViolation> verify_topology(const MultiPatch& mp, double tol);

/// Flat solution-space dof indices whose trace is nonzero on the side
/// (the clamped boundary layer), ascending along the face parameter.
std::vector<int> side_dof_layer(const TensorSplineSpace& space, SideId side);

struct FaceDofSets {
    std::vector<int> own;                      // I(F^(kl)) in patch k's space
    std::vector<int> neighbor;                 // I^(k,l): neighbor dofs seen on the face
};
/// Index sets for the interface `iface` as seen from patch k.
FaceDofSets face_dof_sets(const MultiPatch& mp, int iface, int k);

PatchMetrics compute_metrics(const Patch& patch);
double harmonic_average(double ha, double hb);

}  // namespace dgieti
