// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dgieti/geometry.hpp"
#include "dgieti/linalg.hpp"

#include <functional>
#include <map>
#include <vector>

namespace dgieti {

/// Extended dof enumeration of one patch: interior dofs first, then the
/// extended-boundary block W (own interface-layer dofs, then neighbor face
/// copies per interface). Dirichlet dofs are eliminated up front.
struct PatchDofMap {
    int patch = 0;
    int n_interior = 0;
    int n_w = 0;

    /// own flat index -> extended index, or -1 if Dirichlet-eliminated.
    std::vector<int> own_to_ext;

    struct WDof {
        bool is_copy;
        int iface;     // interface id (copies); -1 for own dofs
        int face_pos;  // position along the owner's face (copies)
        int own_flat;  // own flat index, or the owner's flat index for copies
    };
    std::vector<WDof> w_dofs;  // w index i lives at extended index n_interior + i

    /// per interface id: extended index of the copy at each face position
    /// (owner's face ordering), -1 where the owner dof is eliminated.
    std::map<int, std::vector<int>> copy_ext;
    /// per interface id: extended index of the own face-layer dof at each
    /// position along the own face parameter, -1 where eliminated.
    std::map<int, std::vector<int>> own_face_ext;

    int n_ext() const { return n_interior + n_w; }
    std::vector<int> interior_indices() const;
    std::vector<int> w_indices() const;
};

std::vector<PatchDofMap> build_dof_maps(const MultiPatch& mp);

/// Per-patch extended system: K_e = a + s + p over the extended dofs,
/// the penalty part alone, and the volume part alone (copies decoupled).
struct PatchSystem {
    PatchDofMap map;
    linalg::SparseMatrix K_e;
    linalg::SparseMatrix P_pen;
    linalg::SparseMatrix K_vol;
    Vector f;  // load, zero on copies
    double delta = 0.0;
    double h = 0.0;                 // characteristic mesh size h_k
    double H = 0.0;                 // patch diameter H_k
    std::map<int, double> h_kl;     // harmonic-average face mesh size per interface
};

/// Volume stiffness over all own dofs (no elimination), entries
/// alpha * int grad N_i . grad N_j dx. `alpha_override` < 0 uses the patch
/// value; `extra_points` raises the Gauss order (oracle comparisons).
linalg::SparseMatrix volume_stiffness(const Patch& patch, double alpha_override = -1.0,
                                      int extra_points = 0);

/// SIP interface contributions of patch k on interface `iface`, in extended
/// indices: the consistency part s and the penalty part p, kept separate.
struct InterfaceTerms {
    std::vector<linalg::Triplet> s;
    std::vector<linalg::Triplet> p;
};
InterfaceTerms interface_terms(const MultiPatch& mp, int iface, int k, double delta,
                               const std::vector<PatchDofMap>& maps);

PatchSystem assemble_patch(const MultiPatch& mp, int k, double delta,
                           const std::vector<PatchDofMap>& maps);

using VolumeLoad = std::function<double(const Vec2&)>;
/// Neumann flux g_N(x, n) with n the outward unit normal.
using BoundaryFlux = std::function<double(const Vec2&, const Vec2&)>;

Vector assemble_load(const MultiPatch& mp, int k, const PatchDofMap& map, const VolumeLoad& f,
                     const BoundaryFlux& g_n);

std::vector<PatchSystem> assemble_all(const MultiPatch& mp, double delta);

/// Global enumeration of the coupled dG space (active own dofs of all patches).
struct GlobalDofMap {
    std::vector<std::vector<int>> own_to_global;  // per patch, flat -> global or -1
    int n_global = 0;
};
GlobalDofMap build_global_dof_map(const MultiPatch& mp, const std::vector<PatchDofMap>& maps);

/// The coupled dG stiffness matrix: extended copies identified with their
/// owners, per-patch forms summed.
linalg::SparseMatrix assemble_global_matrix(const MultiPatch& mp,
                                            const std::vector<PatchSystem>& systems,
                                            const GlobalDofMap& gmap);

Vector assemble_global_load(const MultiPatch& mp, const std::vector<PatchSystem>& systems,
                            const GlobalDofMap& gmap, const std::vector<Vector>& patch_loads);

/// Extended coefficients in full (unconstrained) layout.
struct ExtendedCoeffs {
    Vector own;                    // all own dofs, Dirichlet positions zero
    std::map<int, Vector> copies;  // interface id -> owner-face-sized vector
};

ExtendedCoeffs to_full(const MultiPatch& mp, int k, const PatchDofMap& map, const Vector& ext);
Vector from_full(const MultiPatch& mp, int k, const PatchDofMap& map, const ExtendedCoeffs& full);

/// Value and physical gradient of a spline field given full own coefficients.
struct FieldEval {
    double value;
    Vec2 grad;  // physical gradient
    Vec2 x;     // physical point
};
FieldEval eval_field(const Patch& patch, const Vector& full_coeffs, double x1, double x2);

/// Merged face-parameter breakpoints of an interface in the face parameter
/// of patch k (own breakpoints plus the neighbor's, orientation-mapped).
std::vector<double> merged_face_breakpoints(const MultiPatch& mp, int iface, int k);

}  // namespace dgieti
