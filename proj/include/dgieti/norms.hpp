// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dgieti/assembly.hpp"
#include "dgieti/geometry.hpp"

#include <vector>

namespace dgieti {

/// Squared dG-norm of a coupled dG function given per-patch full own
/// coefficient vectors: broken H1 seminorm (alpha-weighted) plus
/// delta*alpha/h_kl weighted interface jumps, both sides summed.
double dg_norm_sq(const MultiPatch& mp, const std::vector<Vector>& own_full, double delta);
double dg_norm(const MultiPatch& mp, const std::vector<Vector>& own_full, double delta);

/// Per-patch squared dG-norm of an extended function: jumps are between the
/// own trace and the neighbor-face copy carried by the patch.
double dg_norm_extended_sq(const MultiPatch& mp, int k, const ExtendedCoeffs& u, double delta);

/// Interface-jump part of the squared dG-norm alone (both sides summed).
double interface_jump_energy_sq(const MultiPatch& mp, const std::vector<Vector>& own_full,
                                double delta);

/// Patch L2 norm and H1 seminorm (alpha = 1) of a spline field.
double l2_norm_sq(const Patch& patch, const Vector& full_coeffs);
double h1_seminorm_sq(const Patch& patch, const Vector& full_coeffs);

/// Mass matrices of the face L2-projection onto the neighbor face space.
struct FaceGram {
    DenseMatrix mass;   // neighbor x neighbor
    DenseMatrix mixed;  // neighbor x own-trace
};
FaceGram build_face_gram(const MultiPatch& mp, int iface, int k);

/// Coefficients of the orthogonal L2-projection of the own trace (coefficients
/// on the face layer of patch k) onto the neighbor's face space.
Vector l2_project_face(const MultiPatch& mp, int iface, int k, const Vector& own_trace);

/// int_F (v - pi v)^2 ds for an own-trace v on interface `iface` of patch k.
double face_projection_error_sq(const MultiPatch& mp, int iface, int k, const Vector& own_trace);

/// Coefficient-based norms of Definition-style instrumentation: scaled l2 of
/// the coefficients and first-difference seminorm.
struct DiscreteNorms {
    double box_sq;   // sum |c_i|^2 hhat^2
    double grad_sq;  // sum of squared first differences, both directions
};
DiscreteNorms discrete_norms(const TensorSplineSpace& space, const Vector& full_coeffs);

/// Face variant: sum |c_i|^2 * hpar.
double face_box_sq(const Vector& coeffs, double hpar);

/// Discrete dG-norm of an extended function on patch k: first differences of
/// the own coefficients plus delta/hhat_kl weighted coefficient distance of
/// each copy to the projected own trace.
double discrete_dg_norm_sq(const MultiPatch& mp, int k, const ExtendedCoeffs& u, double delta);

}  // namespace dgieti
