// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dgieti/linalg.hpp"

#include <utility>
#include <vector>

namespace dgieti {

/// Open (clamped) knot vector on [0,1]. Immutable; all queries are pure.
///
/// Invariants enforced at construction: knots nondecreasing, first and last
/// knot repeated degree+1 times at 0 and 1, interior multiplicity <= degree,
/// at least degree+1 basis functions.
class KnotVector {
public:
    KnotVector(int degree, std::vector<double> knots);

    /// Single span [0,1]: knots 0^(p+1), 1^(p+1).
    static KnotVector single_span(int degree);
    /// Open uniform knot vector with n equal spans.
    static KnotVector uniform(int degree, int nspans);

    int degree() const { return degree_; }
    /// Number of basis functions M.
    int num_basis() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
    const std::vector<double>& knots() const { return knots_; }

    /// Distinct knot values (breakpoints), ascending.
    std::vector<double> breakpoints() const;
    /// Largest knot-span length (parameter meshsize).
    double max_span() const;
    /// Greville abscissa of basis function i.
    double greville(int i) const;

    /// Span index s with knots[s] <= x < knots[s+1]; x = 1 maps into the
    /// last nonempty span. Throws std::domain_error outside [0,1].
    int find_span(double x) const;

    /// The degree+1 possibly nonzero basis values at x. Returns the index of
    /// the first of them and the values, partition of unity.
    std::pair<int, std::vector<double>> eval_basis(double x) const;

    struct BasisDerivs {
        int first;
        std::vector<double> values;
        std::vector<double> derivs;
    };
    BasisDerivs eval_basis_deriv(double x) const;

    /// Bisect every nonempty span `levels` times. The coarse space is a
    /// subspace of the result.
    KnotVector uniform_refine(int levels) const;

private:
    int degree_;
    std::vector<double> knots_;
};

/// Tensor-product spline space on the unit square. Flat coefficient index
/// runs with direction 1 fastest: flat(i1, i2) = i2 * M1 + i1.
class TensorSplineSpace {
public:
    TensorSplineSpace(KnotVector kv1, KnotVector kv2);

    const KnotVector& kv(int dir) const { return dir == 0 ? kv1_ : kv2_; }
    int dim(int dir) const { return dir == 0 ? kv1_.num_basis() : kv2_.num_basis(); }
    int size() const { return kv1_.num_basis() * kv2_.num_basis(); }
    int flat(int i1, int i2) const { return i2 * kv1_.num_basis() + i1; }

    /// Parameter meshsize: max span length over both directions.
    double mesh_size() const { return std::max(kv1_.max_span(), kv2_.max_span()); }

    Vec2 greville_point(int i1, int i2) const {
        return {kv1_.greville(i1), kv2_.greville(i2)};
    }

    struct Eval {
        double value;
        Vec2 gradient;  // parameter-space gradient
    };
    /// Value and gradient of sum_i c_i N_i at (x1, x2). Throws
    /// DimensionError if |coeffs| != size().
    Eval eval(const Vector& coeffs, double x1, double x2) const;

    TensorSplineSpace uniform_refine(int levels) const {
        return {kv1_.uniform_refine(levels), kv2_.uniform_refine(levels)};
    }

private:
    KnotVector kv1_, kv2_;
};

}  // namespace dgieti
