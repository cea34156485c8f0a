// SPDX-License-Identifier: Apache-2.0

#include "dgieti/bspline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dgieti {

KnotVector::KnotVector(int degree, std::vector<double> knots)
    : degree_(degree), knots_(std::move(knots)) {
    if (degree_ < 1) throw std::invalid_argument("KnotVector: degree must be >= 1");
    const int m = static_cast<int>(knots_.size());
    const int p = degree_;
    if (m < 2 * (p + 1)) throw std::invalid_argument("KnotVector: too few knots");
    for (int i = 0; i + 1 < m; ++i)
        if (knots_[i] > knots_[i + 1])
            throw std::invalid_argument("KnotVector: knots must be nondecreasing");
    for (int i = 0; i <= p; ++i)
        if (knots_[i] != 0.0 || knots_[m - 1 - i] != 1.0)
            throw std::invalid_argument("KnotVector: knot vector must be clamped to [0,1]");
    // interior multiplicity <= p
    int run = 1;
    for (int i = p + 1; i < m - p - 1; ++i) {
        run = (knots_[i] == knots_[i - 1]) ? run + 1 : 1;
        if (knots_[i] == 0.0 || knots_[i] == 1.0)
            throw std::invalid_argument("KnotVector: end knot repeated beyond degree+1");
        if (run > p)
            throw std::invalid_argument("KnotVector: interior multiplicity exceeds degree");
    }
    if (num_basis() < p + 1) throw std::invalid_argument("KnotVector: fewer than degree+1 basis functions");
}

KnotVector KnotVector::single_span(int degree) {
    std::vector<double> knots(2 * (degree + 1), 0.0);
    std::fill(knots.begin() + degree + 1, knots.end(), 1.0);
    return {degree, std::move(knots)};
}

KnotVector KnotVector::uniform(int degree, int nspans) {
    if (nspans < 1) throw std::invalid_argument("KnotVector::uniform: nspans must be >= 1");
    std::vector<double> knots;
    knots.reserve(2 * (degree + 1) + nspans - 1);
    knots.insert(knots.end(), degree + 1, 0.0);
    for (int i = 1; i < nspans; ++i) knots.push_back(static_cast<double>(i) / nspans);
    knots.insert(knots.end(), degree + 1, 1.0);
    return {degree, std::move(knots)};
}

std::vector<double> KnotVector::breakpoints() const {
    std::vector<double> b;
    for (double k : knots_)
        if (b.empty() || k > b.back()) b.push_back(k);
    return b;
}

double KnotVector::max_span() const {
    double h = 0.0;
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i)
        h = std::max(h, knots_[i + 1] - knots_[i]);
    return h;
}

double KnotVector::greville(int i) const {
    double s = 0.0;
    for (int j = 1; j <= degree_; ++j) s += knots_[i + j];
    return s / degree_;
}

int KnotVector::find_span(double x) const {
    if (x < 0.0 || x > 1.0) throw std::domain_error("find_span: x outside [0,1]");
    const int p = degree_;
    const int m = num_basis();
    if (x >= knots_[m]) return m - 1;  // last nonempty span, covers x = 1
    auto it = std::upper_bound(knots_.begin() + p, knots_.begin() + m + 1, x);
    return static_cast<int>(it - knots_.begin()) - 1;
}

std::pair<int, std::vector<double>> KnotVector::eval_basis(double x) const {
    const int p = degree_;
    const int s = find_span(x);
    std::vector<double> vals(p + 1), left(p + 1), right(p + 1);
    vals[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - knots_[s + 1 - j];
        right[j] = knots_[s + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double temp = vals[r] / (right[r + 1] + left[j - r]);
            vals[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        vals[j] = saved;
    }
    return {s - p, std::move(vals)};
}

KnotVector::BasisDerivs KnotVector::eval_basis_deriv(double x) const {
    const int p = degree_;
    const int s = find_span(x);

    // triangular table up to degree p, keeping the degree p-1 row
    std::vector<double> vals(p + 1), low(p, 0.0), left(p + 1), right(p + 1);
    vals[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        if (j == p)
            for (int r = 0; r < p; ++r) low[r] = vals[r];
        left[j] = x - knots_[s + 1 - j];
        right[j] = knots_[s + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double temp = vals[r] / (right[r + 1] + left[j - r]);
            vals[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        vals[j] = saved;
    }

    // N'_{i,p} = p * (N_{i,p-1}/(k_{i+p}-k_i) - N_{i+1,p-1}/(k_{i+p+1}-k_{i+1}))
    // low[r] holds N_{s-p+1+r, p-1}; indices outside that window vanish at x.
    BasisDerivs out{s - p, std::move(vals), std::vector<double>(p + 1, 0.0)};
    for (int r = 0; r <= p; ++r) {
        const int i = s - p + r;
        double d = 0.0;
        if (r >= 1) {
            const double den = knots_[i + p] - knots_[i];
            if (den > 0.0) d += low[r - 1] / den;
        }
        if (r < p) {
            const double den = knots_[i + p + 1] - knots_[i + 1];
            if (den > 0.0) d -= low[r] / den;
        }
        out.derivs[r] = p * d;
    }
    return out;
}

KnotVector KnotVector::uniform_refine(int levels) const {
    if (levels < 0) throw std::invalid_argument("uniform_refine: levels must be >= 0");
    std::vector<double> knots = knots_;
    for (int l = 0; l < levels; ++l) {
        std::vector<double> next;
        next.reserve(2 * knots.size());
        for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
            next.push_back(knots[i]);
            if (knots[i + 1] > knots[i]) next.push_back(0.5 * (knots[i] + knots[i + 1]));
        }
        next.push_back(knots.back());
        knots = std::move(next);
    }
    return {degree_, std::move(knots)};
}

TensorSplineSpace::TensorSplineSpace(KnotVector kv1, KnotVector kv2)
    : kv1_(std::move(kv1)), kv2_(std::move(kv2)) {}

TensorSplineSpace::Eval TensorSplineSpace::eval(const Vector& coeffs, double x1, double x2) const {
    if (coeffs.size() != size())
        throw DimensionError("TensorSplineSpace::eval: coefficient length mismatch");
    const auto b1 = kv1_.eval_basis_deriv(x1);
    const auto b2 = kv2_.eval_basis_deriv(x2);
    const int m1 = kv1_.num_basis();
    Eval out{0.0, Vec2::Zero()};
    for (int j2 = 0; j2 < kv2_.degree() + 1; ++j2)
        for (int j1 = 0; j1 < kv1_.degree() + 1; ++j1) {
            const double c = coeffs[(b2.first + j2) * m1 + (b1.first + j1)];
            out.value += c * b1.values[j1] * b2.values[j2];
            out.gradient[0] += c * b1.derivs[j1] * b2.values[j2];
            out.gradient[1] += c * b1.values[j1] * b2.derivs[j2];
        }
    return out;
}

}  // namespace dgieti
