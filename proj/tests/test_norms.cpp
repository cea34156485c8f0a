// SPDX-License-Identifier: Apache-2.0

#include "dgieti/norms.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <random>

using namespace dgieti;
using namespace dgieti::testing;

namespace {

MultiPatch single_patch(int degree, int nspans) {
    std::vector<Patch> patches;
    patches.push_back(make_square_patch({0, 0}, {1, 1}, degree, nspans));
    std::vector<Side> diri = {{0, SideId::west}};
    std::vector<Side> neum = {{0, SideId::east}, {0, SideId::south}, {0, SideId::north}};
    return {std::move(patches), {}, std::move(diri), std::move(neum)};
}

Vector face_trace(const MultiPatch& mp, int k, SideId side, const Vector& full) {
    const auto layer = side_dof_layer(mp.patch(k).space(), side);
    Vector v(static_cast<int>(layer.size()));
    for (std::size_t i = 0; i < layer.size(); ++i) v[static_cast<int>(i)] = full[layer[i]];
    return v;
}

}  // namespace

TEST_CASE("dG-norm of continuous constants and of a linear field") {
    const double delta = 6.0;
    {
        const MultiPatch mp = two_squares(1, 2, 2);
        std::vector<Vector> u = {Vector::Ones(mp.patch(0).space().size()),
                                 Vector::Ones(mp.patch(1).space().size())};
        CHECK(dg_norm_sq(mp, u, delta) < 1e-13);
    }
    {
        const MultiPatch mp = single_patch(1, 3);
        const auto& sp = mp.patch(0).space();
        std::vector<Vector> u(1, Vector(sp.size()));
        for (int i2 = 0; i2 < sp.dim(1); ++i2)
            for (int i1 = 0; i1 < sp.dim(0); ++i1) u[0][sp.flat(i1, i2)] = sp.kv(0).greville(i1);
        CHECK(dg_norm_sq(mp, u, delta) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("dG-norm of a unit jump counts both one-sided sums") {
    const double delta = 6.0;
    const MultiPatch mp = two_squares(1, 2, 2);
    std::vector<Vector> u = {Vector::Zero(mp.patch(0).space().size()),
                             Vector::Ones(mp.patch(1).space().size())};
    const double h_kl =
        harmonic_average(compute_metrics(mp.patch(0)).h, compute_metrics(mp.patch(1)).h);
    CHECK(dg_norm_sq(mp, u, delta) == doctest::Approx(2.0 * delta / h_kl).epsilon(1e-12));
}

TEST_CASE("face L2-projection is the identity on its range and preserves constants") {
    {
        const MultiPatch mp = two_squares(2, 3, 3);
        std::mt19937 rng(5);
        std::normal_distribution<double> dist;
        Vector v(static_cast<int>(side_dof_layer(mp.patch(0).space(), SideId::east).size()));
        for (int i = 0; i < v.size(); ++i) v[i] = dist(rng);
        const Vector proj = l2_project_face(mp, 0, 0, v);
        CHECK((proj - v).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(face_projection_error_sq(mp, 0, 0, v) < 1e-24);
    }
    {
        const MultiPatch mp = two_squares(2, 3, 1);
        const int n_own = static_cast<int>(side_dof_layer(mp.patch(0).space(), SideId::east).size());
        const Vector proj = l2_project_face(mp, 0, 0, Vector::Ones(n_own));
        CHECK((proj - Vector::Ones(proj.size())).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("face L2-projection is L2-stable") {
    const MultiPatch mp = two_squares(2, 4, 1);
    std::mt19937 rng(7);
    std::normal_distribution<double> dist;
    // the own-trace Gram is the "neighbor mass" when looking from patch 1
    const DenseMatrix own_mass = build_face_gram(mp, 0, 1).mass;
    const DenseMatrix neigh_mass = build_face_gram(mp, 0, 0).mass;
    for (int rep = 0; rep < 10; ++rep) {
        Vector v(own_mass.rows());
        for (int i = 0; i < v.size(); ++i) v[i] = dist(rng);
        const Vector proj = l2_project_face(mp, 0, 0, v);
        CHECK(std::sqrt(proj.dot(neigh_mass * proj)) <= std::sqrt(v.dot(own_mass * v)) + 1e-12);
    }
}

TEST_CASE("projection error scaling does not grow under simultaneous refinement") {
    // fixed neighbor ratio h_l / h_k = 2; patch 0 is the fine side
    std::mt19937 rng(11);
    std::normal_distribution<double> dist;
    std::vector<double> cmax;
    for (int level = 2; level <= 4; ++level) {
        const MultiPatch mp = two_squares(2, 1 << level, 1 << (level - 1));
        const double h_l = compute_metrics(mp.patch(1)).h;
        const double h_k = compute_metrics(mp.patch(0)).h;
        double c = 0.0;
        for (int rep = 0; rep < 10; ++rep) {
            Vector full(mp.patch(0).space().size());
            for (int i = 0; i < full.size(); ++i) full[i] = dist(rng);
            const Vector v = face_trace(mp, 0, SideId::east, full);
            const double err = face_projection_error_sq(mp, 0, 0, v);
            const double h1 = h1_seminorm_sq(mp.patch(0), full);
            c = std::max(c, err / (h_l * (h_l / h_k) * h1));
        }
        cmax.push_back(c);
    }
    const double lo = *std::min_element(cmax.begin(), cmax.end());
    const double hi = *std::max_element(cmax.begin(), cmax.end());
    CHECK(hi / lo <= 3.0);
}

TEST_CASE("discrete coefficient norms") {
    TensorSplineSpace sp(KnotVector::uniform(2, 4), KnotVector::uniform(2, 4));
    {
        const auto n = discrete_norms(sp, Vector::Zero(sp.size()));
        CHECK(n.box_sq == 0.0);
        CHECK(n.grad_sq == 0.0);
    }
    {
        const double c = 3.0;
        const auto n = discrete_norms(sp, c * Vector::Ones(sp.size()));
        CHECK(n.grad_sq == 0.0);
        const double hh = sp.mesh_size();
        CHECK(n.box_sq == doctest::Approx(c * c * sp.size() * hh * hh).epsilon(1e-14));
    }
}

TEST_CASE("box norm is equivalent to the parameter-domain L2 norm, stably") {
    std::mt19937 rng(13);
    std::normal_distribution<double> dist;
    double lo_prev = 0, hi_prev = 0;
    for (int level = 2; level <= 3; ++level) {
        const Patch patch = make_square_patch({0, 0}, {1, 1}, 2, 1 << level);
        const auto& sp = patch.space();
        double lo = 1e300, hi = 0;
        for (int rep = 0; rep < 20; ++rep) {
            Vector c(sp.size());
            for (int i = 0; i < c.size(); ++i) c[i] = dist(rng);
            const double box = discrete_norms(sp, c).box_sq;
            const double l2 = l2_norm_sq(patch, c);  // identity patch: parameter L2
            lo = std::min(lo, box / l2);
            hi = std::max(hi, box / l2);
        }
        CHECK(lo > 0.0);
        if (level > 2) {
            CHECK(hi / lo < 10.0);
            CHECK(hi / hi_prev < 2.0);
            CHECK(lo_prev / lo < 2.0);
        }
        lo_prev = lo;
        hi_prev = hi;
    }
}

TEST_CASE("discrete dG-norm: constants, delta linearity, equivalence trend") {
    const double delta = 12.0;
    const MultiPatch mp = two_squares(2, 4, 2);

    {
        ExtendedCoeffs u;
        u.own = 2.5 * Vector::Ones(mp.patch(0).space().size());
        u.copies[0] = 2.5 * Vector::Ones(static_cast<int>(
                                side_dof_layer(mp.patch(1).space(), SideId::west).size()));
        CHECK(discrete_dg_norm_sq(mp, 0, u, delta) < 1e-22);
    }

    std::mt19937 rng(17);
    std::normal_distribution<double> dist;
    ExtendedCoeffs u;
    u.own = Vector(mp.patch(0).space().size());
    for (int i = 0; i < u.own.size(); ++i) u.own[i] = dist(rng);
    Vector copy(static_cast<int>(side_dof_layer(mp.patch(1).space(), SideId::west).size()));
    for (int i = 0; i < copy.size(); ++i) copy[i] = dist(rng);
    u.copies[0] = copy;

    {
        const double grad = discrete_norms(mp.patch(0).space(), u.own).grad_sq;
        const double d1 = discrete_dg_norm_sq(mp, 0, u, delta);
        const double d2 = discrete_dg_norm_sq(mp, 0, u, 2 * delta);
        CHECK(d2 - grad == doctest::Approx(2.0 * (d1 - grad)).epsilon(1e-12));
    }

    {
        auto ratio_bounds = [&](int n0, int n1) {
            const MultiPatch m = two_squares(2, n0, n1);
            std::mt19937 r2(19);
            std::normal_distribution<double> d2;
            double lo = 1e300, hi = 0;
            for (int rep = 0; rep < 10; ++rep) {
                ExtendedCoeffs w;
                w.own = Vector(m.patch(0).space().size());
                for (int i = 0; i < w.own.size(); ++i) w.own[i] = d2(r2);
                Vector cp(static_cast<int>(side_dof_layer(m.patch(1).space(), SideId::west).size()));
                for (int i = 0; i < cp.size(); ++i) cp[i] = d2(r2);
                w.copies[0] = cp;
                const double a = dg_norm_extended_sq(m, 0, w, delta);
                const double b = discrete_dg_norm_sq(m, 0, w, delta);
                lo = std::min(lo, a / b);
                hi = std::max(hi, a / b);
            }
            return std::pair{lo, hi};
        };
        const auto [lo1, hi1] = ratio_bounds(4, 2);
        const auto [lo2, hi2] = ratio_bounds(8, 4);
        CHECK(lo1 > 0.0);
        CHECK(lo2 > 0.0);
        CHECK(hi2 / hi1 < 3.0);
        CHECK(lo1 / lo2 < 3.0);
    }
}

TEST_CASE("norms reject mismatched sizes") {
    const MultiPatch mp = two_squares(1, 2, 2);
    std::vector<Vector> wrong = {Vector::Zero(3), Vector::Zero(3)};
    CHECK_THROWS_AS(dg_norm_sq(mp, wrong, 6.0), DimensionError);
    CHECK_THROWS_AS(discrete_norms(mp.patch(0).space(), Vector::Zero(2)), DimensionError);
    CHECK_THROWS_AS(l2_project_face(mp, 0, 0, Vector::Zero(17)), DimensionError);
}
