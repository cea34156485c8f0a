// SPDX-License-Identifier: Apache-2.0

#include "dgieti/assembly.hpp"

#include "dgieti/norms.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <random>

using namespace dgieti;
using namespace dgieti::testing;

TEST_CASE("bilinear single-element stiffness matches the hand oracle") {
    const Patch p = make_square_patch({0, 0}, {1, 1}, 1, 1);
    const DenseMatrix k = DenseMatrix(volume_stiffness(p));
    REQUIRE(k.rows() == 4);
    // flat order: (0,0), (1,0), (0,1), (1,1)
    for (int i = 0; i < 4; ++i) CHECK(k(i, i) == doctest::Approx(2.0 / 3).epsilon(1e-13));
    CHECK(k(0, 1) == doctest::Approx(-1.0 / 6).epsilon(1e-13));
    CHECK(k(0, 2) == doctest::Approx(-1.0 / 6).epsilon(1e-13));
    CHECK(k(0, 3) == doctest::Approx(-1.0 / 3).epsilon(1e-13));
    CHECK(k(1, 2) == doctest::Approx(-1.0 / 3).epsilon(1e-13));
}

TEST_CASE("constants lie in the volume-stiffness kernel") {
    const Patch p = make_square_patch({0, 0}, {2, 1}, 2, 3);
    const auto k = volume_stiffness(p);
    const Vector ones = Vector::Ones(k.rows());
    CHECK((k * ones).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("stiffness is linear in alpha") {
    const Patch p1 = make_square_patch({0, 0}, {1, 1}, 2, 2, 1.0);
    const Patch p5 = make_square_patch({0, 0}, {1, 1}, 2, 2, 5.0);
    const DenseMatrix a = DenseMatrix(volume_stiffness(p1));
    const DenseMatrix b = DenseMatrix(volume_stiffness(p5));
    CHECK((b - 5.0 * a).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("volume quadrature is exact for the affine-geometry integrands") {
    const Patch p = make_square_patch({0, 0}, {2, 1}, 3, 2);
    const DenseMatrix a = DenseMatrix(volume_stiffness(p));
    const DenseMatrix b = DenseMatrix(volume_stiffness(p, -1.0, 3));
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-13 * a.cwiseAbs().maxCoeff());
}

TEST_CASE("penalty term vanishes for continuous data and reproduces the unit jump energy") {
    const int nspans = 4;
    const MultiPatch mp = two_squares(1, nspans, nspans);
    const double delta = 6.0;
    const auto maps = build_dof_maps(mp);
    const auto sys = assemble_patch(mp, 0, delta, maps);

    std::mt19937 rng(23);
    std::normal_distribution<double> dist;

    // equal trace and copy coefficients: zero jump
    {
        ExtendedCoeffs full;
        full.own = Vector::Zero(mp.patch(0).space().size());
        const auto layer = side_dof_layer(mp.patch(0).space(), SideId::east);
        Vector v(static_cast<int>(layer.size()));
        for (int i = 0; i < v.size(); ++i) v[i] = dist(rng);
        for (std::size_t i = 0; i < layer.size(); ++i) full.own[layer[i]] = v[static_cast<int>(i)];
        full.copies[0] = v;  // matching meshes: identical face basis
        const Vector ext = from_full(mp, 0, maps[0], full);
        const double e = ext.dot(sys.P_pen * ext);
        CHECK(std::abs(e) < 1e-12);
    }

    // own zero, copies one: delta/h_kl times the unit edge length
    {
        ExtendedCoeffs full;
        full.own = Vector::Zero(mp.patch(0).space().size());
        full.copies[0] = Vector::Ones(nspans + 1);
        const Vector ext = from_full(mp, 0, maps[0], full);
        const double e = ext.dot(sys.P_pen * ext);
        CHECK(e == doctest::Approx(delta / sys.h_kl.at(0)).epsilon(1e-12));
    }

    // the extended constant is in the kernel of the whole patch form
    // (patch 1 carries no Dirichlet side, so no dof is eliminated)
    {
        const auto sys1 = assemble_patch(mp, 1, delta, maps);
        const Vector ones = Vector::Ones(sys1.map.n_ext());
        CHECK((sys1.K_e * ones).cwiseAbs().maxCoeff() < 1e-11);
    }

    // constant own data has zero normal derivative: its s-energy vanishes
    // even though its interface jump does not
    {
        const auto terms = interface_terms(mp, 0, 1, delta, maps);
        const auto& map1 = maps[1];
        const auto s_mat = linalg::sparse_from_triplets(map1.n_ext(), map1.n_ext(), terms.s);
        ExtendedCoeffs full;
        full.own = Vector::Ones(mp.patch(1).space().size());
        full.copies[0] = Vector::Zero(nspans + 1);
        const Vector ext = from_full(mp, 1, map1, full);
        CHECK(std::abs(ext.dot(s_mat * ext)) < 1e-13);
    }
}

TEST_CASE("patch system blocks are symmetric and positive semidefinite") {
    const MultiPatch mp = two_squares(1, 1, 1, "west");
    const auto maps = build_dof_maps(mp);
    const auto sys = assemble_patch(mp, 1, 6.0, maps);  // patch 1 has no Dirichlet side
    CHECK(linalg::max_asymmetry(sys.K_e) < 1e-12);
    const DenseMatrix k = DenseMatrix(sys.K_e);
    const Vector ev = linalg::dense_sym_eig(k);
    CHECK(ev[0] >= -1e-10 * std::abs(ev[ev.size() - 1]));
}

TEST_CASE("coupled global matrix: symmetry and constants away from the Dirichlet side") {
    const MultiPatch mp = two_squares(2, 3, 4, "west");
    const auto systems = assemble_all(mp, 12.0);
    const auto maps = build_dof_maps(mp);
    const auto gmap = build_global_dof_map(mp, maps);
    const auto k = assemble_global_matrix(mp, systems, gmap);

    const double scale = DenseMatrix(k).cwiseAbs().maxCoeff();
    CHECK(linalg::max_asymmetry(k) < 1e-12 * scale);

    // row sums vanish for rows of patch 1 (no Dirichlet column is visible there)
    const Vector rs = k * Vector::Ones(k.rows());
    for (int flat = 0; flat < mp.patch(1).space().size(); ++flat) {
        const int g = gmap.own_to_global[1][flat];
        REQUIRE(g >= 0);
        CHECK(std::abs(rs[g]) < 1e-11 * scale);
    }
}

TEST_CASE("coupled matrix is positive definite with the default penalty") {
    for (int p : {1, 2}) {
        const double delta = (p + 1.0) * (p + 2.0);
        const MultiPatch mp = two_squares(p, 3, 3, "all");
        const auto systems = assemble_all(mp, delta);
        const auto maps = build_dof_maps(mp);
        const auto gmap = build_global_dof_map(mp, maps);
        const DenseMatrix k = DenseMatrix(assemble_global_matrix(mp, systems, gmap));
        REQUIRE(k.rows() <= 500);
        const Vector ev = linalg::dense_sym_eig(k);
        CHECK(ev[0] > 0.0);
    }
}

TEST_CASE("SIP-dG reproduces a linear solution on matching meshes") {
    const MultiPatch mp = two_squares(1, 2, 2, "west");
    const auto systems = assemble_all(mp, 6.0);
    const auto maps = build_dof_maps(mp);
    const auto gmap = build_global_dof_map(mp, maps);
    const auto k = assemble_global_matrix(mp, systems, gmap);

    // u = x: f = 0, g_N = n_x on the Neumann sides
    std::vector<Vector> loads(2);
    for (int kk = 0; kk < 2; ++kk)
        loads[kk] = assemble_load(mp, kk, maps[kk], nullptr,
                                  [](const Vec2&, const Vec2& n) { return n[0]; });
    const Vector f = assemble_global_load(mp, systems, gmap, loads);
    const Vector u = linalg::spd_factorize(k).solve(f);

    for (int kk = 0; kk < 2; ++kk) {
        const auto& sp = mp.patch(kk).space();
        for (int i2 = 0; i2 < sp.dim(1); ++i2)
            for (int i1 = 0; i1 < sp.dim(0); ++i1) {
                const int g = gmap.own_to_global[kk][sp.flat(i1, i2)];
                const double exact = kk + sp.kv(0).greville(i1);  // physical x coordinate
                if (g < 0)
                    CHECK(exact == doctest::Approx(0.0));  // eliminated dofs sit at x = 0
                else
                    CHECK(u[g] == doctest::Approx(exact).epsilon(1e-10));
            }
    }
}

TEST_CASE("load assembly integrates the constant and vanishes for zero data") {
    const MultiPatch mp = two_squares(2, 3, 3, "west");
    const auto maps = build_dof_maps(mp);

    const Vector load1 =
        assemble_load(mp, 1, maps[1], [](const Vec2&) { return 1.0; }, nullptr);
    CHECK(load1.sum() == doctest::Approx(1.0).epsilon(1e-13));  // area of patch 1

    const Vector load0 = assemble_load(mp, 0, maps[0], nullptr, nullptr);
    CHECK(load0.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dG-norm equivalence ratios stay in a stable interval under refinement") {
    std::mt19937 rng(31);
    std::normal_distribution<double> dist;
    const int p = 2;
    const double delta = (p + 1.0) * (p + 2.0);

    auto ratio_interval = [&](int nspans) {
        const MultiPatch mp = two_squares(p, nspans, 2 * nspans, "all");
        const auto systems = assemble_all(mp, delta);
        const auto maps = build_dof_maps(mp);
        const auto gmap = build_global_dof_map(mp, maps);
        const auto k = assemble_global_matrix(mp, systems, gmap);
        double lo = 1e300, hi = -1e300;
        for (int rep = 0; rep < 20; ++rep) {
            std::vector<Vector> full(2);
            Vector g = Vector::Zero(gmap.n_global);
            for (int kk = 0; kk < 2; ++kk) {
                full[kk] = Vector::Zero(mp.patch(kk).space().size());
                for (int flat = 0; flat < full[kk].size(); ++flat) {
                    const int gi = gmap.own_to_global[kk][flat];
                    if (gi >= 0) {
                        full[kk][flat] = dist(rng);
                        g[gi] = full[kk][flat];
                    }
                }
            }
            const double a_h = g.dot(k * g);
            const double dg = dg_norm_sq(mp, full, delta);
            const double r = a_h / dg;
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        return std::pair{lo, hi};
    };

    const auto [lo1, hi1] = ratio_interval(2);
    const auto [lo2, hi2] = ratio_interval(4);
    CHECK(lo1 > 0.0);
    CHECK(lo2 > 0.0);
    CHECK(std::abs(lo2 - lo1) < 0.25 * lo1);
    CHECK(std::abs(hi2 - hi1) < 0.25 * hi1);
}

TEST_CASE("interface terms reject invalid input") {
    const MultiPatch mp = two_squares(1, 2, 2);
    const auto maps = build_dof_maps(mp);
    CHECK_THROWS_AS(interface_terms(mp, 0, 0, -1.0, maps), std::invalid_argument);
    CHECK_THROWS_AS(assemble_patch(mp, 0, 0.0, maps), std::invalid_argument);
    CHECK_THROWS_AS(mp.side_of(0, 5), TopologyError);
}
