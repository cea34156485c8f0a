// SPDX-License-Identifier: Apache-2.0

#include "dgieti/experiment.hpp"

#include "dgieti/assembly.hpp"
#include "dgieti/ieti.hpp"

#include <doctest.h>

using namespace dgieti;
using nlohmann::json;

namespace {

json two_patch_geo(const std::string& dirichlet = "all") {
    return {{"generator", {{"kind", "square_grid"}, {"nx", 2}, {"ny", 1}, {"dirichlet", dirichlet}}}};
}

}  // namespace

TEST_CASE("config parsing and validation") {
    json j = {{"geometry", two_patch_geo()}, {"degree", 2}, {"refine", 3}};
    const RunConfig cfg = parse_config(j);
    CHECK(cfg.degree == 2);
    CHECK(cfg.refine == std::vector<int>{3});
    CHECK(cfg.effective_delta() == doctest::Approx(12.0));

    CHECK_THROWS_AS(parse_config(json{{"degree", 2}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"geometry", two_patch_geo()}, {"tol", 2.0}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"geometry", two_patch_geo()}, {"delta", -3.0}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"geometry", two_patch_geo()}, {"manufactured", "nope"}}),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"geometry", two_patch_geo()}, {"refine", -1}}), ConfigError);
}

TEST_CASE("generators build valid topologies") {
    for (const json geo :
         {two_patch_geo(), json{{"generator", {{"kind", "square_grid"}, {"nx", 3}, {"ny", 2}}}},
          json{{"generator", {{"kind", "lshape"}}}},
          json{{"generator", {{"kind", "quarter_annulus"}}}}}) {
        RunConfig cfg;
        cfg.geometry = geo;
        cfg.degree = 2;
        cfg.refine = {1};
        const MultiPatch mp = build_multipatch(cfg, refine_vector(cfg));
        CHECK(verify_topology(mp, 1e-8).empty());
    }
}

TEST_CASE("explicit patch geometry from json") {
    json geo;
    geo["patches"] = json::array();
    geo["patches"].push_back({{"degree_u", 1},
                              {"degree_v", 1},
                              {"knots_u", {0, 0, 1, 1}},
                              {"knots_v", {0, 0, 1, 1}},
                              {"control_points", {{0, 0}, {1, 0}, {0, 1}, {1, 1}}}});
    geo["dirichlet"] = json::array({{{"patch", 0}, {"side", "west"}}});
    geo["neumann"] = json::array({{{"patch", 0}, {"side", "east"}},
                                  {{"patch", 0}, {"side", "south"}},
                                  {{"patch", 0}, {"side", "north"}}});
    RunConfig cfg;
    cfg.geometry = geo;
    cfg.degree = 1;
    cfg.refine = {2};
    const MultiPatch mp = build_multipatch(cfg, refine_vector(cfg));
    CHECK(mp.num_patches() == 1);
    CHECK(mp.patch(0).space().dim(0) == 5);
}

TEST_CASE("solve command: convergence, feasibility, determinism") {
    RunConfig cfg;
    cfg.geometry = two_patch_geo();
    cfg.degree = 2;
    cfg.refine = {2, 3};
    cfg.manufactured = "sinsin";
    cfg.tol = 1e-9;

    const CommandResult r1 = cmd_solve(cfg);
    CHECK(r1.exit_code == 0);
    CHECK(r1.report["result"]["converged"].get<bool>());
    CHECK(r1.report["result"]["jump_residual"].get<double>() <= 10.0 * cfg.tol);

    const CommandResult r2 = cmd_solve(cfg);
    CHECK(r1.csv == r2.csv);  // bit-identical rows
}

TEST_CASE("solve command with the dense oracle attached") {
    RunConfig cfg;
    cfg.geometry = two_patch_geo();
    cfg.degree = 1;
    cfg.refine = {2};
    cfg.oracle = true;
    cfg.rhs = "one";
    const CommandResult r = cmd_solve(cfg);
    CHECK(r.exit_code == 0);
    REQUIRE(r.report.contains("oracle"));
    CHECK(r.report["oracle"]["lambda_min"].get<double>() >= 1.0 - 1e-6);
}

TEST_CASE("floating patches pinned only by vertex constraints") {
    // 2x2 grid with Dirichlet on the west outer sides only: the two east
    // patches float and are controlled by their corner constraints
    RunConfig cfg;
    cfg.geometry = {{"generator",
                     {{"kind", "square_grid"}, {"nx", 2}, {"ny", 2}, {"dirichlet", {"west"}}}}};
    cfg.degree = 2;
    cfg.refine = {2};
    cfg.oracle = true;
    cfg.rhs = "one";
    const CommandResult r = cmd_solve(cfg);
    CHECK(r.exit_code == 0);
    CHECK(r.report["result"]["primal"].get<int>() == 4);
    REQUIRE(r.report.contains("oracle"));
    CHECK(r.report["oracle"]["lambda_min"].get<double>() >= 1.0 - 1e-6);
}

TEST_CASE("single patch run degenerates to a direct solve") {
    RunConfig cfg;
    cfg.geometry = {{"generator", {{"kind", "square_grid"}, {"nx", 1}, {"ny", 1}}}};
    cfg.degree = 2;
    cfg.refine = {3};
    cfg.manufactured = "sinsin";

    const MultiPatch mp = build_multipatch(cfg, refine_vector(cfg));
    const auto s = run_solve(mp, cfg);
    CHECK(s.n_multipliers == 0);
    CHECK(s.converged);

    // direct route: global matrix solve, same error functional
    const double delta = cfg.effective_delta();
    auto systems = assemble_all(mp, delta);
    const auto maps = build_dof_maps(mp);
    const auto gmap = build_global_dof_map(mp, maps);
    const auto k = assemble_global_matrix(mp, systems, gmap);
    const auto man = find_manufactured("sinsin");
    std::vector<Vector> loads = {assemble_load(
        mp, 0, maps[0], [&](const Vec2& x) { return man->neg_laplace(x); },
        [&](const Vec2& x, const Vec2& n) { return man->grad(x).dot(n); })};
    const Vector u = linalg::spd_factorize(k).solve(
        assemble_global_load(mp, systems, gmap, loads));

    double max_diff = 0.0;
    for (int flat = 0; flat < mp.patch(0).space().size(); ++flat) {
        const int g = gmap.own_to_global[0][flat];
        const double direct = g >= 0 ? u[g] : 0.0;
        max_diff = std::max(max_diff, std::abs(direct - s.own_full[0][flat]));
    }
    CHECK(max_diff <= 1e-10 * u.cwiseAbs().maxCoeff());
}

TEST_CASE("zero data yields the zero solution") {
    RunConfig cfg;
    cfg.geometry = two_patch_geo();
    cfg.degree = 1;
    cfg.refine = {2};
    cfg.manufactured = "zero";
    const MultiPatch mp = build_multipatch(cfg, refine_vector(cfg));
    const auto s = run_solve(mp, cfg);
    CHECK(s.converged);
    CHECK(s.dg_error < 1e-12);
    CHECK(s.l2_error < 1e-12);
}

TEST_CASE("kappa study produces a regression and monotone iterations growth bound") {
    RunConfig cfg;
    cfg.geometry = two_patch_geo();
    cfg.degree = 2;
    cfg.levels = {1, 2, 3};
    cfg.rhs = "one";
    const CommandResult r = cmd_kappa_study(cfg);
    CHECK(r.exit_code == 0);
    REQUIRE(r.report.contains("regression"));
    CHECK(r.report["rows"].size() == 3);

    // iterations grow sublinearly in dofs
    const auto& rows = r.report["rows"];
    const double it0 = rows.front()["iterations"].get<double>();
    const double itn = rows.back()["iterations"].get<double>();
    const double d0 = rows.front()["dofs"].get<double>();
    const double dn = rows.back()["dofs"].get<double>();
    CHECK(itn / std::max(it0, 1.0) < std::sqrt(dn / d0));

    for (const auto& row : rows) CHECK(row["lambda_min"].get<double>() >= 0.9);
}

TEST_CASE("ratio study stays under the theoretical envelope") {
    RunConfig cfg;
    cfg.geometry = two_patch_geo();
    cfg.degree = 2;
    cfg.refine = {2};
    cfg.ratios = {1, 2};
    cfg.rhs = "one";
    const CommandResult r = cmd_ratio_study(cfg);
    CHECK(r.exit_code == 0);
    const auto& rows = r.report["rows"];
    REQUIRE(rows.size() == 2);
    const double k1 = rows[0]["kappa"].get<double>();
    const double k2 = rows[1]["kappa"].get<double>();
    CHECK(k2 <= rows[1]["envelope"].get<double>() * (1.0 + 1e-9));
    CHECK(k2 / k1 <= 9.0);  // q(2)^2 / q(1)^2
}

TEST_CASE("convergence command reports decreasing errors") {
    RunConfig cfg;
    cfg.geometry = two_patch_geo();
    cfg.degree = 1;
    cfg.refine = {1};
    cfg.manufactured = "sinsin";
    cfg.conv_levels = 3;
    const CommandResult r = cmd_convergence(cfg);
    CHECK(r.exit_code == 0);
    const auto& rows = r.report["rows"];
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 1; i < rows.size(); ++i)
        CHECK(rows[i]["dg_error"].get<double>() < rows[i - 1]["dg_error"].get<double>());
}

TEST_CASE("line fit recovers exact linear data") {
    const LineFit f = fit_line({1, 2, 3, 4}, {3, 5, 7, 9});
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.r2 == doctest::Approx(1.0));
}

TEST_CASE("csv float format is 17 significant digits") {
    CHECK(fmt17(1.0 / 3.0) == "0.33333333333333331");
    CHECK(fmt17(2.0) == "2");
}
