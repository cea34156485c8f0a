// SPDX-License-Identifier: Apache-2.0

#include "dgieti/experiment.hpp"

#include "dgieti/assembly.hpp"
#include "dgieti/ieti.hpp"
#include "dgieti/norms.hpp"
#include "dgieti/quadrature.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace dgieti {

namespace {

using nlohmann::json;
constexpr double kPi = std::numbers::pi;

const std::vector<Manufactured>& registry() {
    static const std::vector<Manufactured> reg = {
        {"sinsin", [](const Vec2& x) { return std::sin(kPi * x[0]) * std::sin(kPi * x[1]); },
         [](const Vec2& x) {
             return Vec2(kPi * std::cos(kPi * x[0]) * std::sin(kPi * x[1]),
                         kPi * std::sin(kPi * x[0]) * std::cos(kPi * x[1]));
         },
         [](const Vec2& x) {
             return 2.0 * kPi * kPi * std::sin(kPi * x[0]) * std::sin(kPi * x[1]);
         }},
        {"linear-x", [](const Vec2& x) { return x[0]; },
         [](const Vec2&) { return Vec2(1.0, 0.0); }, [](const Vec2&) { return 0.0; }},
        {"zero", [](const Vec2&) { return 0.0; }, [](const Vec2&) { return Vec2(0.0, 0.0); },
         [](const Vec2&) { return 0.0; }},
    };
    return reg;
}

}  // namespace

const Manufactured* find_manufactured(const std::string& name) {
    for (const auto& m : registry())
        if (m.name == name) return &m;
    return nullptr;
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    if (n < 2 || y.size() != x.size()) throw DimensionError("fit_line: need >= 2 points");
    double sx = 0, sy = 0;
    for (int i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

RunConfig parse_config(const json& j) {
    RunConfig cfg;
    if (!j.contains("geometry")) throw ConfigError("config: missing geometry");
    cfg.geometry = j.at("geometry");
    cfg.degree = j.value("degree", 2);
    if (cfg.degree < 1) throw ConfigError("config: degree must be >= 1");

    if (j.contains("refine")) {
        if (j["refine"].is_array())
            cfg.refine = j["refine"].get<std::vector<int>>();
        else
            cfg.refine = {j["refine"].get<int>()};
    }
    for (int r : cfg.refine)
        if (r < 0) throw ConfigError("config: refine levels must be >= 0");

    if (j.contains("alpha")) {
        if (j["alpha"].is_array())
            cfg.alpha = j["alpha"].get<std::vector<double>>();
        else
            cfg.alpha = {j["alpha"].get<double>()};
    }
    cfg.delta = j.value("delta", -1.0);
    if (j.contains("delta") && cfg.delta <= 0.0) throw ConfigError("config: delta must be > 0");
    cfg.tol = j.value("tol", 1e-8);
    if (cfg.tol <= 0.0 || cfg.tol >= 1.0) throw ConfigError("config: tol must be in (0,1)");
    cfg.maxit = j.value("maxit", 500);
    cfg.manufactured = j.value("manufactured", std::string());
    if (!cfg.manufactured.empty() && !find_manufactured(cfg.manufactured))
        throw ConfigError("config: unknown manufactured solution " + cfg.manufactured);
    cfg.rhs = j.value("rhs", std::string("one"));
    cfg.oracle = j.value("oracle", false);
    if (j.contains("levels")) cfg.levels = j["levels"].get<std::vector<int>>();
    if (j.contains("ratios")) cfg.ratios = j["ratios"].get<std::vector<int>>();
    cfg.conv_levels = j.value("conv_levels", 4);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    in >> j;
    return parse_config(j);
}

KnotVector solution_kv(const KnotVector& geom_kv, int degree, int levels) {
    const auto bp = geom_kv.breakpoints();
    std::vector<double> knots(degree + 1, 0.0);
    knots.insert(knots.end(), bp.begin() + 1, bp.end() - 1);
    knots.insert(knots.end(), degree + 1, 1.0);
    return KnotVector(degree, std::move(knots)).uniform_refine(levels);
}

namespace {

struct RawPatch {
    TensorSplineSpace geom;
    std::vector<Vec2> cps;
};

struct RawGeometry {
    std::vector<RawPatch> patches;
    std::vector<Interface> interfaces;
    std::vector<Side> dirichlet;
    std::vector<Side> neumann;
};

RawPatch bilinear_quad(const Vec2& p00, const Vec2& p10, const Vec2& p01, const Vec2& p11) {
    TensorSplineSpace geom(KnotVector::single_span(1), KnotVector::single_span(1));
    return {geom, {p00, p10, p01, p11}};
}

RawGeometry gen_square_grid(int nx, int ny, const json& dirichlet_policy) {
    RawGeometry g;
    auto idx = [&](int i, int j) { return j * nx + i; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double x0 = static_cast<double>(i) / nx, x1 = static_cast<double>(i + 1) / nx;
            const double y0 = static_cast<double>(j) / ny, y1 = static_cast<double>(j + 1) / ny;
            g.patches.push_back(bilinear_quad({x0, y0}, {x1, y0}, {x0, y1}, {x1, y1}));
        }
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i)
            g.interfaces.push_back({{idx(i, j), SideId::east},
                                    {idx(i + 1, j), SideId::west},
                                    Orientation::same});
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i < nx; ++i)
            g.interfaces.push_back({{idx(i, j), SideId::north},
                                    {idx(i, j + 1), SideId::south},
                                    Orientation::same});

    std::vector<SideId> d_sides;
    if (dirichlet_policy.is_string() && dirichlet_policy.get<std::string>() == "all")
        d_sides = {SideId::west, SideId::east, SideId::south, SideId::north};
    else if (dirichlet_policy.is_array())
        for (const auto& s : dirichlet_policy) d_sides.push_back(side_from_name(s));
    else
        throw ConfigError("square_grid: dirichlet must be \"all\" or a side list");

    auto is_d = [&](SideId s) {
        return std::find(d_sides.begin(), d_sides.end(), s) != d_sides.end();
    };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            auto tag = [&](SideId s) {
                (is_d(s) ? g.dirichlet : g.neumann).push_back({idx(i, j), s});
            };
            if (i == 0) tag(SideId::west);
            if (i == nx - 1) tag(SideId::east);
            if (j == 0) tag(SideId::south);
            if (j == ny - 1) tag(SideId::north);
        }
    return g;
}

// L-shaped domain ((0,2)x(0,1)) u ((0,1)x(0,2)) as two bilinear quads
// sharing the diagonal edge from (0,0) to (1,1).
RawGeometry gen_lshape() {
    RawGeometry g;
    const Vec2 a{0, 0}, b{2, 0}, c{2, 1}, d{1, 1}, e{1, 2}, f{0, 2};
    g.patches.push_back(bilinear_quad(a, b, d, c));
    g.patches.push_back(bilinear_quad(a, d, f, e));
    g.interfaces.push_back({{0, SideId::west}, {1, SideId::south}, Orientation::same});
    g.dirichlet = {{0, SideId::south}, {0, SideId::east}, {0, SideId::north},
                   {1, SideId::east},  {1, SideId::north}, {1, SideId::west}};
    return g;
}

// Quarter annulus r in [1,2] split at 45 degrees, polynomial quadratic arcs.
RawGeometry gen_quarter_annulus() {
    RawGeometry g;
    auto arc_patch = [&](double th0, double th1) {
        const double thm = 0.5 * (th0 + th1);
        const double w = std::cos(0.5 * (th1 - th0));
        const Vec2 q[3] = {{std::cos(th0), std::sin(th0)},
                           {std::cos(thm) / w, std::sin(thm) / w},
                           {std::cos(th1), std::sin(th1)}};
        TensorSplineSpace geom(KnotVector::single_span(1), KnotVector::single_span(2));
        std::vector<Vec2> cps;
        for (int i2 = 0; i2 < 3; ++i2)
            for (int i1 = 0; i1 < 2; ++i1) cps.push_back((1.0 + i1) * q[i2]);
        return RawPatch{geom, cps};
    };
    g.patches.push_back(arc_patch(0.0, kPi / 4.0));
    g.patches.push_back(arc_patch(kPi / 4.0, kPi / 2.0));
    g.interfaces.push_back({{0, SideId::north}, {1, SideId::south}, Orientation::same});
    g.dirichlet = {{0, SideId::west}, {0, SideId::east}, {0, SideId::south},
                   {1, SideId::west}, {1, SideId::east}, {1, SideId::north}};
    return g;
}

RawGeometry gen_from_json(const json& geo) {
    if (geo.contains("generator")) {
        const auto& gen = geo.at("generator");
        const std::string kind = gen.at("kind").get<std::string>();
        if (kind == "square_grid")
            return gen_square_grid(gen.value("nx", 2), gen.value("ny", 1),
                                   gen.value("dirichlet", json("all")));
        if (kind == "lshape") return gen_lshape();
        if (kind == "quarter_annulus") return gen_quarter_annulus();
        throw ConfigError("unknown generator kind: " + kind);
    }

    RawGeometry g;
    for (const auto& pj : geo.at("patches")) {
        KnotVector ku(pj.value("degree_u", 1), pj.at("knots_u").get<std::vector<double>>());
        KnotVector kv(pj.value("degree_v", 1), pj.at("knots_v").get<std::vector<double>>());
        TensorSplineSpace geom(ku, kv);
        std::vector<Vec2> cps;
        for (const auto& c : pj.at("control_points"))
            cps.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
        g.patches.push_back({geom, std::move(cps)});
    }
    auto parse_side = [](const json& sj) {
        return Side{sj.at("patch").get<int>(), side_from_name(sj.at("side").get<std::string>())};
    };
    for (const auto& ij : geo.value("interfaces", json::array())) {
        Interface f{parse_side(ij.at("a")), parse_side(ij.at("b")),
                    ij.value("orientation", std::string("same")) == "reversed"
                        ? Orientation::reversed
                        : Orientation::same};
        g.interfaces.push_back(f);
    }
    for (const auto& sj : geo.value("dirichlet", json::array())) g.dirichlet.push_back(parse_side(sj));
    for (const auto& sj : geo.value("neumann", json::array())) g.neumann.push_back(parse_side(sj));
    return g;
}

}  // namespace

int geometry_num_patches(const RunConfig& cfg) {
    return static_cast<int>(gen_from_json(cfg.geometry).patches.size());
}

std::vector<int> refine_vector(const RunConfig& cfg, int offset) {
    const int np = geometry_num_patches(cfg);
    if (cfg.refine.size() != 1 && static_cast<int>(cfg.refine.size()) != np)
        throw ConfigError("config: refine list does not match patch count");
    std::vector<int> out(np);
    for (int k = 0; k < np; ++k) {
        const int base = cfg.refine.size() == 1 ? cfg.refine[0] : cfg.refine[k];
        out[k] = base + offset;
    }
    return out;
}

MultiPatch build_multipatch(const RunConfig& cfg, const std::vector<int>& refine_per_patch) {
    RawGeometry g = gen_from_json(cfg.geometry);
    const int np = static_cast<int>(g.patches.size());
    if (static_cast<int>(refine_per_patch.size()) != np)
        throw ConfigError("refine vector does not match patch count");
    if (cfg.refine.size() != 1 && static_cast<int>(cfg.refine.size()) != np)
        throw ConfigError("config: refine list does not match patch count");
    if (cfg.alpha.size() != 1 && static_cast<int>(cfg.alpha.size()) != np)
        throw ConfigError("config: alpha list does not match patch count");

    std::vector<Patch> patches;
    patches.reserve(np);
    for (int k = 0; k < np; ++k) {
        TensorSplineSpace sol(solution_kv(g.patches[k].geom.kv(0), cfg.degree, refine_per_patch[k]),
                              solution_kv(g.patches[k].geom.kv(1), cfg.degree, refine_per_patch[k]));
        const double a = cfg.alpha.size() == 1 ? cfg.alpha[0] : cfg.alpha[k];
        patches.emplace_back(g.patches[k].geom, g.patches[k].cps, std::move(sol), a);
    }
    MultiPatch mp(std::move(patches), g.interfaces, g.dirichlet, g.neumann);
    const auto violations = verify_topology(mp, 1e-8);
    if (!violations.empty()) throw TopologyError(violations.front().detail);
    return mp;
}

namespace {

struct Errors {
    double l2 = 0.0;
    double dg = 0.0;
};

Errors solution_errors(const MultiPatch& mp, const std::vector<Vector>& own_full,
                       const Manufactured& man, double delta) {
    double l2_sq = 0.0;
    double grad_sq = 0.0;
    for (int k = 0; k < mp.num_patches(); ++k) {
        const Patch& patch = mp.patch(k);
        const auto& sp = patch.space();
        const int np = std::max(sp.kv(0).degree(), sp.kv(1).degree()) + 2;
        const auto& rule = gauss_rule(np);
        const auto b1 = sp.kv(0).breakpoints();
        const auto b2 = sp.kv(1).breakpoints();
        for (std::size_t e1 = 0; e1 + 1 < b1.size(); ++e1)
            for (std::size_t e2 = 0; e2 + 1 < b2.size(); ++e2)
                for (std::size_t g1 = 0; g1 < rule.nodes.size(); ++g1)
                    for (std::size_t g2 = 0; g2 < rule.nodes.size(); ++g2) {
                        const double x1 = b1[e1] + rule.nodes[g1] * (b1[e1 + 1] - b1[e1]);
                        const double x2 = b2[e2] + rule.nodes[g2] * (b2[e2 + 1] - b2[e2]);
                        const auto fe = eval_field(patch, own_full[k], x1, x2);
                        const auto ge = patch.eval_geometry(x1, x2);
                        const double w = ge.jacobian.determinant() * rule.weights[g1] *
                                         rule.weights[g2] * (b1[e1 + 1] - b1[e1]) *
                                         (b2[e2 + 1] - b2[e2]);
                        const double du = fe.value - man.u(fe.x);
                        l2_sq += du * du * w;
                        grad_sq += patch.alpha() * (fe.grad - man.grad(fe.x)).squaredNorm() * w;
                    }
    }
    // the exact solution is continuous: the jump of the error is the jump of u_h
    const double jump_sq = interface_jump_energy_sq(mp, own_full, delta);
    return {std::sqrt(l2_sq), std::sqrt(grad_sq + jump_sq)};
}

}  // namespace

SolveSummary run_solve(const MultiPatch& mp, const RunConfig& cfg) {
    const double delta = cfg.effective_delta();
    auto systems = assemble_all(mp, delta);

    const Manufactured* man =
        cfg.manufactured.empty() ? nullptr : find_manufactured(cfg.manufactured);

    std::vector<Vector> loads(mp.num_patches());
    for (int k = 0; k < mp.num_patches(); ++k) {
        const double a = mp.patch(k).alpha();
        VolumeLoad f;
        BoundaryFlux gn;
        if (man) {
            f = [man, a](const Vec2& x) { return a * man->neg_laplace(x); };
            gn = [man, a](const Vec2& x, const Vec2& n) { return a * man->grad(x).dot(n); };
        } else if (cfg.rhs == "one") {
            f = [](const Vec2&) { return 1.0; };
        } else if (cfg.rhs == "zero") {
            // zero load
        } else {
            throw ConfigError("unknown rhs: " + cfg.rhs);
        }
        loads[k] = assemble_load(mp, k, systems[k].map, f, gn);
    }

    auto res = solve_ieti(mp, systems, loads, cfg.tol, cfg.maxit);

    SolveSummary s;
    s.n_patches = mp.num_patches();
    s.n_multipliers = res.n_multipliers;
    s.n_primal = res.n_primal;
    s.iterations = res.pcg.iterations;
    s.converged = res.pcg.converged;
    s.lambda_min = res.pcg.lambda_min;
    s.lambda_max = res.pcg.lambda_max;
    s.kappa = res.pcg.kappa;

    const auto maps = build_dof_maps(mp);
    s.n_dofs = build_global_dof_map(mp, maps).n_global;

    double umax = 0.0;
    s.own_full.resize(mp.num_patches());
    for (int k = 0; k < mp.num_patches(); ++k) {
        s.own_full[k] = to_full(mp, k, systems[k].map, res.ext[k]).own;
        if (s.own_full[k].size() > 0)
            umax = std::max(umax, s.own_full[k].cwiseAbs().maxCoeff());
    }
    s.jump_residual = umax > 0.0 ? res.jump_inf / umax : res.jump_inf;

    for (int k = 0; k < mp.num_patches(); ++k) {
        const auto m = compute_metrics(mp.patch(k));
        s.h_over_h = std::max(s.h_over_h, m.H / m.h);
    }

    if (man) {
        const auto err = solution_errors(mp, s.own_full, *man, delta);
        s.l2_error = err.l2;
        s.dg_error = err.dg;
    }
    return s;
}

namespace {

json config_echo(const RunConfig& cfg) {
    json j;
    j["geometry"] = cfg.geometry;
    j["degree"] = cfg.degree;
    j["refine"] = cfg.refine;
    j["alpha"] = cfg.alpha;
    j["delta"] = cfg.effective_delta();
    j["tol"] = cfg.tol;
    j["maxit"] = cfg.maxit;
    j["manufactured"] = cfg.manufactured;
    j["rhs"] = cfg.rhs;
    j["oracle"] = cfg.oracle;
    return j;
}

json summary_json(const SolveSummary& s) {
    json j;
    j["patches"] = s.n_patches;
    j["dofs"] = s.n_dofs;
    j["multipliers"] = s.n_multipliers;
    j["primal"] = s.n_primal;
    j["iterations"] = s.iterations;
    j["converged"] = s.converged;
    j["lambda_min"] = s.lambda_min;
    j["lambda_max"] = s.lambda_max;
    j["kappa"] = s.kappa;
    j["dg_error"] = s.dg_error;
    j["l2_error"] = s.l2_error;
    j["jump_residual"] = s.jump_residual;
    j["H_over_h"] = s.h_over_h;
    return j;
}

}  // namespace

CommandResult cmd_solve(const RunConfig& cfg) {
    CommandResult out;
    const MultiPatch mp = build_multipatch(cfg, refine_vector(cfg));
    const auto s = run_solve(mp, cfg);

    std::ostringstream csv;
    csv << "patches,dofs,multipliers,primal,iterations,converged,lambda_min,lambda_max,kappa,"
           "dg_error,l2_error,jump_residual\n";
    csv << s.n_patches << ',' << s.n_dofs << ',' << s.n_multipliers << ',' << s.n_primal << ','
        << s.iterations << ',' << (s.converged ? 1 : 0) << ',' << fmt17(s.lambda_min) << ','
        << fmt17(s.lambda_max) << ',' << fmt17(s.kappa) << ',' << fmt17(s.dg_error) << ','
        << fmt17(s.l2_error) << ',' << fmt17(s.jump_residual) << '\n';
    out.csv = csv.str();

    out.report["command"] = "solve";
    out.report["config"] = config_echo(cfg);
    out.report["result"] = summary_json(s);

    if (cfg.oracle) {
        const double delta = cfg.effective_delta();
        auto systems = assemble_all(mp, delta);
        std::vector<PatchSchur> schur;
        schur.reserve(systems.size());
        for (const auto& sys : systems) schur.emplace_back(sys);
        IetiSystem ieti(mp, systems, schur);
        if (ieti.num_multipliers() > 0 && ieti.num_multipliers() <= 2000) {
            const Vector eigs = ieti.dense_spectrum_oracle();
            out.report["oracle"]["lambda_min"] = eigs[0];
            out.report["oracle"]["lambda_max"] = eigs[eigs.size() - 1];
            out.report["oracle"]["kappa"] = eigs[eigs.size() - 1] / eigs[0];
        }
    }

    out.exit_code = s.converged ? 0 : 2;
    return out;
}

CommandResult cmd_kappa_study(const RunConfig& cfg) {
    if (cfg.levels.size() < 3) throw ConfigError("kappa-study: need at least 3 levels");
    CommandResult out;
    std::ostringstream csv;
    csv << "level,H_over_h,dofs,iterations,lambda_min,lambda_max,kappa\n";
    std::vector<double> xs, ys;
    json rows = json::array();
    bool failed = false;

    for (int level : cfg.levels) {
        try {
            const int np = geometry_num_patches(cfg);
            const MultiPatch mp = build_multipatch(cfg, std::vector<int>(np, level));
            const auto s = run_solve(mp, cfg);
            if (!s.converged) failed = true;
            csv << level << ',' << fmt17(s.h_over_h) << ',' << s.n_dofs << ',' << s.iterations
                << ',' << fmt17(s.lambda_min) << ',' << fmt17(s.lambda_max) << ',' << fmt17(s.kappa)
                << '\n';
            const double lx = 1.0 + std::log(s.h_over_h);
            xs.push_back(lx * lx);
            ys.push_back(s.kappa);
            json row = summary_json(s);
            row["level"] = level;
            rows.push_back(row);
        } catch (const std::exception& ex) {
            failed = true;
            csv << level << ",error,,,,,\n";
            rows.push_back({{"level", level}, {"error", ex.what()}});
        }
    }

    out.csv = csv.str();
    out.report["command"] = "kappa-study";
    out.report["config"] = config_echo(cfg);
    out.report["rows"] = rows;
    if (xs.size() >= 2) {
        const LineFit f = fit_line(xs, ys);
        out.report["regression"] = {
            {"model", "kappa ~ slope*(1+log(H/h))^2 + intercept"},
            {"slope", f.slope},
            {"intercept", f.intercept},
            {"r2", f.r2}};
    }
    out.exit_code = failed ? 2 : 0;
    return out;
}

CommandResult cmd_ratio_study(const RunConfig& cfg) {
    if (geometry_num_patches(cfg) != 2)
        throw ConfigError("ratio-study: two-patch geometry required");
    CommandResult out;
    std::ostringstream csv;
    csv << "ratio,q_h,kappa,envelope\n";
    json rows = json::array();
    bool failed = false;
    const int base = cfg.refine.at(0);
    double c_cal = -1.0;

    for (int ratio : cfg.ratios) {
        const int extra = static_cast<int>(std::lround(std::log2(ratio)));
        if ((1 << extra) != ratio) throw ConfigError("ratio-study: ratios must be powers of two");
        try {
            const MultiPatch mp = build_multipatch(cfg, {base, base + extra});
            const auto s = run_solve(mp, cfg);
            if (!s.converged) failed = true;
            const double q = static_cast<double>(ratio) + static_cast<double>(ratio) * ratio;
            const double lx = 1.0 + std::log(s.h_over_h);
            if (c_cal < 0.0) c_cal = s.kappa / (q * q * lx * lx);
            const double envelope = c_cal * q * q * lx * lx;
            csv << ratio << ',' << fmt17(q) << ',' << fmt17(s.kappa) << ',' << fmt17(envelope)
                << '\n';
            json row = summary_json(s);
            row["ratio"] = ratio;
            row["q_h"] = q;
            row["envelope"] = envelope;
            rows.push_back(row);
        } catch (const std::exception& ex) {
            failed = true;
            csv << ratio << ",error,,\n";
            rows.push_back({{"ratio", ratio}, {"error", ex.what()}});
        }
    }
    out.csv = csv.str();
    out.report["command"] = "ratio-study";
    out.report["config"] = config_echo(cfg);
    out.report["rows"] = rows;
    out.exit_code = failed ? 2 : 0;
    return out;
}

CommandResult cmd_convergence(const RunConfig& cfg) {
    if (cfg.manufactured.empty())
        throw ConfigError("convergence: a manufactured solution is required");
    CommandResult out;
    std::ostringstream csv;
    csv << "level,h,dg_error,l2_error,dg_rate,l2_rate\n";
    json rows = json::array();
    bool failed = false;

    double prev_h = 0.0, prev_dg = 0.0, prev_l2 = 0.0;
    for (int lvl = 0; lvl < cfg.conv_levels; ++lvl) {
        try {
            const MultiPatch mp = build_multipatch(cfg, refine_vector(cfg, lvl));
            const auto s = run_solve(mp, cfg);
            if (!s.converged) failed = true;
            double h = 0.0;
            for (int k = 0; k < mp.num_patches(); ++k)
                h = std::max(h, compute_metrics(mp.patch(k)).h);
            json row = summary_json(s);
            row["level"] = lvl;
            row["h"] = h;
            std::string dg_rate, l2_rate;
            if (lvl > 0 && s.dg_error > 0.0 && prev_dg > 0.0) {
                const double r = std::log(prev_dg / s.dg_error) / std::log(prev_h / h);
                dg_rate = fmt17(r);
                row["dg_rate"] = r;
            }
            if (lvl > 0 && s.l2_error > 0.0 && prev_l2 > 0.0) {
                const double r = std::log(prev_l2 / s.l2_error) / std::log(prev_h / h);
                l2_rate = fmt17(r);
                row["l2_rate"] = r;
            }
            csv << lvl << ',' << fmt17(h) << ',' << fmt17(s.dg_error) << ',' << fmt17(s.l2_error)
                << ',' << dg_rate << ',' << l2_rate << '\n';
            rows.push_back(row);
            prev_h = h;
            prev_dg = s.dg_error;
            prev_l2 = s.l2_error;
        } catch (const std::exception& ex) {
            failed = true;
            csv << lvl << ",error,,,,\n";
            rows.push_back({{"level", lvl}, {"error", ex.what()}});
        }
    }
    out.csv = csv.str();
    out.report["command"] = "convergence";
    out.report["config"] = config_echo(cfg);
    out.report["rows"] = rows;
    out.exit_code = failed ? 2 : 0;
    return out;
}

void write_outputs(const CommandResult& result, const std::string& outdir) {
    std::filesystem::create_directories(outdir);
    {
        std::ofstream f(std::filesystem::path(outdir) / "results.csv");
        f << result.csv;
    }
    {
        std::ofstream f(std::filesystem::path(outdir) / "report.json");
        f << result.report.dump(2) << '\n';
    }
}

}  // namespace dgieti
