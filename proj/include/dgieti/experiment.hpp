// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dgieti/geometry.hpp"
#include "dgieti/linalg.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dgieti {

/// Manufactured solution with analytically derived data.
struct Manufactured {
    std::string name;
    std::function<double(const Vec2&)> u;
    std::function<Vec2(const Vec2&)> grad;
    std::function<double(const Vec2&)> neg_laplace;  // -Laplace u
};
const Manufactured* find_manufactured(const std::string& name);

struct RunConfig {
    nlohmann::json geometry;
    int degree = 2;
    std::vector<int> refine{2};
    std::vector<double> alpha{1.0};
    double delta = -1.0;  // default (p+1)(p+d)
    double tol = 1e-8;
    int maxit = 500;
    std::string manufactured;  // empty: use `rhs`
    std::string rhs = "one";
    bool oracle = false;
    std::vector<int> levels{2, 3, 4};   // kappa study
    std::vector<int> ratios{1, 2, 4};   // ratio study
    int conv_levels = 4;

    double effective_delta() const { return delta > 0.0 ? delta : (degree + 1.0) * (degree + 2.0); }
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

int geometry_num_patches(const RunConfig& cfg);
/// Build the multipatch with the given per-patch solution refinement levels.
MultiPatch build_multipatch(const RunConfig& cfg, const std::vector<int>& refine_per_patch);
/// Refinement vector from cfg.refine (broadcast) plus a level offset.
std::vector<int> refine_vector(const RunConfig& cfg, int offset = 0);

/// Solution-space knot vector: geometry breakpoints, given degree, refined.
KnotVector solution_kv(const KnotVector& geom_kv, int degree, int levels);

struct SolveSummary {
    int n_patches = 0;
    int n_dofs = 0;
    int n_multipliers = 0;
    int n_primal = 0;
    int iterations = 0;
    bool converged = false;
    double lambda_min = 0.0, lambda_max = 0.0, kappa = 0.0;
    double dg_error = 0.0, l2_error = 0.0;
    double jump_residual = 0.0;
    double h_over_h = 0.0;  // max_k H_k / h_k
    std::vector<Vector> own_full;  // per-patch solution coefficients
};

/// Assemble and solve one configuration on an already built multipatch.
SolveSummary run_solve(const MultiPatch& mp, const RunConfig& cfg);

struct CommandResult {
    int exit_code = 0;
    std::string csv;
    nlohmann::json report;
};

CommandResult cmd_solve(const RunConfig& cfg);
CommandResult cmd_kappa_study(const RunConfig& cfg);
CommandResult cmd_ratio_study(const RunConfig& cfg);
CommandResult cmd_convergence(const RunConfig& cfg);

void write_outputs(const CommandResult& result, const std::string& outdir);

/// Least-squares line fit y = slope x + intercept with R^2.
struct LineFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

std::string fmt17(double v);

}  // namespace dgieti
