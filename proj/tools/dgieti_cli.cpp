// SPDX-License-Identifier: Apache-2.0

#include "dgieti/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Multipatch IgA diffusion solver with dG interface coupling and a "
                 "dual-primal tearing/interconnecting solver"};
    app.require_subcommand(1);

    std::string config_path, outdir = ".";
    bool oracle = false;
    double delta = -1.0, tol = -1.0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", outdir, "output directory (results.csv, report.json)");
        sub->add_flag("--oracle", oracle, "also run the dense spectrum oracle");
        sub->add_option("--delta", delta, "override the interface penalty");
        sub->add_option("--tol", tol, "override the PCG tolerance");
    };

    auto* c_solve = app.add_subcommand("solve", "solve one configuration");
    auto* c_kappa = app.add_subcommand("kappa-study", "condition number vs refinement level");
    auto* c_ratio = app.add_subcommand("ratio-study", "condition number vs neighbor mesh ratio");
    auto* c_conv = app.add_subcommand("convergence", "error convergence study");
    for (auto* sub : {c_solve, c_kappa, c_ratio, c_conv}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    try {
        dgieti::RunConfig cfg = dgieti::load_config(config_path);
        if (oracle) cfg.oracle = true;
        if (delta > 0.0) cfg.delta = delta;
        if (tol > 0.0) cfg.tol = tol;

        dgieti::CommandResult result;
        if (c_solve->parsed()) result = dgieti::cmd_solve(cfg);
        if (c_kappa->parsed()) result = dgieti::cmd_kappa_study(cfg);
        if (c_ratio->parsed()) result = dgieti::cmd_ratio_study(cfg);
        if (c_conv->parsed()) result = dgieti::cmd_convergence(cfg);

        dgieti::write_outputs(result, outdir);
        std::cout << result.csv;
        if (result.exit_code != 0) std::cerr << "run finished with failures\n";
        return result.exit_code;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
}
