#include <CLI11.hpp>

#include <iostream>

#include "cyldtn/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Surface-state dispersion, eigenfunctions and ballistic transport for "
                 "Schrodinger operators on R^n x T via two-sided Dirichlet-to-Neumann maps"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    int threads = 1;

    for (const char* name :
         {"validate", "dispersion", "eigenfunction", "transport", "oracle-compare"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "configuration file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--threads", threads, "worker thread count");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        const cyldtn::RunConfig cfg = cyldtn::load_config_file(config_path);
        const std::string cmd = app.get_subcommands().front()->get_name();
        return cyldtn::run_command(cmd, cfg, out_dir, threads);
    } catch (const cyldtn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
