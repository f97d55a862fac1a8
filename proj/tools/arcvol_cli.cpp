#include <CLI11.hpp>

#include <iostream>

#include "arcvol/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"First-order option pricing under a fast/slow stochastic volatility model"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string dump_path;

    auto add = [&](const char* name, const char* help, bool with_dump) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "key = value run configuration")->required();
        sub->add_option("--out", out_path, "write delimited output to this path");
        if (with_dump) sub->add_option("--paths-dump", dump_path, "write simulated paths as path,time,x,y,z rows");
        return sub;
    };
    auto* price = add("price", "first-order price breakdown", false);
    auto* simulate = add("simulate", "Monte Carlo price and optional epsilon sweep", true);
    auto* calibrate = add("calibrate", "fit a, k, sqrt(eps) V and sigma_bar to an option chain", false);
    auto* diagnose = add("diagnose", "consistency and convergence diagnostics", false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const auto cfg = arcvol::load_config(config_path);
        arcvol::CommandIo io;
        if (!out_path.empty()) io.out_path = out_path;
        if (!dump_path.empty()) io.paths_dump = dump_path;

        if (price->parsed()) return arcvol::cmd_price(cfg, std::cout, io);
        if (simulate->parsed()) return arcvol::cmd_simulate(cfg, std::cout, io);
        if (calibrate->parsed()) return arcvol::cmd_calibrate(cfg, std::cout, std::cerr, io);
        if (diagnose->parsed()) return arcvol::cmd_diagnose(cfg, std::cout, io);
    } catch (const arcvol::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return arcvol::exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
