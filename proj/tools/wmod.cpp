#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "wmod/cli.hpp"

int main(int argc, char** argv) {
    using namespace wmod::cli;

    CLI::App app{"Generalized shift, modulus of smoothness and weighted best approximation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    bool force = false;
    int resolution = 0;
    app.add_option("--config", config_path,
                   std::string("run configuration (default: $") + kConfigEnv + ")");
    app.add_option("--output", output_dir, "output directory (overrides the config)");
    app.add_flag("--force", force, "skip the selftest stamp check");
    app.add_option("--resolution", resolution, "multiply all quadrature node counts by K")
        ->check(CLI::Range(1, 16));

    auto* selftest = app.add_subcommand("selftest", "certify the kernel and probe the operator norm");
    auto* curves = app.add_subcommand("curves", "write E_n and omega curves");
    auto* verify = app.add_subcommand("verify", "run the theorem checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsageError;
    }

    RunConfig config;
    try {
        if (config_path.empty()) {
            if (const char* env = std::getenv(kConfigEnv)) config_path = env;
        }
        if (config_path.empty()) {
            throw ConfigError(std::string("no configuration: pass --config or set ") + kConfigEnv);
        }
        config = load_run_config(config_path);
        if (!output_dir.empty()) config.output_dir = output_dir;
        if (resolution > 0) config.resolution = resolution;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    }

    if (selftest->parsed()) return cmd_selftest(config, std::cerr);
    if (curves->parsed()) return cmd_curves(config, force, std::cerr);
    if (verify->parsed()) return cmd_verify(config, force, std::cerr);
    return kUsageError;
}
