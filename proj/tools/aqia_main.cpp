#include <exception>
#include <iostream>

#include "aqia/cli.hpp"

int main(int argc, char** argv) {
    aqia::RunConfig config;
    try {
        if (!aqia::parse_config(argc, argv, config)) return aqia::kExitOk;
    } catch (const aqia::ConfigError& e) {
        std::cerr << "aqia: " << e.what() << '\n';
        return aqia::kExitConfig;
    }
    try {
        const int status = aqia::run_command(config);
        if (status == aqia::kExitWarnings)
            std::cerr << "aqia: completed with warnings (see the .meta.json sidecars in " << config.out.string()
                      << ")\n";
        return status;
    } catch (const aqia::ConfigError& e) {
        std::cerr << "aqia: " << e.what() << '\n';
        return aqia::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "aqia: " << e.what() << '\n';
        return aqia::kExitRuntime;
    }
}
