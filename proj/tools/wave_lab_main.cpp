#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wavelab/scenario.hpp"

namespace {

void print_usage() {
    std::cout << "usage: wave-lab <scenario> [--config FILE] [--key value ...] "
                 "[--jobs K] [--out DIR]\n"
              << "       wave-lab build-ladder --rungs N [--ladder.A A] "
                 "[--c_source auto|file|measured] [--out DIR]\n\n"
              << "scenarios:\n";
    for (const auto& name : wavelab::scenario::scenario_registry())
        std::cout << "  " << name << "\n";
    std::cout << "\nConfig files are flat key=value lines; every key can also be\n"
                 "passed as --key value on the command line (later wins).\n"
                 "WAVE_LAB_OUT overrides the output directory.\n";
}

}  // namespace

int main(int argc, char** argv) {
    using wavelab::scenario::ConfigError;
    using wavelab::scenario::ExperimentConfig;

    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty() || args[0] == "--help" || args[0] == "-h") {
        print_usage();
        return args.empty() ? 2 : 0;
    }

    try {
        std::string config_file;
        std::vector<std::pair<std::string, std::string>> overrides;
        overrides.emplace_back("scenario", args[0]);
        for (size_t i = 1; i < args.size(); ++i) {
            const std::string& arg = args[i];
            if (arg.rfind("--", 0) != 0)
                throw ConfigError("argv", "expected --key value, got '" + arg + "'");
            const std::string key = arg.substr(2);
            if (i + 1 >= args.size())
                throw ConfigError(key, "missing value for --" + key);
            const std::string value = args[++i];
            if (key == "config")
                config_file = value;
            else
                overrides.emplace_back(key, value);
        }
        const ExperimentConfig config =
            config_file.empty() ? ExperimentConfig::from_pairs(overrides)
                                : ExperimentConfig::from_file(config_file, overrides);
        return wavelab::scenario::run_scenario(config);
    } catch (const ConfigError& e) {
        const nlohmann::json err = {
            {"error", {{"type", "config-error"}, {"field", e.field}, {"message", e.what()}}}};
        std::cout << err.dump(2) << std::endl;
        return 2;
    } catch (const std::exception& e) {
        const nlohmann::json err = {
            {"error", {{"type", "module-error"}, {"message", e.what()}}}};
        std::cout << err.dump(2) << std::endl;
        return 1;
    }
}
