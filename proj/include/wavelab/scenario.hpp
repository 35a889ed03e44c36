#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wavelab/gfun.hpp"
#include "wavelab/propagator.hpp"

namespace wavelab::scenario {

// Flat key=value experiment description: a config file plus command-line
// overrides, resolved into one ordered map.
class ExperimentConfig {
public:
    static ExperimentConfig from_file(const std::string& path,
                                      const std::vector<std::pair<std::string, std::string>>&
                                          overrides = {});
    static ExperimentConfig from_pairs(
        const std::vector<std::pair<std::string, std::string>>& pairs);

    const std::string& scenario() const { return scenario_; }
    const std::string& out_dir() const { return out_dir_; }
    void set_out_dir(std::string dir) { out_dir_ = std::move(dir); }
    int jobs() const { return jobs_; }
    void set_jobs(int j) { jobs_ = j; }

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_seed() const;

    // Resolved solver configuration (grid.N, grid.R, p, dt, T, dt_out, sign,
    // epsilon, g).
    propagator::SolverConfig solver_config() const;
    // Data profile: gaussian-bump:amp,width,center | eigenmode:n |
    // random-smooth:seed,scale.
    WaveState make_data(GridPtr grid) const;
    gfun::GFunction make_g() const;

    nlohmann::json echo() const;

private:
    void finalize();

    std::string scenario_;
    std::string out_dir_ = "wave-lab-out";
    int jobs_ = 1;
    std::vector<std::pair<std::string, std::string>> entries_;
};

// Names a config key and what is wrong with it.
struct ConfigError : Error {
    ConfigError(const std::string& field_, const std::string& msg)
        : Error(msg), field(field_) {}
    std::string field;
};

// Runs one registered scenario headless: writes ledger.csv (when a run is
// produced), report.json and manifest.json under the output directory.
// Returns 0 when every scenario assertion passed, 1 otherwise.
int run_scenario(const ExperimentConfig& config);

// Builds a ladder file rung by rung; the certificate source selects how the
// ledger constants C_i are produced (auto = max(i, C'_i), file = user
// table, measured = ensemble sup of the a-priori quantity).
int build_ladder_command(const ExperimentConfig& config);

const std::vector<std::string>& scenario_registry();

}  // namespace wavelab::scenario
