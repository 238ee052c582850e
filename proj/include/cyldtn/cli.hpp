#pragma once

#include <string>

#include "cyldtn/dispersion.hpp"
#include "cyldtn/transport.hpp"

namespace cyldtn {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScanParams {
    double k_min = 0.1;
    double k_max = 3.0;
    int k_count = 20;
    double e_min = -12.0;
    double e_max = -0.1;
    int e_grid = 24;
    double band_window = 0.5;  // corrector window for continuation
    double efn_k = 0.7;        // eigenfunction command: target quasimomentum
    double efn_r_max = 6.0;
};

struct OracleParams {
    double box_L = 12.0;
    int box_nr = 84;
};

/// Full run configuration: waveguide plus command-specific parameters.
struct RunConfig {
    WaveguideConfig wg;
    ScanParams scan;
    TransportParams transport;
    OracleParams oracle;

    /// hash of the canonicalized geometry+potential+truncation sections
    std::string config_hash() const;
};

/// Parse the flat `key = value` config format with [sections]. Unknown or
/// duplicate keys are rejected; constraint violations name the key.
RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

/// Execute one CLI command. Commands: validate, dispersion, eigenfunction,
/// transport, oracle-compare. Returns the process exit status
/// (0 success, 1 failed validation/runtime, 2 config error).
int run_command(const std::string& command, const RunConfig& cfg, const std::string& out_dir,
                int threads);

/// Band persistence used by the dispersion/transport commands.
std::string bands_to_json(const RunConfig& cfg, const std::vector<Band>& bands);
std::vector<Band> bands_from_json(const std::string& text, const RunConfig& cfg);
std::string band_csv(const std::vector<Band>& bands);
std::string transport_csv(const TransportRecord& rec);

}  // namespace cyldtn
