#pragma once

#include <string>
#include <vector>

#include "cyldtn/model.hpp"

namespace cyldtn {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Fast per-module invariant suite behind the `validate` CLI command.
std::vector<CheckResult> run_validation(const WaveguideConfig& cfg, int threads);

}  // namespace cyldtn
