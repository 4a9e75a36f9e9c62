#pragma once

#include <string>
#include <vector>

namespace ailfem {

// Small-scale end-to-end property checks of every module, for the command
// line front end. Each check reports its name and outcome.
struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

std::vector<CheckResult> run_self_checks();

}  // namespace ailfem
