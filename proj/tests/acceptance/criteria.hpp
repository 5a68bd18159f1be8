#pragma once

#include <string>

namespace stackrl::acceptance {

struct Outcome {
    bool pass = false;
    std::string detail;
};

constexpr int kCriterionCount = 10;

// Runs criterion n (1-based). Throws std::out_of_range for unknown ids.
Outcome run_criterion(int n);

}  // namespace stackrl::acceptance
