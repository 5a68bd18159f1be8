#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>
#include <vector>

#include "criteria.hpp"

namespace {

int usage() {
    std::fprintf(stderr, "usage: stackrl_acceptance [--criterion N]...\n");
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    using stackrl::acceptance::kCriterionCount;
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") != 0 || i + 1 >= argc) return usage();
        const int n = std::atoi(argv[++i]);
        if (n < 1 || n > kCriterionCount) return usage();
        ids.push_back(n);
    }
    if (ids.empty()) {
        for (int n = 1; n <= kCriterionCount; ++n) ids.push_back(n);
    }

    int failures = 0;
    for (int n : ids) {
        const auto t0 = std::chrono::steady_clock::now();
        stackrl::acceptance::Outcome outcome;
        try {
            outcome = stackrl::acceptance::run_criterion(n);
        } catch (const std::exception& e) {
            outcome = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %d: %s %s (%.1fs)\n", n, outcome.pass ? "PASS" : "FAIL", outcome.detail.c_str(), secs);
        std::fflush(stdout);
        if (!outcome.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
