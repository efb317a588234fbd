// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include "ioxsim/acceptance.hpp"

#include <cstdlib>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1) {
        only = std::atoi(argv[1]);
    }
    const auto results = ioxsim::run_acceptance(std::cout, ioxsim::seed_from_env(), only);
    int failed = 0;
    for (const auto& r : results) {
        failed += r.passed ? 0 : 1;
    }
    std::cout << results.size() - static_cast<std::size_t>(failed) << "/" << results.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
