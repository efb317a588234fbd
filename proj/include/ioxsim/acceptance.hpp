// acceptance.hpp: the end-to-end acceptance suite. Every criterion carries
// its own fixed tolerances and wall-clock budget.

#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace ioxsim {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail;     // measured values against their bounds
    double seconds = 0.0;
    double budget = 0.0;    // seconds
};

// Default seed for random draws; IOXSIM_SEED overrides it.
inline constexpr std::uint64_t kDefaultSeed = 20240611;

// Reads IOXSIM_SEED, falling back to kDefaultSeed.
std::uint64_t seed_from_env();

// Runs criteria 1..8 (or only `only` when nonzero) and prints one
// PASS/FAIL line per criterion to `out` as it completes.
std::vector<CriterionResult> run_acceptance(std::ostream& out, std::uint64_t seed, int only = 0);

}  // namespace ioxsim
