#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace blowlab::acceptance {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

// Runs the requested criteria (all 12 when ids is empty), printing one
// PASS/FAIL line per criterion to log.
std::vector<CriterionResult> run(const std::vector<int>& ids, std::ostream& log);

inline constexpr int kCriterionCount = 12;

}  // namespace blowlab::acceptance
