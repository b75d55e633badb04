#include <cstdlib>
#include <iostream>
#include <vector>

#include "blowlab/acceptance.hpp"

// Runs the acceptance criteria given as arguments (all of them without
// arguments) and exits nonzero if any fails.
int main(int argc, char** argv)
{
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i) {
        const int id = std::atoi(argv[i]);
        if (id < 1 || id > blowlab::acceptance::kCriterionCount) {
            std::cerr << "unknown criterion id: " << argv[i] << "\n";
            return 2;
        }
        ids.push_back(id);
    }
    const auto results = blowlab::acceptance::run(ids, std::cout);
    for (const auto& r : results)
        if (!r.pass) return 1;
    return 0;
}
