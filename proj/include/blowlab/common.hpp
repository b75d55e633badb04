#pragma once

#include <cstdio>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace blowlab {

// Thrown when the adaptive integrator cannot make progress (t + h == t).
struct StepUnderflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when an accepted state violates a structural invariant
// (monotonicity, positivity, inconsistent blow-up estimate, ...).
struct InvariantViolationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a data set is too small / too short for the requested analysis.
struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All numeric output is printed with 17 significant digits so that
// round-tripping through text is lossless for doubles.
inline std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path)
    {
        if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    }

    void header(const std::vector<std::string>& cols)
    {
        for (std::size_t i = 0; i < cols.size(); ++i)
            out_ << (i ? "," : "") << cols[i];
        out_ << '\n';
    }

    void row(std::span<const double> vals)
    {
        for (std::size_t i = 0; i < vals.size(); ++i)
            out_ << (i ? "," : "") << fmt17(vals[i]);
        out_ << '\n';
    }

    std::ofstream& stream() { return out_; }

private:
    std::ofstream out_;
};

}  // namespace blowlab
