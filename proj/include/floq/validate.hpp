#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "floq/chrono_sweep.hpp"

namespace floq {

struct CheckResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string details;
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    double wall_seconds = 0.0;
    bool all_pass() const;
};

// The full validation battery (10 criteria). Progress lines are written per
// criterion when a stream is given. Deterministic for a fixed seed.
ValidationReport run_acceptance(unsigned seed = 12345, std::ostream* progress = nullptr);

// Chronotherapy criterion evaluated on an existing sweep; split out so a
// tampered sweep (e.g. sign-flipped sensitivity) can be shown to fail.
CheckResult evaluate_chrono_criterion(const ChronoSweep& sweep);

std::string report_to_json(const ValidationReport& report);
void print_report(const ValidationReport& report, std::ostream& os);

}  // namespace floq
