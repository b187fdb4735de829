// Acceptance suite: runs the full validation battery and prints one
// pass/fail line per criterion. Exit code 0 only when everything passes.

#include <iostream>

#include "floq/validate.hpp"

int main() {
    const floq::ValidationReport report = floq::run_acceptance(12345, nullptr);
    floq::print_report(report, std::cout);
    return report.all_pass() ? 0 : 1;
}
