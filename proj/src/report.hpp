#pragma once

#include <map>
#include <string>
#include <vector>

namespace rbdsde {

/// Outcome of one executable check. `pass` iff max_violation <= tolerance.
struct CheckReport {
    std::string name;
    bool pass = true;
    double max_violation = 0.0;
    double tolerance = 0.0;
    long b_path = -1;  // witness of the worst case, -1 when not applicable
    long node = -1;
    int time_index = -1;
    std::map<std::string, double> params;
    std::string detail;

    /// Records `violation` at the given witness if it is the worst seen so far.
    void observe(double violation, long b, long n, int t) {
        if (violation > max_violation) {
            max_violation = violation;
            b_path = b;
            node = n;
            time_index = t;
        }
    }
    void finish() { pass = max_violation <= tolerance; }
};

inline bool all_pass(const std::vector<CheckReport>& reports) {
    for (const auto& r : reports) {
        if (!r.pass) return false;
    }
    return true;
}

}  // namespace rbdsde
