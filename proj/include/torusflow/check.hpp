#pragma once

// Self-verification suites: each named invariant is evaluated numerically
// and compared against a pinned threshold.  The fast level covers the
// algebraic and differential identities on small grids; the full level adds
// the four-dimensional inversion pipeline and short flow runs.

#include <functional>
#include <string>
#include <vector>

#include "torusflow/forms.hpp"
#include "torusflow/grid.hpp"

namespace torusflow {

enum class CheckLevel { Fast, Full };

struct CheckResult {
    std::string name;
    double measured;   // observed error (construction depends on the check)
    double threshold;  // the check passes iff measured <= threshold
    bool passed;
};

std::vector<CheckResult> run_checks(CheckLevel level);

bool all_passed(const std::vector<CheckResult>& results);

// One line per check: [PASS|FAIL] name  measured  threshold.
std::string format_report(const std::vector<CheckResult>& results);

// Building block of the adjointness suite, exposed so tests can feed it a
// deliberately wrong star operator and confirm the suite would catch it:
// returns the max over degrees of the relative defect
// |<d a, b> - <a, delta b>| with delta built as -star(d(star(.))).
double adjointness_defect(const TorusGrid& g,
                          const std::function<KForm(const KForm&)>& star_op, unsigned seed);

}  // namespace torusflow
