#pragma once

#include <string>
#include <vector>

namespace glac {

struct GradcheckReport {
    bool passed = false;
    double tolerance = 1e-4;
    double worst_rel_err = 0;
    std::string worst_param;
    double seconds = 0;
    // max relative error per named tensor
    std::vector<std::pair<std::string, double>> per_tensor;
};

// Central finite differences against the analytic gradient of total
// two-story teacher-forced loss on the tiny configuration
// (d=6, h=4, g=5, e=3, V=8, S=3).
GradcheckReport run_gradcheck();

} // namespace glac
