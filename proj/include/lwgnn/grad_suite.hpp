#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lwgnn/grad_check.hpp"

namespace lwgnn {

struct GradSuiteOptions {
    std::size_t seeds = 20;
    std::uint64_t first_seed = 0;
    GradCheckOptions check;
    // Test hook: doubles the analytic gradient of one entry in every case, so every case must fail.
    bool inject_fault = false;
};

struct GradSuiteCase {
    std::string name;
    std::size_t seeds_run = 0;
    std::size_t seeds_failed = 0;
    std::size_t entries_checked = 0;
    double max_relative_error = 0.0;

    bool passed() const { return seeds_failed == 0; }
};

struct GradSuiteReport {
    std::vector<GradSuiteCase> cases;
    double seconds = 0.0;

    bool passed() const;
};

// Names of every case, in run order.
std::vector<std::string> grad_suite_case_names();

// Finite-difference checks of every differentiable op, the MLP, one label-wise layer, the full
// label-wise model (K = 1, 2, 3, both empty-class fallbacks, with and without dropout), the GCN
// (2 and 3 layers, with dropout and weight decay) and the combined selection loss, on random
// inputs of at most 7 rows. Each case runs once per seed.
GradSuiteReport run_grad_suite(const GradSuiteOptions& options = {});

}  // namespace lwgnn
