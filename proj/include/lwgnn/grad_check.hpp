#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lwgnn/parameters.hpp"

namespace lwgnn {

// Evaluates the loss at the store's current values. When `accumulate_gradients` is true the
// closure must also add the analytic gradient into each Parameter::gradient.
using LossClosure = std::function<double(ParameterStore& store, bool accumulate_gradients)>;

struct GradCheckOptions {
    double tolerance = 1e-4;
    double step = 1e-5;
    // Matrices with more entries than this are checked on a random sample of `sample_size` entries.
    std::size_t full_check_limit = 400;
    std::size_t sample_size = 200;
    std::uint64_t seed = 0;
};

struct GradCheckMismatch {
    std::string parameter;
    std::size_t index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double relative_error = 0.0;
};

struct GradCheckReport {
    bool passed = true;
    std::size_t entries_checked = 0;
    double max_relative_error = 0.0;
    std::vector<GradCheckMismatch> mismatches;
};

// Central differences against the analytic gradient; relative error |a-n| / max(|a|, |n|, 1e-8).
// Throws NumericError if the loss is not finite.
GradCheckReport grad_check(ParameterStore& store, const LossClosure& loss, const GradCheckOptions& options = {});

}  // namespace lwgnn
