#include "lwgnn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lwgnn/error.hpp"

namespace lwgnn {
namespace {

double evaluate(ParameterStore& store, const LossClosure& loss, bool with_gradients) {
    const double value = loss(store, with_gradients);
    if (!std::isfinite(value)) throw NumericError("grad_check: loss is not finite");
    return value;
}

}  // namespace

GradCheckReport grad_check(ParameterStore& store, const LossClosure& loss, const GradCheckOptions& options) {
    store.zero_gradients();
    evaluate(store, loss, true);

    std::map<std::string, DenseMatrix> analytic;
    for (auto& [name, p] : store) analytic.emplace(name, p.gradient);
    store.zero_gradients();

    std::mt19937_64 rng(options.seed);
    GradCheckReport report;
    for (auto& [name, p] : store) {
        const std::size_t n = p.value.size();
        std::vector<std::size_t> indices(n);
        std::iota(indices.begin(), indices.end(), std::size_t{0});
        if (n > options.full_check_limit) {
            std::shuffle(indices.begin(), indices.end(), rng);
            indices.resize(std::min(options.sample_size, n));
            std::sort(indices.begin(), indices.end());
        }
        const auto& expected = analytic.at(name);
        for (std::size_t idx : indices) {
            double& entry = p.value.values()[idx];
            const double saved = entry;
            entry = saved + options.step;
            const double plus = evaluate(store, loss, false);
            entry = saved - options.step;
            const double minus = evaluate(store, loss, false);
            entry = saved;

            const double numeric = (plus - minus) / (2.0 * options.step);
            const double a = expected.values()[idx];
            const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
            ++report.entries_checked;
            report.max_relative_error = std::max(report.max_relative_error, rel);
            if (rel > options.tolerance) {
                report.passed = false;
                report.mismatches.push_back({name, idx, a, numeric, rel});
            }
        }
    }
    store.zero_gradients();
    return report;
}

}  // namespace lwgnn
