#include "lwgnn/parameters.hpp"

#include <cmath>

#include "lwgnn/error.hpp"

namespace lwgnn {

Parameter::Parameter(DenseMatrix initial)
    : value(std::move(initial)),
      gradient(value.rows(), value.cols()),
      first_moment(value.rows(), value.cols()),
      second_moment(value.rows(), value.cols()) {}

Parameter& ParameterStore::add(const std::string& name, DenseMatrix initial) {
    auto [it, inserted] = params_.insert_or_assign(name, Parameter(std::move(initial)));
    return it->second;
}

Parameter& ParameterStore::at(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw PreconditionError("ParameterStore: unknown parameter '" + name + "'");
    return it->second;
}

const Parameter& ParameterStore::at(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw PreconditionError("ParameterStore: unknown parameter '" + name + "'");
    return it->second;
}

void ParameterStore::zero_gradients() {
    for (auto& [name, p] : params_) p.gradient.fill(0.0);
}

std::size_t ParameterStore::total_entries() const {
    std::size_t n = 0;
    for (const auto& [name, p] : params_) n += p.value.size();
    return n;
}

void adam_step(ParameterStore& store, double lr, const AdamSettings& s) {
    for (auto& [name, p] : store) {
        ++p.step;
        const double correction1 = 1.0 - std::pow(s.beta1, static_cast<double>(p.step));
        const double correction2 = 1.0 - std::pow(s.beta2, static_cast<double>(p.step));
        auto w = p.value.values();
        auto g = p.gradient.values();
        auto m = p.first_moment.values();
        auto v = p.second_moment.values();
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
            v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            w[i] -= lr * m_hat / (std::sqrt(v_hat) + s.epsilon);
        }
        p.gradient.fill(0.0);
    }
}

void gradient_descent_step(ParameterStore& store, double lr) {
    for (auto& [name, p] : store) {
        ++p.step;
        auto w = p.value.values();
        auto g = p.gradient.values();
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
        p.gradient.fill(0.0);
    }
}

void optimizer_step(ParameterStore& store, OptimizerKind kind, double lr) {
    switch (kind) {
        case OptimizerKind::Adam: adam_step(store, lr); break;
        case OptimizerKind::GradientDescent: gradient_descent_step(store, lr); break;
    }
}

DenseMatrix glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseMatrix m(rows, cols);
    for (double& v : m.values()) v = dist(rng);
    return m;
}

}  // namespace lwgnn
