#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>

#include "lwgnn/dense.hpp"

namespace lwgnn {

struct Parameter {
    DenseMatrix value;
    DenseMatrix gradient;
    DenseMatrix first_moment;
    DenseMatrix second_moment;
    std::uint64_t step = 0;

    explicit Parameter(DenseMatrix initial = {});
};

// Named trainable matrices, iterated in name order.
class ParameterStore {
public:
    Parameter& add(const std::string& name, DenseMatrix initial);
    bool contains(const std::string& name) const { return params_.count(name) != 0; }

    Parameter& at(const std::string& name);
    const Parameter& at(const std::string& name) const;
    DenseMatrix& value(const std::string& name) { return at(name).value; }
    const DenseMatrix& value(const std::string& name) const { return at(name).value; }
    DenseMatrix& gradient(const std::string& name) { return at(name).gradient; }

    void zero_gradients();
    std::size_t total_entries() const;

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }
    std::size_t size() const noexcept { return params_.size(); }

private:
    std::map<std::string, Parameter> params_;
};

enum class OptimizerKind { Adam, GradientDescent };

struct AdamSettings {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Bias-corrected adaptive-moment update of every parameter; gradients are zeroed afterwards.
void adam_step(ParameterStore& store, double lr, const AdamSettings& settings = {});
// value -= lr * gradient; gradients are zeroed afterwards.
void gradient_descent_step(ParameterStore& store, double lr);
void optimizer_step(ParameterStore& store, OptimizerKind kind, double lr);

// Uniform Glorot initialization in ±sqrt(6 / (fan_in + fan_out)).
DenseMatrix glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng);

}  // namespace lwgnn
