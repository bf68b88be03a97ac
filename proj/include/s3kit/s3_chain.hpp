#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "s3kit/piecewise.hpp"

namespace s3kit {

struct ChainNeuron {
    double w;
    double b;
};

// One-neuron-wide ReLU chain with every neuron shortcut into a linear output:
//   r_0 = relu(w_0 * x + b_0),   r_i = relu(w_i * r_{i-1} + b_i),
//   value(x) = sum_i signs[i] * r_i + output_bias.
// Built so that value(x) reproduces a piecewise-linear target exactly.
struct S3ChainNet {
    std::vector<ChainNeuron> neurons;
    std::vector<int> signs;    // +1 / -1 per neuron
    double output_bias = 0.0;  // target value at the left domain endpoint
    double shift_c = 0.0;      // positive lift applied during construction when
                               // the target dips below zero; cancels in output_bias
    std::array<double, 2> domain{0.0, 0.0};
};

struct ChainEval {
    double value;
    std::vector<double> trace;  // per-neuron post-ReLU activations
};

// Constructs the chain for a simplified target. Neuron j encodes the j-th
// non-constant segment: its weight is the ratio of consecutive slope
// increments, its bias places the kink, and its sign is the increment's sign.
// Leading constant segments are absorbed into output_bias; an entirely
// constant target yields a zero-neuron net. Equal adjacent slopes mid-sequence
// are rejected (the weight ratio would divide by zero): simplify first.
S3ChainNet build_chain(const PiecewiseLinear& pwl);

// Evaluates via the literal chain recurrence (each neuron consumes the
// previous neuron's output) and returns the activation trace.
ChainEval forward_chain(const S3ChainNet& net, double x);

// Value-only fast path of forward_chain.
double chain_value(const S3ChainNet& net, double x);

// Largest |net - target| over a uniform grid (endpoints included) spanning the
// net's domain. Grid evaluation parallelizes across threads.
double sup_error(const S3ChainNet& net, const PiecewiseLinear& target, std::size_t grid_points);
double sup_error(const S3ChainNet& net, const std::function<double(double)>& target,
                 std::size_t grid_points);

// Largest neuron weight magnitude. Weights are ratios of consecutive slope
// increments, so a near-repeated slope inflates them; callers surface a
// conditioning warning when this exceeds 1e12.
double max_abs_weight(const S3ChainNet& net);

inline constexpr double kConditioningLimit = 1e12;

}  // namespace s3kit
