#include "s3kit/s3_chain.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

namespace s3kit {

S3ChainNet build_chain(const PiecewiseLinear& pwl) {
    S3ChainNet net;
    net.domain = {pwl.domain_lo(), pwl.domain_hi()};

    // A target dipping below zero is lifted by a constant before construction
    // and compensated at the output. The lift only moves values, never slopes,
    // so it cancels exactly: output_bias ends up at the unshifted f(x_0).
    double min_value = *std::min_element(pwl.values.begin(), pwl.values.end());
    net.shift_c = min_value < 0.0 ? -min_value + 1.0 : 0.0;
    const double f_x0 = pwl.values.front() + net.shift_c;

    const std::vector<double> slopes = pwl.slopes();

    // Leading constant segments carry no slope increment; the chain starts at
    // the first non-constant segment and output_bias covers the flat prefix
    // (which equals f(x_0) by constancy).
    std::size_t first = 0;
    while (first < slopes.size() && slopes[first] == 0.0) ++first;

    net.output_bias = f_x0 - net.shift_c;
    if (first == slopes.size()) return net;  // entirely constant target

    // Increment of segment i relative to its predecessor (0 before the chain).
    double prev_increment = 0.0;
    for (std::size_t i = first; i < slopes.size(); ++i) {
        double increment = slopes[i] - (i == first ? 0.0 : slopes[i - 1]);
        if (increment == 0.0)
            throw ValidationError(
                "build_chain: equal adjacent slopes at segment " + std::to_string(i) +
                "; run simplify first");
        double knot = pwl.breakpoints[i];
        ChainNeuron neuron;
        if (i == first) {
            neuron.w = std::fabs(increment);
            neuron.b = -neuron.w * knot;
        } else {
            double prev_knot = pwl.breakpoints[i - 1];
            neuron.w = std::fabs(increment) / std::fabs(prev_increment);
            neuron.b = -(knot - prev_knot) * std::fabs(increment);
        }
        net.neurons.push_back(neuron);
        net.signs.push_back(increment > 0.0 ? 1 : -1);
        prev_increment = increment;
    }
    return net;
}

namespace {

void check_domain(const std::array<double, 2>& domain, double x, const char* who) {
    if (x < domain[0] || x > domain[1])
        throw ValidationError(std::string(who) + ": x = " + format_double(x) +
                              " outside domain [" + format_double(domain[0]) + ", " +
                              format_double(domain[1]) + "]");
}

}  // namespace

ChainEval forward_chain(const S3ChainNet& net, double x) {
    check_domain(net.domain, x, "forward_chain");
    ChainEval out;
    out.trace.reserve(net.neurons.size());
    double acc = 0.0;
    double carry = x;  // previous neuron's activation; the input feeds neuron 0
    for (std::size_t i = 0; i < net.neurons.size(); ++i) {
        double pre = net.neurons[i].w * carry + net.neurons[i].b;
        double r = pre > 0.0 ? pre : 0.0;
        out.trace.push_back(r);
        acc += static_cast<double>(net.signs[i]) * r;
        carry = r;
    }
    out.value = acc + net.output_bias;
    return out;
}

double chain_value(const S3ChainNet& net, double x) {
    check_domain(net.domain, x, "chain_value");
    double acc = 0.0;
    double carry = x;
    for (std::size_t i = 0; i < net.neurons.size(); ++i) {
        double pre = net.neurons[i].w * carry + net.neurons[i].b;
        double r = pre > 0.0 ? pre : 0.0;
        acc += static_cast<double>(net.signs[i]) * r;
        carry = r;
    }
    return acc + net.output_bias;
}

namespace {

double sup_error_impl(const S3ChainNet& net, const std::function<double(double)>& target,
                      std::size_t grid_points) {
    if (grid_points < 2) throw ValidationError("sup_error: need at least 2 grid points");
    const std::vector<double> grid = linspace(net.domain[0], net.domain[1], grid_points);
    std::vector<double> errors(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        errors[i] = std::fabs(chain_value(net, grid[i]) - target(grid[i]));
    });
    return *std::max_element(errors.begin(), errors.end());
}

}  // namespace

double sup_error(const S3ChainNet& net, const PiecewiseLinear& target, std::size_t grid_points) {
    return sup_error_impl(net, [&](double x) { return eval_pwl(target, x); }, grid_points);
}

double sup_error(const S3ChainNet& net, const std::function<double(double)>& target,
                 std::size_t grid_points) {
    return sup_error_impl(net, target, grid_points);
}

double max_abs_weight(const S3ChainNet& net) {
    double m = 0.0;
    for (const auto& n : net.neurons) m = std::max(m, std::fabs(n.w));
    return m;
}

}  // namespace s3kit
