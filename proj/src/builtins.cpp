#include "s3kit/builtins.hpp"

#include <cmath>

#include "s3kit/common.hpp"

namespace s3kit {

const std::vector<BuiltinFunction>& builtin_functions() {
    static const std::vector<BuiltinFunction> registry = {
        {"cubic_fig3", "x^3 - 0.25x + 0.2",
         [](double x) { return x * x * x - 0.25 * x + 0.2; }, 1.0, 2.0},
        {"identity", "x", [](double x) { return x; }, 0.0, 1.0},
        {"tent", "|x - 0.5|", [](double x) { return std::fabs(x - 0.5); }, 0.0, 1.0},
        {"abs", "|x|", [](double x) { return std::fabs(x); }, -1.0, 1.0},
        {"sin1", "sin(2*pi*x), one full period on [0,1]",
         [](double x) { return std::sin(6.283185307179586476925287 * x); }, 0.0, 1.0},
    };
    return registry;
}

const BuiltinFunction& find_builtin(const std::string& name) {
    for (const auto& b : builtin_functions()) {
        if (b.name == name) return b;
    }
    std::string known;
    for (const auto& b : builtin_functions()) {
        if (!known.empty()) known += ", ";
        known += b.name;
    }
    throw ValidationError("unknown function '" + name + "' (known: " + known + ")");
}

}  // namespace s3kit
