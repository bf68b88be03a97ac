#pragma once

#include <functional>
#include <string>
#include <vector>

namespace s3kit {

// Named scalar targets available to the CLI, so experiment scripts never need
// an expression parser.
struct BuiltinFunction {
    std::string name;
    std::string description;
    std::function<double(double)> fn;
    double default_lo;  // natural evaluation interval
    double default_hi;
};

// Registered names: cubic_fig3, identity, tent, abs, sin1.
const std::vector<BuiltinFunction>& builtin_functions();

// Lookup by name; unknown names raise ValidationError listing the registry.
const BuiltinFunction& find_builtin(const std::string& name);

}  // namespace s3kit
