#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "s3kit/s3_chain.hpp"

namespace s3kit {

// Superposition form of a multivariate target on [0,1]^n:
//   f(x) = sum_{q=0}^{2n} outer[q]( sum_{p=1}^{n} inner[q][p-1](x_p) ).
// The identity is checked numerically at registration time; finding such a
// decomposition for arbitrary f is out of scope, so targets arrive already
// decomposed.
struct KADecomposition {
    std::string name;
    std::size_t n = 0;  // input dimension, >= 2
    std::vector<std::vector<std::function<double(double)>>> inner;  // (2n+1) x n, on [0,1]
    std::vector<std::function<double(double)>> outer;               // 2n+1
    // Optional analytic continuity modulus per outer function: epsilon -> delta
    // such that |outer(u) - outer(v)| <= epsilon whenever |u - v| <= delta.
    // Missing entries fall back to a sampled estimate.
    std::vector<std::function<double(double)>> outer_modulus;
    std::function<double(const std::vector<double>&)> target;
};

// Registered decompositions used by the CLI and the test suites:
//   additive:  f = sum x_p^2        (any n >= 2; one active outer identity)
//   product:   f = x1 * x2          (n = 2; exp/log split on shifted inputs)
//   constant:  f = c                (any n >= 2; all-zero inner functions)
KADecomposition make_additive_decomposition(std::size_t n);
KADecomposition make_product_decomposition();
KADecomposition make_constant_decomposition(std::size_t n, double c);
const std::vector<std::string>& registered_decomposition_names();
KADecomposition make_registered_decomposition(const std::string& name, std::size_t n);

// Verifies the superposition identity on sample points; throws when the
// residual exceeds tol (default 1e-8).
void validate_decomposition(const KADecomposition& dec, std::size_t samples_per_axis = 11,
                            double tol = 1e-8);

// Error budget for a target tolerance sigma: every outer chain gets
// epsilon = sigma/(4n+2); inner chains for row q get delta_q = delta(epsilon,
// outer[q]) / (n+1), a uniform split that keeps the row sum strictly below the
// modulus (n summands of delta/(n+1)).
struct BudgetPlan {
    double sigma = 0.0;
    double epsilon = 0.0;
    std::vector<double> inner_delta;  // per outer row q
};

BudgetPlan error_budget(const KADecomposition& dec, double sigma);

// Full two-stage network: one chain per inner function, one per outer.
struct KANet {
    std::string decomposition_name;
    std::size_t n = 0;
    double sigma = 0.0;
    std::vector<std::vector<S3ChainNet>> inner_nets;  // (2n+1) x n
    std::vector<S3ChainNet> outer_nets;               // 2n+1
};

// Builds every chain at the given grid step, verifying each stage against its
// budget: inner chain (q,p) must track inner[q][p] within delta_q, the outer
// chain q must track outer[q] within epsilon over the reachable interval of
// realized inner sums padded by the row's total inner error. A chain missing
// its budget raises an error naming it and suggesting a finer step. The
// composite is finally validated against the target (dense grid for n == 2,
// corners plus seeded samples otherwise).
KANet assemble(const KADecomposition& dec, double sigma, double step);

// Composite value at x in [0,1]^n.
double forward_ka(const KANet& net, const std::vector<double>& x);

// Maximum concurrently active chains across the two stages; the structural
// width cap of the construction (inner stage: n per outer row).
std::size_t width_of(const KANet& net);

// Largest |forward_ka - target| over the standard validation set for the
// net's dimension (the grid described at assemble).
double composite_error(const KANet& net, const KADecomposition& dec,
                       std::size_t grid_per_axis = 101);

}  // namespace s3kit
