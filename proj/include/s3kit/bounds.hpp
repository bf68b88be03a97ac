#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "s3kit/common.hpp"

namespace s3kit {

struct MatrixNorms {
    double spectral;   // largest singular value
    double two_one;    // sum of column l2 norms
    double frobenius;  // entrywise l2
};

// Spectral norm via power iteration on the Gram matrix A^T A (tol 1e-10);
// the other two are closed-form column/entry sums.
MatrixNorms matrix_norms(const Matrix& a);

// Per-layer quantities feeding the bound formulas. For a weight matrix A_i of
// shape d_i x n_i (outputs x inputs): lipschitz is the activation's constant,
// spectral_bound >= ||A_i||_sigma, two_one_bound >= ||A_i^T||_{2,1} (sum of
// row l2 norms of A_i), frobenius_bound >= ||A_i||_F.
struct LayerNorms {
    double lipschitz = 1.0;
    double spectral_bound = 0.0;
    double two_one_bound = 0.0;
    double frobenius_bound = 0.0;
    std::size_t out_dim = 0;  // d_i
    std::size_t in_dim = 0;   // n_i
};

struct NormProfile {
    std::vector<LayerNorms> layers;

    std::size_t depth() const { return layers.size(); }
    std::size_t max_width() const;  // p = max d_i
};

// Dense-concatenation shape: layer i sees everything before it, so
// n_1 = d_0 (the input width) and n_{i+1} = n_i + d_i.
bool is_dense_shape(const NormProfile& p);

// Slim-shortcut shape: intermediate layers see only their predecessor
// (n_i = d_{i-1} for 2 <= i <= L-1) while the last layer sees the
// concatenation of everything (n_L = d_0 + ... + d_{L-1}).
bool is_s3_shape(const NormProfile& p);

struct BoundInputs {
    std::size_t n_samples = 0;   // sample count (n in the margin bound, m in the
                                 // auxiliary bounds)
    double margin = 1.0;         // gamma > 0
    double data_bound = 1.0;     // B with sqrt(sum ||x_i||^2) <= B
    double confidence = 0.05;    // delta in (0,1)
    std::size_t class_count = 2;
};

void validate_inputs(const BoundInputs& in);

// Margin-based excess-risk bound for a dense-concatenation network:
//   8/n^{3/2} + 3*sqrt(ln(1/delta)/(2n))
//   + (36*B*ln(n)/(gamma*n)) * prod_j(1 + rho_j s_j)
//     * sqrt( sum_i rho_i^2 b_i^2/(1+rho_i s_i)^2 * sum_i ln(2 d_i n_i) ),
// evaluated literally on the profile. Requires the dense shape.
double bartlett_dense(const NormProfile& profile, const BoundInputs& inputs);

// Same bound for the slim network after zero-padding its matrices up to the
// dense shape: the padded matrices keep the slim norms exactly, but the
// log-dimension term uses the *dense* in-dims (the padded sizes), so
// dense_in_dims must come from the matched dense profile.
double bartlett_s3(const NormProfile& profile, const std::vector<std::size_t>& dense_in_dims,
                   const BoundInputs& inputs);

// Literal evaluations of the auxiliary complexity expressions, leading
// constants taken as 1 (they are order-of-magnitude quantities; the
// comparisons between architectures are constant-free):
//   chain_rademacher: 2^L * prod B_F / sqrt(m)
//   dense_rademacher: prod (1 + 2 B_F) / sqrt(m)
//   chain_pacbayes:   prod B_2 * ln(Lp)/(gamma sqrt(m)) * sqrt(L^2 p sum B_F^2/B_2^2)
//   dense_pacbayes:   prod (1+e B_2) * ln(Lp)/(gamma sqrt(m)) * sqrt(L^2 p sum B_F^2/(1+e B_2)^2)
// where B_2 = spectral_bound, B_F = frobenius_bound, p = max width.
enum class AuxVariant { chain_rademacher, chain_pacbayes, dense_rademacher, dense_pacbayes };

double aux_bound(const NormProfile& profile, const BoundInputs& inputs, AuxVariant variant);

AuxVariant parse_aux_variant(const std::string& name);
std::string aux_variant_name(AuxVariant v);

// Ramp loss of the margin: with M = logits[label] - max of the others and
// r = -M, returns 0 for r < -gamma, 1 for r > 0, else 1 + r/gamma.
// label is 1-based.
double ramp_loss(const std::vector<double>& logits, std::size_t label, double gamma);

// Extracts per-layer norms from weight matrices (activation Lipschitz
// constants all 1, matching ReLU).
NormProfile profile_from_matrices(const std::vector<Matrix>& mats);

struct BoundComparison {
    std::string name;
    double dense_value = 0.0;
    double s3_value = 0.0;
    bool s3_not_worse = false;  // recomputed from the two values on access
};

struct BoundReport {
    NormProfile dense_profile;
    NormProfile s3_profile;
    std::vector<BoundComparison> comparisons;  // margin bound + both dense-form
                                               // auxiliary bounds
    bool all_verdicts_hold = false;
};

// Evaluates the margin bound for a dense weight stack against a slim stack
// whose matrices embed as leading-column submatrices of the dense ones
// (checked: equal depth, equal out-dims, in_dim_s3 <= in_dim_dense), plus the
// dense-form auxiliary bounds on both stacks.
BoundReport compare_bounds(const std::vector<Matrix>& dense_mats,
                           const std::vector<Matrix>& s3_mats, const BoundInputs& inputs);

}  // namespace s3kit
