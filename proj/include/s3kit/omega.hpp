#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "s3kit/s3_chain.hpp"

namespace s3kit {

// Parent marker for "wired directly to the input neuron".
inline constexpr int kInputParent = -1;

// Wiring of the single-inbound-edge network family: hidden neuron i takes its
// one input from parents[i], which is either the input node (kInputParent) or
// an earlier hidden neuron 0..i-1. Every hidden neuron and the input also
// shortcut into the output implicitly. The struct holds arbitrary parent
// lists so that validation can report violations as data.
struct OmegaTopology {
    std::vector<int> parents;

    int n_hidden() const { return static_cast<int>(parents.size()); }
};

struct TopologyViolation {
    std::string requirement;  // short identifier of the violated rule
    int neuron;               // offending hidden neuron, -1 if global
    std::string detail;
};

// Returns all violations (empty == valid): neuron 0 must be input-wired,
// every parent must be the input or an earlier hidden neuron, and the
// implied edge count must equal 2*(N+2) - 3.
std::vector<TopologyViolation> validate_topology(const OmegaTopology& t);

// Throwing form: raises ValidationError naming the first violation.
void require_valid_topology(const OmegaTopology& t);

// Copy of t with neuron's inbound edge moved to new_parent. Rejects neuron 0
// (input-wired by construction), out-of-range indices, and any new_parent not
// strictly earlier than neuron.
OmegaTopology cut_rewire(const OmegaTopology& t, int neuron, int new_parent);

// Number of members with N hidden neurons: N! (neuron i has i+1 parent choices).
std::uint64_t topology_count(int n_hidden);

// All N! members, N <= 8 (larger N raises a capacity error naming the count).
std::vector<OmegaTopology> enumerate_topologies(int n_hidden);

// Uniform member: each parents[i] drawn independently from its i+1 choices.
OmegaTopology random_topology(int n_hidden, std::uint64_t seed);

OmegaTopology chain_topology(int n_hidden);  // parents: I,0,1,...,N-2
OmegaTopology star_topology(int n_hidden);   // parents: I,I,...,I

// Text form: comma-separated parent list, `I` for the input (e.g. "I,0,I,2").
std::string format_topology(const OmegaTopology& t);
OmegaTopology parse_topology(const std::string& text);

// Chain-family net generalized to an arbitrary valid topology: neuron i still
// encodes segment i of the target, but its affine map is expressed relative to
// whatever its parent outputs.
struct OmegaNet {
    OmegaTopology topology;
    std::vector<ChainNeuron> neurons;
    std::vector<int> signs;
    double output_bias = 0.0;
    double shift_c = 0.0;
    std::array<double, 2> domain{0.0, 0.0};
};

// Weight assignment making the net reproduce the target exactly, independent
// of wiring: a neuron reading the input gets the segment's slope increment
// directly; a neuron reading hidden neuron j first inverts j's affine map back
// to the input domain. Requires the topology size to equal the number of
// encoded (non-leading-constant) segments.
OmegaNet build_omega(const OmegaTopology& t, const PiecewiseLinear& pwl);

// Topological-order evaluation with activation trace.
ChainEval forward_omega(const OmegaNet& net, double x);

// Value-only fast path.
double omega_value(const OmegaNet& net, double x);

double sup_error(const OmegaNet& net, const PiecewiseLinear& target, std::size_t grid_points);

// Largest pointwise gap between two nets over a shared uniform grid.
double sup_difference(const OmegaNet& a, const S3ChainNet& b, std::size_t grid_points);

}  // namespace s3kit
