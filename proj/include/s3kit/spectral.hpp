#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "s3kit/common.hpp"
#include "s3kit/omega.hpp"

namespace s3kit {

// Undirected graph on the input neuron plus the hidden neurons (the output
// neuron and its edges are deleted; every member shares that part). Vertex 0
// is the input, vertex 1+i is hidden neuron i.
struct HiddenGraph {
    std::size_t n_vertices = 0;
    Matrix adjacency;  // symmetric 0/1, zero diagonal

    std::size_t edge_count() const;
    std::size_t degree(std::size_t v) const;
};

HiddenGraph make_graph(std::size_t n_vertices);
void add_edge(HiddenGraph& g, std::size_t u, std::size_t v);

// Graph of a topology's non-output wiring; for valid members this is a tree
// on N+1 vertices.
HiddenGraph hidden_graph(const OmegaTopology& t);

struct SpectralResult {
    double rho = 0.0;        // estimated largest adjacency eigenvalue
    double residual = 0.0;   // ||A v - rho v||_inf at the returned estimate
    std::size_t iterations = 0;
    bool converged = false;  // residual <= tol within the iteration cap
};

// Largest adjacency eigenvalue by power iteration. The iteration runs on
// A + I with the all-ones start vector: connected graphs are bipartite-safe
// that way (A alone has +/-rho pairs on trees and the iterates oscillate),
// while the shift preserves the eigenvectors and moves every eigenvalue by
// +1, so rho = lambda_max(A+I) - 1. Convergence is measured by the residual
// on the original A. Defaults: tol 1e-10, cap 1e5 iterations.
SpectralResult spectral_radius_full(const HiddenGraph& g, double tol = 1e-10,
                                    std::size_t max_iterations = 100000);
double spectral_radius(const HiddenGraph& g, double tol = 1e-10);

struct GraphClass {
    bool is_tree = false;  // connected with n-1 edges
    bool is_star = false;  // tree with a vertex adjacent to all others
    bool connected = false;
    std::size_t edge_count = 0;
};

GraphClass classify(const HiddenGraph& g);

// All n^(n-2) labeled trees on n vertices (2 <= n <= 9) by decoding every
// Pruefer sequence. The visitor form streams trees without materializing the
// whole family and is what the extremal sweep uses.
std::vector<HiddenGraph> enumerate_trees(std::size_t n);
void for_each_labeled_tree(std::size_t n, const std::function<void(const HiddenGraph&)>& visit);
std::uint64_t labeled_tree_count(std::size_t n);

// Decodes one Pruefer sequence (entries in [0, n)) into its tree.
HiddenGraph prufer_decode(const std::vector<std::size_t>& seq, std::size_t n);

// Extremal scan over all labeled trees on n vertices. Parallelizes over
// blocks of the sequence space.
struct TreeSweepResult {
    std::size_t n = 0;
    std::uint64_t tree_count = 0;
    double max_rho = 0.0;
    bool max_attained_only_by_stars = false;
    double star_rho = 0.0;        // sqrt(n-1)
    double max_nonstar_rho = 0.0;
    bool all_below_n_minus_1 = false;  // rho <= n-1 for every tree
};

TreeSweepResult sweep_labeled_trees(std::size_t n, double tol = 1e-10);

}  // namespace s3kit
