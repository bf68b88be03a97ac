#include "s3kit/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace s3kit {

std::size_t HiddenGraph::edge_count() const {
    std::size_t twice = 0;
    for (double v : adjacency.data) twice += v != 0.0 ? 1 : 0;
    return twice / 2;
}

std::size_t HiddenGraph::degree(std::size_t v) const {
    std::size_t d = 0;
    for (std::size_t u = 0; u < n_vertices; ++u) d += adjacency.at(v, u) != 0.0 ? 1 : 0;
    return d;
}

HiddenGraph make_graph(std::size_t n_vertices) {
    if (n_vertices == 0) throw ValidationError("make_graph: need at least one vertex");
    HiddenGraph g;
    g.n_vertices = n_vertices;
    g.adjacency = Matrix(n_vertices, n_vertices);
    return g;
}

void add_edge(HiddenGraph& g, std::size_t u, std::size_t v) {
    if (u >= g.n_vertices || v >= g.n_vertices)
        throw ValidationError("add_edge: vertex out of range");
    if (u == v) throw ValidationError("add_edge: self-loops not allowed");
    g.adjacency.at(u, v) = 1.0;
    g.adjacency.at(v, u) = 1.0;
}

HiddenGraph hidden_graph(const OmegaTopology& t) {
    auto violations = validate_topology(t);
    if (!violations.empty())
        throw ValidationError("hidden_graph: invalid topology (" + violations.front().detail + ")");
    const std::size_t n = static_cast<std::size_t>(t.n_hidden());
    HiddenGraph g = make_graph(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t parent_vertex =
            t.parents[i] == kInputParent ? 0 : static_cast<std::size_t>(t.parents[i]) + 1;
        add_edge(g, parent_vertex, i + 1);
    }
    return g;
}

SpectralResult spectral_radius_full(const HiddenGraph& g, double tol, std::size_t max_iterations) {
    if (g.n_vertices == 0) throw ValidationError("spectral_radius: empty graph");
    if (!(tol > 0.0)) throw ValidationError("spectral_radius: tol must be positive");
    const std::size_t n = g.n_vertices;
    const Matrix& a = g.adjacency;

    SpectralResult result;
    if (n == 1) {  // single vertex, no edges: radius 0
        result.converged = true;
        return result;
    }

    std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> av(n, 0.0);
    for (std::size_t it = 1; it <= max_iterations; ++it) {
        // One step of (A + I) v; the +I keeps bipartite spectra from making
        // the iterates oscillate between two rays.
        for (std::size_t r = 0; r < n; ++r) {
            double s = v[r];
            const double* row = &a.data[r * n];
            for (std::size_t c = 0; c < n; ++c) s += row[c] * v[c];
            av[r] = s;
        }
        double norm = 0.0;
        for (double x : av) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) {  // no edges at all
            result.converged = true;
            result.iterations = it;
            return result;
        }
        for (std::size_t r = 0; r < n; ++r) v[r] = av[r] / norm;

        // Rayleigh quotient and residual on the original A.
        double rho = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            double s = 0.0;
            const double* row = &a.data[r * n];
            for (std::size_t c = 0; c < n; ++c) s += row[c] * v[c];
            av[r] = s;  // reuse as A v
            rho += v[r] * s;
        }
        double residual = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            residual = std::max(residual, std::fabs(av[r] - rho * v[r]));
        result.rho = rho;
        result.residual = residual;
        result.iterations = it;
        if (residual <= tol) {
            result.converged = true;
            return result;
        }
    }
    return result;  // iteration cap hit; caller sees converged=false + residual
}

double spectral_radius(const HiddenGraph& g, double tol) {
    return spectral_radius_full(g, tol).rho;
}

GraphClass classify(const HiddenGraph& g) {
    GraphClass c;
    c.edge_count = g.edge_count();

    std::vector<bool> seen(g.n_vertices, false);
    std::queue<std::size_t> frontier;
    frontier.push(0);
    seen[0] = true;
    std::size_t visited = 1;
    while (!frontier.empty()) {
        std::size_t u = frontier.front();
        frontier.pop();
        for (std::size_t v = 0; v < g.n_vertices; ++v) {
            if (g.adjacency.at(u, v) != 0.0 && !seen[v]) {
                seen[v] = true;
                ++visited;
                frontier.push(v);
            }
        }
    }
    c.connected = visited == g.n_vertices;
    c.is_tree = c.connected && c.edge_count == g.n_vertices - 1;
    if (c.is_tree) {
        for (std::size_t v = 0; v < g.n_vertices; ++v) {
            if (g.degree(v) == g.n_vertices - 1) {
                c.is_star = true;
                break;
            }
        }
    }
    return c;
}

std::uint64_t labeled_tree_count(std::size_t n) {
    if (n < 2 || n > 9) throw ValidationError("labeled_tree_count: n must be in 2..9");
    if (n == 2) return 1;
    std::uint64_t c = 1;
    for (std::size_t i = 0; i < n - 2; ++i) c *= n;
    return c;
}

HiddenGraph prufer_decode(const std::vector<std::size_t>& seq, std::size_t n) {
    if (n < 2) throw ValidationError("prufer_decode: need at least 2 vertices");
    if (seq.size() != n - 2)
        throw ValidationError("prufer_decode: sequence length must be n-2");
    for (std::size_t s : seq)
        if (s >= n) throw ValidationError("prufer_decode: entry out of range");

    HiddenGraph g = make_graph(n);
    std::vector<std::size_t> degree(n, 1);
    for (std::size_t s : seq) ++degree[s];

    // Repeatedly join the smallest remaining leaf to the next sequence entry.
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> leaves;
    for (std::size_t v = 0; v < n; ++v)
        if (degree[v] == 1) leaves.push(v);
    for (std::size_t s : seq) {
        std::size_t leaf = leaves.top();
        leaves.pop();
        add_edge(g, leaf, s);
        if (--degree[s] == 1) leaves.push(s);
    }
    std::size_t u = leaves.top();
    leaves.pop();
    std::size_t v = leaves.top();
    add_edge(g, u, v);
    return g;
}

void for_each_labeled_tree(std::size_t n, const std::function<void(const HiddenGraph&)>& visit) {
    if (n < 2 || n > 9) throw ValidationError("for_each_labeled_tree: n must be in 2..9");
    if (n == 2) {
        visit(prufer_decode({}, 2));
        return;
    }
    const std::size_t len = n - 2;
    std::uint64_t total = labeled_tree_count(n);
    for (std::uint64_t code = 0; code < total; ++code) {
        std::vector<std::size_t> seq(len);
        std::uint64_t rest = code;
        for (std::size_t i = 0; i < len; ++i) {
            seq[i] = static_cast<std::size_t>(rest % n);
            rest /= n;
        }
        visit(prufer_decode(seq, n));
    }
}

std::vector<HiddenGraph> enumerate_trees(std::size_t n) {
    std::vector<HiddenGraph> out;
    out.reserve(static_cast<std::size_t>(labeled_tree_count(n)));
    for_each_labeled_tree(n, [&](const HiddenGraph& g) { out.push_back(g); });
    return out;
}

TreeSweepResult sweep_labeled_trees(std::size_t n, double tol) {
    TreeSweepResult result;
    result.n = n;
    result.tree_count = labeled_tree_count(n);
    result.star_rho = std::sqrt(static_cast<double>(n - 1));

    const std::uint64_t total = result.tree_count;
    const std::size_t blocks = std::min<std::uint64_t>(total, 64);
    std::vector<double> block_max(blocks, 0.0);
    std::vector<double> block_max_nonstar(blocks, 0.0);
    std::vector<bool> block_all_bounded(blocks, true);

    parallel_for(blocks, [&](std::size_t blk) {
        std::uint64_t lo = total * blk / blocks;
        std::uint64_t hi = total * (blk + 1) / blocks;
        const std::size_t len = n >= 2 ? n - 2 : 0;
        std::vector<std::size_t> seq(len);
        for (std::uint64_t code = lo; code < hi; ++code) {
            std::uint64_t rest = code;
            for (std::size_t i = 0; i < len; ++i) {
                seq[i] = static_cast<std::size_t>(rest % n);
                rest /= n;
            }
            HiddenGraph g = prufer_decode(seq, n);
            double rho = spectral_radius(g, tol);
            bool star = classify(g).is_star;
            block_max[blk] = std::max(block_max[blk], rho);
            if (!star) block_max_nonstar[blk] = std::max(block_max_nonstar[blk], rho);
            if (rho > static_cast<double>(n - 1) + 1e-9) block_all_bounded[blk] = false;
        }
    });

    result.max_rho = *std::max_element(block_max.begin(), block_max.end());
    result.max_nonstar_rho =
        *std::max_element(block_max_nonstar.begin(), block_max_nonstar.end());
    result.all_below_n_minus_1 =
        std::all_of(block_all_bounded.begin(), block_all_bounded.end(), [](bool b) { return b; });
    // Stars attain the global maximum and every non-star stays strictly below
    // it; the gap for n <= 9 is > 0.1, far beyond iteration tolerance.
    result.max_attained_only_by_stars =
        std::fabs(result.max_rho - result.star_rho) <= 1e-9 &&
        result.max_nonstar_rho < result.star_rho - 1e-6;
    return result;
}

}  // namespace s3kit
