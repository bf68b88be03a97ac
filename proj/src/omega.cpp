#include "s3kit/omega.hpp"

#include <algorithm>
#include <cmath>

namespace s3kit {

std::vector<TopologyViolation> validate_topology(const OmegaTopology& t) {
    std::vector<TopologyViolation> out;
    const int n = t.n_hidden();
    if (n == 0) {
        out.push_back({"nonempty", -1, "topology has no hidden neurons"});
        return out;
    }
    if (t.parents[0] != kInputParent)
        out.push_back({"input-wired-first", 0,
                       "neuron 0 must read the input (the input needs a hidden child)"});
    for (int i = 1; i < n; ++i) {
        int p = t.parents[i];
        if (p != kInputParent && (p < 0 || p >= i))
            out.push_back({"ordering", i,
                           "parent " + std::to_string(p) + " is not the input or an earlier neuron"});
    }
    // Edge count identity: N parent edges + N hidden->output + 1 input->output.
    // With one stored parent per neuron this is structural; recompute anyway so
    // the check stays meaningful if the representation ever changes.
    int edges = n /* inbound */ + n /* to output */ + 1 /* input to output */;
    if (edges != 2 * (n + 2) - 3)
        out.push_back({"edge-count", -1,
                       "expected " + std::to_string(2 * (n + 2) - 3) + " edges, counted " +
                           std::to_string(edges)});
    return out;
}

void require_valid_topology(const OmegaTopology& t) {
    auto violations = validate_topology(t);
    if (violations.empty()) return;
    const TopologyViolation& v = violations.front();
    std::string where = v.neuron >= 0 ? " (neuron " + std::to_string(v.neuron) + ")" : "";
    std::string more =
        violations.size() > 1 ? "; +" + std::to_string(violations.size() - 1) + " more" : "";
    throw ValidationError("invalid topology: " + v.requirement + where + ": " + v.detail + more);
}

OmegaTopology cut_rewire(const OmegaTopology& t, int neuron, int new_parent) {
    const int n = t.n_hidden();
    if (neuron < 0 || neuron >= n)
        throw ValidationError("cut_rewire: neuron " + std::to_string(neuron) + " out of range");
    if (neuron == 0 && new_parent != kInputParent)
        throw ValidationError("cut_rewire: neuron 0 is wired to the input by construction");
    if (new_parent != kInputParent && new_parent >= neuron)
        throw ValidationError("cut_rewire: new parent " + std::to_string(new_parent) +
                              " must be strictly earlier than neuron " + std::to_string(neuron));
    if (new_parent < kInputParent)
        throw ValidationError("cut_rewire: invalid parent index " + std::to_string(new_parent));
    OmegaTopology out = t;
    out.parents[neuron] = new_parent;
    return out;
}

std::uint64_t topology_count(int n_hidden) {
    std::uint64_t c = 1;
    for (int i = 1; i < n_hidden; ++i) c *= static_cast<std::uint64_t>(i + 1);
    return c;
}

std::vector<OmegaTopology> enumerate_topologies(int n_hidden) {
    if (n_hidden < 1) throw ValidationError("enumerate_topologies: need at least 1 hidden neuron");
    if (n_hidden > 8)
        throw ValidationError("enumerate_topologies: " + std::to_string(n_hidden) +
                              " hidden neurons would yield " +
                              std::to_string(topology_count(n_hidden)) +
                              " members; capacity limit is 8");
    std::vector<OmegaTopology> out;
    out.reserve(topology_count(n_hidden));
    OmegaTopology t;
    t.parents.assign(n_hidden, kInputParent);
    // Mixed-radix counter over parent choices: slot i has i+1 options
    // (input, 0, ..., i-1), encoded as 0 -> input, k -> hidden k-1.
    std::vector<int> digit(n_hidden, 0);
    while (true) {
        for (int i = 0; i < n_hidden; ++i)
            t.parents[i] = digit[i] == 0 ? kInputParent : digit[i] - 1;
        out.push_back(t);
        int i = 1;
        while (i < n_hidden) {
            if (++digit[i] <= i) break;
            digit[i] = 0;
            ++i;
        }
        if (i >= n_hidden) break;
    }
    return out;
}

OmegaTopology random_topology(int n_hidden, std::uint64_t seed) {
    if (n_hidden < 1) throw ValidationError("random_topology: need at least 1 hidden neuron");
    Rng rng(seed);
    OmegaTopology t;
    t.parents.assign(n_hidden, kInputParent);
    for (int i = 1; i < n_hidden; ++i) {
        auto pick = rng.uniform_index(static_cast<std::uint64_t>(i) + 1);
        t.parents[i] = pick == 0 ? kInputParent : static_cast<int>(pick) - 1;
    }
    return t;
}

OmegaTopology chain_topology(int n_hidden) {
    OmegaTopology t;
    t.parents.resize(n_hidden);
    t.parents[0] = kInputParent;
    for (int i = 1; i < n_hidden; ++i) t.parents[i] = i - 1;
    return t;
}

OmegaTopology star_topology(int n_hidden) {
    OmegaTopology t;
    t.parents.assign(n_hidden, kInputParent);
    return t;
}

std::string format_topology(const OmegaTopology& t) {
    std::string out;
    for (std::size_t i = 0; i < t.parents.size(); ++i) {
        if (i) out += ',';
        out += t.parents[i] == kInputParent ? "I" : std::to_string(t.parents[i]);
    }
    return out;
}

OmegaTopology parse_topology(const std::string& text) {
    OmegaTopology t;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        std::string token = text.substr(pos, comma == std::string::npos ? std::string::npos
                                                                        : comma - pos);
        if (token.empty())
            throw ValidationError("parse_topology: empty entry in '" + text + "'");
        if (token == "I") {
            t.parents.push_back(kInputParent);
        } else {
            std::size_t used = 0;
            int v;
            try {
                v = std::stoi(token, &used);
            } catch (const std::exception&) {
                throw ValidationError("parse_topology: bad entry '" + token + "'");
            }
            if (used != token.size() || v < 0)
                throw ValidationError("parse_topology: bad entry '" + token + "'");
            t.parents.push_back(v);
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (t.parents.empty()) throw ValidationError("parse_topology: empty topology");
    return t;
}

OmegaNet build_omega(const OmegaTopology& t, const PiecewiseLinear& pwl) {
    auto violations = validate_topology(t);
    if (!violations.empty())
        throw ValidationError("build_omega: invalid topology (" + violations.front().requirement +
                              ": " + violations.front().detail + ")");

    OmegaNet net;
    net.topology = t;
    net.domain = {pwl.domain_lo(), pwl.domain_hi()};

    double min_value = *std::min_element(pwl.values.begin(), pwl.values.end());
    net.shift_c = min_value < 0.0 ? -min_value + 1.0 : 0.0;
    net.output_bias = (pwl.values.front() + net.shift_c) - net.shift_c;

    const std::vector<double> slopes = pwl.slopes();
    std::size_t first = 0;
    while (first < slopes.size() && slopes[first] == 0.0) ++first;
    const std::size_t encoded = slopes.size() - first;
    if (encoded != static_cast<std::size_t>(t.n_hidden()))
        throw ValidationError("build_omega: topology has " + std::to_string(t.n_hidden()) +
                              " neurons but the target encodes " + std::to_string(encoded) +
                              " segments");

    // increments[i] and knots[i] for the neuron encoding segment first+i.
    std::vector<double> increments(encoded), knots(encoded);
    for (std::size_t i = 0; i < encoded; ++i) {
        std::size_t seg = first + i;
        increments[i] = slopes[seg] - (i == 0 ? 0.0 : slopes[seg - 1]);
        if (increments[i] == 0.0)
            throw ValidationError("build_omega: equal adjacent slopes at segment " +
                                  std::to_string(seg) + "; run simplify first");
        knots[i] = pwl.breakpoints[seg];
    }

    for (std::size_t i = 0; i < encoded; ++i) {
        double mag = std::fabs(increments[i]);
        ChainNeuron neuron;
        int parent = t.parents[i];
        if (parent == kInputParent) {
            neuron.w = mag;
            neuron.b = -mag * knots[i];
        } else {
            // Parent outputs |increment_j| * (x - knot_j) on its live range;
            // dividing by the parent's gain and shifting by the knot gap puts
            // this neuron's kink at its own knot.
            neuron.w = mag / std::fabs(increments[parent]);
            neuron.b = -(knots[i] - knots[parent]) * mag;
        }
        net.neurons.push_back(neuron);
        net.signs.push_back(increments[i] > 0.0 ? 1 : -1);
    }
    return net;
}

ChainEval forward_omega(const OmegaNet& net, double x) {
    if (x < net.domain[0] || x > net.domain[1])
        throw ValidationError("forward_omega: x = " + format_double(x) + " outside domain [" +
                              format_double(net.domain[0]) + ", " +
                              format_double(net.domain[1]) + "]");
    ChainEval out;
    out.trace.resize(net.neurons.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < net.neurons.size(); ++i) {
        int parent = net.topology.parents[i];
        double in = parent == kInputParent ? x : out.trace[static_cast<std::size_t>(parent)];
        double pre = net.neurons[i].w * in + net.neurons[i].b;
        double r = pre > 0.0 ? pre : 0.0;
        out.trace[i] = r;
        acc += static_cast<double>(net.signs[i]) * r;
    }
    out.value = acc + net.output_bias;
    return out;
}

double omega_value(const OmegaNet& net, double x) {
    // Same recurrence as forward_omega without the trace copy.
    if (x < net.domain[0] || x > net.domain[1])
        throw ValidationError("omega_value: x = " + format_double(x) + " outside domain [" +
                              format_double(net.domain[0]) + ", " +
                              format_double(net.domain[1]) + "]");
    std::vector<double> q(net.neurons.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < net.neurons.size(); ++i) {
        int parent = net.topology.parents[i];
        double in = parent == kInputParent ? x : q[static_cast<std::size_t>(parent)];
        double pre = net.neurons[i].w * in + net.neurons[i].b;
        double r = pre > 0.0 ? pre : 0.0;
        q[i] = r;
        acc += static_cast<double>(net.signs[i]) * r;
    }
    return acc + net.output_bias;
}

double sup_error(const OmegaNet& net, const PiecewiseLinear& target, std::size_t grid_points) {
    if (grid_points < 2) throw ValidationError("sup_error: need at least 2 grid points");
    const std::vector<double> grid = linspace(net.domain[0], net.domain[1], grid_points);
    std::vector<double> errors(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        errors[i] = std::fabs(omega_value(net, grid[i]) - eval_pwl(target, grid[i]));
    });
    return *std::max_element(errors.begin(), errors.end());
}

double sup_difference(const OmegaNet& a, const S3ChainNet& b, std::size_t grid_points) {
    if (grid_points < 2) throw ValidationError("sup_difference: need at least 2 grid points");
    if (a.domain != b.domain)
        throw ValidationError("sup_difference: nets have different domains");
    const std::vector<double> grid = linspace(a.domain[0], a.domain[1], grid_points);
    std::vector<double> gaps(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        gaps[i] = std::fabs(omega_value(a, grid[i]) - chain_value(b, grid[i]));
    });
    return *std::max_element(gaps.begin(), gaps.end());
}

}  // namespace s3kit
