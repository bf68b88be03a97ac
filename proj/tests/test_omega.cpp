#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "s3kit/omega.hpp"
#include "s3kit/s3_chain.hpp"

using namespace s3kit;

namespace {

// Four distinct nonzero slopes: exactly four hidden neurons after encoding.
PiecewiseLinear four_segment_target() {
    return make_pwl({0.0, 0.25, 0.5, 0.75, 1.0}, {0.0, 1.0, 0.5, 0.9, 0.2});
}

}  // namespace

TEST_CASE("canned topologies and the text format") {
    OmegaTopology chain = chain_topology(4);
    CHECK(chain.parents == std::vector<int>{kInputParent, 0, 1, 2});
    CHECK(format_topology(chain) == "I,0,1,2");

    OmegaTopology star = star_topology(3);
    CHECK(star.parents == std::vector<int>{kInputParent, kInputParent, kInputParent});
    CHECK(format_topology(star) == "I,I,I");

    OmegaTopology parsed = parse_topology("I,0,I,2");
    CHECK(parsed.parents == std::vector<int>{kInputParent, 0, kInputParent, 2});
    CHECK(format_topology(parsed) == "I,0,I,2");

    CHECK_THROWS_AS(parse_topology(""), ValidationError);
    CHECK_THROWS_AS(parse_topology("I,,0"), ValidationError);
    CHECK_THROWS_AS(parse_topology("I,x"), ValidationError);
    CHECK_THROWS_AS(parse_topology("I,0.5"), ValidationError);
}

TEST_CASE("validation catches each wiring rule") {
    CHECK(validate_topology(chain_topology(5)).empty());
    CHECK(validate_topology(star_topology(5)).empty());

    OmegaTopology t;
    CHECK_FALSE(validate_topology(t).empty());  // no neurons

    t.parents = {0};  // neuron 0 must take the input
    CHECK_FALSE(validate_topology(t).empty());

    t.parents = {kInputParent, 1};  // self-reference
    CHECK_FALSE(validate_topology(t).empty());

    t.parents = {kInputParent, 2};  // forward reference
    CHECK_FALSE(validate_topology(t).empty());

    t.parents = {kInputParent, -7};  // junk sentinel
    CHECK_FALSE(validate_topology(t).empty());

    CHECK_THROWS_AS(require_valid_topology(t), ValidationError);
    CHECK_NOTHROW(require_valid_topology(chain_topology(3)));
}

TEST_CASE("family size is the factorial of the neuron count") {
    CHECK(topology_count(1) == 1);
    CHECK(topology_count(3) == 6);
    CHECK(topology_count(5) == 120);
    CHECK(topology_count(8) == 40320);

    std::vector<OmegaTopology> all = enumerate_topologies(4);
    CHECK(all.size() == 24);
    std::set<std::string> seen;
    for (const auto& t : all) {
        CHECK(validate_topology(t).empty());
        seen.insert(format_topology(t));
    }
    CHECK(seen.size() == all.size());  // no duplicates

    CHECK_THROWS_AS(enumerate_topologies(0), ValidationError);
    CHECK_THROWS_AS(enumerate_topologies(9), ValidationError);
}

TEST_CASE("random topologies are valid, seeded, and roughly uniform") {
    OmegaTopology a = random_topology(6, 42);
    OmegaTopology b = random_topology(6, 42);
    CHECK(a.parents == b.parents);
    CHECK(validate_topology(a).empty());
    CHECK(random_topology(6, 43).parents != a.parents);

    // 6000 draws over the 6 members of the three-neuron family: each count
    // should land within ~3 sigma of 1000.
    std::map<std::string, int> counts;
    for (std::uint64_t seed = 0; seed < 6000; ++seed)
        counts[format_topology(random_topology(3, seed))]++;
    CHECK(counts.size() == 6);
    for (const auto& [name, c] : counts) {
        INFO("member ", name, " count ", c);
        CHECK(c > 900);
        CHECK(c < 1100);
    }
}

TEST_CASE("cut_rewire moves one edge and validates its arguments") {
    OmegaTopology t = chain_topology(4);
    OmegaTopology r = cut_rewire(t, 2, kInputParent);
    CHECK(format_topology(r) == "I,0,I,2");
    CHECK(format_topology(t) == "I,0,1,2");  // input untouched

    OmegaTopology r2 = cut_rewire(r, 3, 0);
    CHECK(format_topology(r2) == "I,0,I,0");

    CHECK_THROWS_AS(cut_rewire(t, 0, 1), ValidationError);   // neuron 0 is pinned
    CHECK_THROWS_AS(cut_rewire(t, 4, 0), ValidationError);   // out of range
    CHECK_THROWS_AS(cut_rewire(t, 2, 2), ValidationError);   // self
    CHECK_THROWS_AS(cut_rewire(t, 2, 3), ValidationError);   // forward
    CHECK_THROWS_AS(cut_rewire(t, 2, -3), ValidationError);  // junk
}

TEST_CASE("every four-neuron member reproduces the target exactly") {
    PiecewiseLinear pwl = four_segment_target();
    S3ChainNet chain = build_chain(pwl);
    for (const OmegaTopology& t : enumerate_topologies(4)) {
        OmegaNet net = build_omega(t, pwl);
        CHECK(net.neurons.size() == 4);
        CHECK(sup_difference(net, chain, 10001) <= 1e-9);
        CHECK(sup_error(net, pwl, 10001) <= 1e-9);
    }
}

TEST_CASE("the chain member carries the chain construction's weights") {
    PiecewiseLinear pwl = four_segment_target();
    S3ChainNet chain = build_chain(pwl);
    OmegaNet net = build_omega(chain_topology(4), pwl);
    REQUIRE(net.neurons.size() == chain.neurons.size());
    for (std::size_t i = 0; i < chain.neurons.size(); ++i) {
        CHECK(net.neurons[i].w == chain.neurons[i].w);
        CHECK(net.neurons[i].b == chain.neurons[i].b);
        CHECK(net.signs[i] == chain.signs[i]);
    }
    CHECK(net.output_bias == chain.output_bias);
    CHECK(net.shift_c == chain.shift_c);
}

TEST_CASE("input-wired members recompute weights against the input directly") {
    PiecewiseLinear pwl = four_segment_target();
    OmegaNet star = build_omega(star_topology(4), pwl);
    // Each neuron sees the raw input: w = |increment|, b = -w * kink.
    std::vector<double> m = pwl.slopes();
    double prev = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        double inc = m[i] - prev;
        prev = m[i];
        CHECK(star.neurons[i].w == doctest::Approx(std::fabs(inc)).epsilon(1e-15));
        CHECK(star.neurons[i].b ==
              doctest::Approx(-std::fabs(inc) * pwl.breakpoints[i]).epsilon(1e-12));
    }
    CHECK(sup_error(star, pwl, 10001) <= 1e-9);
}

TEST_CASE("build_omega rejects mismatched sizes and bad topologies") {
    PiecewiseLinear pwl = four_segment_target();
    CHECK_THROWS_AS(build_omega(chain_topology(3), pwl), ValidationError);
    CHECK_THROWS_AS(build_omega(chain_topology(5), pwl), ValidationError);
    OmegaTopology bad;
    bad.parents = {kInputParent, 4, 0, 0};
    CHECK_THROWS_AS(build_omega(bad, pwl), ValidationError);
}

TEST_CASE("forward_omega traces activations and checks the domain") {
    PiecewiseLinear pwl = four_segment_target();
    OmegaNet net = build_omega(parse_topology("I,0,I,1"), pwl);
    ChainEval eval = forward_omega(net, 0.6);
    CHECK(eval.trace.size() == 4);
    CHECK(eval.value == doctest::Approx(eval_pwl(pwl, 0.6)).epsilon(1e-12));
    CHECK(omega_value(net, 0.6) == eval.value);
    CHECK_THROWS_AS(forward_omega(net, -0.1), ValidationError);
    CHECK_THROWS_AS(omega_value(net, 1.1), ValidationError);
}

TEST_CASE("rewiring a built net's topology leaves the function unchanged") {
    PiecewiseLinear pwl = four_segment_target();
    Rng rng(5);
    OmegaTopology t = chain_topology(4);
    for (int step = 0; step < 25; ++step) {
        int neuron = 1 + static_cast<int>(rng.uniform_index(3));
        int parent_choices = neuron + 1;  // input or any earlier neuron
        int pick = static_cast<int>(rng.uniform_index(parent_choices));
        int parent = pick == 0 ? kInputParent : pick - 1;
        if (parent == t.parents[static_cast<std::size_t>(neuron)]) continue;
        t = cut_rewire(t, neuron, parent);
        OmegaNet net = build_omega(t, pwl);
        CHECK(sup_error(net, pwl, 2001) <= 1e-9);
    }
}
