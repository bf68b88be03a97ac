#include <cmath>

#include "doctest.h"
#include "s3kit/ka.hpp"

using namespace s3kit;

TEST_CASE("the registry exposes the documented decompositions") {
    const std::vector<std::string>& names = registered_decomposition_names();
    for (const char* expected : {"additive", "product", "constant"}) {
        bool found = false;
        for (const std::string& n : names) found = found || n == expected;
        CHECK(found);
    }
    CHECK_THROWS_AS(make_registered_decomposition("no_such_dec", 2), ValidationError);
    CHECK_THROWS_AS(make_registered_decomposition("product", 3), ValidationError);  // n pinned
    CHECK_THROWS_AS(make_additive_decomposition(1), ValidationError);               // n >= 2
}

TEST_CASE("registered decompositions satisfy the superposition identity") {
    CHECK_NOTHROW(validate_decomposition(make_additive_decomposition(2)));
    CHECK_NOTHROW(validate_decomposition(make_additive_decomposition(3)));
    CHECK_NOTHROW(validate_decomposition(make_product_decomposition()));
    CHECK_NOTHROW(validate_decomposition(make_constant_decomposition(2, 1.5)));

    // Corrupt the target: the identity check must notice.
    KADecomposition broken = make_additive_decomposition(2);
    auto original = broken.target;
    broken.target = [original](const std::vector<double>& x) { return original(x) + 0.1; };
    CHECK_THROWS_AS(validate_decomposition(broken), ValidationError);
}

TEST_CASE("error budget splits sigma across the stages") {
    KADecomposition dec = make_additive_decomposition(2);
    BudgetPlan plan = error_budget(dec, 0.05);
    CHECK(plan.sigma == 0.05);
    // 2n+1 = 5 outer rows, epsilon = sigma / (4n+2).
    CHECK(plan.epsilon == doctest::Approx(0.005).epsilon(1e-15));
    REQUIRE(plan.inner_delta.size() == 5);
    // Row 0 carries the identity outer: delta(epsilon) = epsilon, split n+1 ways.
    CHECK(plan.inner_delta[0] == doctest::Approx(0.005 / 3.0).epsilon(1e-12));
    for (double d : plan.inner_delta) CHECK(d > 0.0);

    CHECK_THROWS_AS(error_budget(dec, 0.0), ValidationError);
    CHECK_THROWS_AS(error_budget(dec, -0.1), ValidationError);
}

TEST_CASE("additive assembly meets its target tolerance") {
    KADecomposition dec = make_additive_decomposition(2);
    KANet net = assemble(dec, 0.05, 0.01);
    CHECK(net.n == 2);
    CHECK(net.inner_nets.size() == 5);
    CHECK(net.inner_nets[0].size() == 2);
    CHECK(net.outer_nets.size() == 5);
    CHECK(width_of(net) == 10);  // n active chains per outer row: n(2n+1)

    double err = composite_error(net, dec);
    CHECK(err <= 0.05);
    // x^2 + y^2 at a few spot points, within the certified tolerance.
    CHECK(std::fabs(forward_ka(net, {0.5, 0.5}) - 0.5) <= 0.05);
    CHECK(std::fabs(forward_ka(net, {1.0, 1.0}) - 2.0) <= 0.05);
    CHECK(std::fabs(forward_ka(net, {0.0, 0.0}) - 0.0) <= 0.05);
}

TEST_CASE("product assembly meets its target tolerance") {
    KADecomposition dec = make_product_decomposition();
    KANet net = assemble(dec, 0.05, 0.01);
    CHECK(width_of(net) == 10);
    CHECK(composite_error(net, dec) <= 0.05);
    CHECK(std::fabs(forward_ka(net, {0.5, 0.5}) - 0.25) <= 0.05);
    CHECK(std::fabs(forward_ka(net, {1.0, 0.25}) - 0.25) <= 0.05);
    CHECK(std::fabs(forward_ka(net, {0.0, 0.9}) - 0.0) <= 0.05);
}

TEST_CASE("three-dimensional additive assembly") {
    KADecomposition dec = make_additive_decomposition(3);
    KANet net = assemble(dec, 0.05, 0.01);
    CHECK(width_of(net) == 21);  // 2n^2 + n for n = 3
    CHECK(composite_error(net, dec) <= 0.05);
    CHECK(std::fabs(forward_ka(net, {0.5, 0.5, 0.5}) - 0.75) <= 0.05);
}

TEST_CASE("constant decomposition assembles to the constant") {
    KADecomposition dec = make_constant_decomposition(2, 1.5);
    KANet net = assemble(dec, 0.05, 0.01);
    CHECK(composite_error(net, dec) <= 0.05);
    CHECK(forward_ka(net, {0.3, 0.8}) == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("forward_ka validates its input point") {
    KANet net = assemble(make_additive_decomposition(2), 0.05, 0.01);
    CHECK_THROWS_AS(forward_ka(net, {0.5}), ValidationError);            // wrong dimension
    CHECK_THROWS_AS(forward_ka(net, {0.5, 0.5, 0.5}), ValidationError);  // wrong dimension
    CHECK_THROWS_AS(forward_ka(net, {-0.1, 0.5}), ValidationError);      // outside the cube
    CHECK_THROWS_AS(forward_ka(net, {0.5, 1.1}), ValidationError);
}

TEST_CASE("a step too coarse for the budget is rejected, not papered over") {
    KADecomposition dec = make_additive_decomposition(2);
    // sigma 5e-4 needs inner accuracy ~1.7e-5; step 0.05 gives ~6e-4.
    CHECK_THROWS_AS(assemble(dec, 5e-4, 0.05), ValidationError);
    CHECK_THROWS_AS(assemble(dec, 0.0, 0.01), ValidationError);
    CHECK_THROWS_AS(assemble(dec, 0.05, 0.0), ValidationError);
}

TEST_CASE("assembly is deterministic") {
    KADecomposition dec = make_product_decomposition();
    KANet a = assemble(dec, 0.05, 0.01);
    KANet b = assemble(dec, 0.05, 0.01);
    REQUIRE(a.inner_nets.size() == b.inner_nets.size());
    const S3ChainNet& ca = a.inner_nets[0][0];
    const S3ChainNet& cb = b.inner_nets[0][0];
    REQUIRE(ca.neurons.size() == cb.neurons.size());
    for (std::size_t i = 0; i < ca.neurons.size(); ++i) {
        CHECK(ca.neurons[i].w == cb.neurons[i].w);
        CHECK(ca.neurons[i].b == cb.neurons[i].b);
    }
    CHECK(composite_error(a, dec) == composite_error(b, dec));
}
