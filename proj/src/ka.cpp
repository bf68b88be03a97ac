#include "s3kit/ka.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace s3kit {

namespace {

std::function<double(double)> zero_fn() {
    return [](double) { return 0.0; };
}

// Modulus for a function whose increments never exceed epsilon: any window
// works, so report a fixed unit window.
std::function<double(double)> flat_modulus() {
    return [](double) { return 1.0; };
}

std::function<double(double)> lipschitz_modulus(double constant) {
    return [constant](double eps) { return eps / constant; };
}

}  // namespace

KADecomposition make_additive_decomposition(std::size_t n) {
    if (n < 2) throw ValidationError("additive decomposition: n must be >= 2");
    KADecomposition dec;
    dec.name = "additive";
    dec.n = n;
    const std::size_t rows = 2 * n + 1;
    dec.inner.assign(rows, std::vector<std::function<double(double)>>(n, zero_fn()));
    dec.outer.assign(rows, zero_fn());
    dec.outer_modulus.assign(rows, flat_modulus());
    for (std::size_t p = 0; p < n; ++p)
        dec.inner[0][p] = [](double x) { return x * x; };
    dec.outer[0] = [](double t) { return t; };
    dec.outer_modulus[0] = lipschitz_modulus(1.0);
    dec.target = [](const std::vector<double>& x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return s;
    };
    return dec;
}

KADecomposition make_product_decomposition() {
    KADecomposition dec;
    dec.name = "product";
    dec.n = 2;
    const std::size_t rows = 5;
    dec.inner.assign(rows, std::vector<std::function<double(double)>>(2, zero_fn()));
    dec.outer.assign(rows, zero_fn());
    dec.outer_modulus.assign(rows, flat_modulus());
    // exp(log(x1+1) + log(x2+1)) - (x1+x2) - 1 = x1*x2.
    for (std::size_t p = 0; p < 2; ++p) {
        dec.inner[0][p] = [](double x) { return std::log(x + 1.0); };
        dec.inner[1][p] = [](double x) { return x; };
    }
    dec.outer[0] = [](double t) { return std::exp(t); };
    // exp on [0, 2 ln 2] has slope at most 4; constant 5 also covers the
    // budget padding around that interval.
    dec.outer_modulus[0] = lipschitz_modulus(5.0);
    dec.outer[1] = [](double t) { return -t - 1.0; };
    dec.outer_modulus[1] = lipschitz_modulus(1.0);
    dec.target = [](const std::vector<double>& x) { return x[0] * x[1]; };
    return dec;
}

KADecomposition make_constant_decomposition(std::size_t n, double c) {
    if (n < 2) throw ValidationError("constant decomposition: n must be >= 2");
    KADecomposition dec;
    dec.name = "constant";
    dec.n = n;
    const std::size_t rows = 2 * n + 1;
    dec.inner.assign(rows, std::vector<std::function<double(double)>>(n, zero_fn()));
    dec.outer.assign(rows, zero_fn());
    dec.outer_modulus.assign(rows, flat_modulus());
    dec.outer[0] = [c](double) { return c; };
    dec.target = [c](const std::vector<double>&) { return c; };
    return dec;
}

const std::vector<std::string>& registered_decomposition_names() {
    static const std::vector<std::string> names = {"additive", "product", "constant"};
    return names;
}

KADecomposition make_registered_decomposition(const std::string& name, std::size_t n) {
    if (name == "additive") return make_additive_decomposition(n);
    if (name == "product") {
        if (n != 2)
            throw ValidationError("product decomposition is registered for n = 2 only");
        return make_product_decomposition();
    }
    if (name == "constant") return make_constant_decomposition(n, 1.0);
    throw ValidationError("unknown decomposition '" + name +
                          "' (known: additive, product, constant)");
}

namespace {

void check_shape(const KADecomposition& dec) {
    if (dec.n < 2) throw ValidationError("ka: input dimension must be >= 2");
    const std::size_t rows = 2 * dec.n + 1;
    if (dec.outer.size() != rows || dec.inner.size() != rows)
        throw ValidationError("ka: decomposition must have 2n+1 outer rows");
    for (const auto& row : dec.inner)
        if (row.size() != dec.n)
            throw ValidationError("ka: each inner row must have n functions");
    if (!dec.target) throw ValidationError("ka: decomposition lacks a target");
}

double superposition(const KADecomposition& dec, const std::vector<double>& x) {
    double total = 0.0;
    for (std::size_t q = 0; q < dec.outer.size(); ++q) {
        double s = 0.0;
        for (std::size_t p = 0; p < dec.n; ++p) s += dec.inner[q][p](x[p]);
        total += dec.outer[q](s);
    }
    return total;
}

// Visits the validation point set for dimension n: the full tensor grid when
// it is small enough, otherwise all corners plus seeded uniform samples.
void for_each_validation_point(std::size_t n, std::size_t per_axis,
                               const std::function<void(const std::vector<double>&)>& visit) {
    double grid_size = std::pow(static_cast<double>(per_axis), static_cast<double>(n));
    std::vector<double> x(n);
    if (grid_size <= 16384.0) {
        std::vector<std::size_t> idx(n, 0);
        while (true) {
            for (std::size_t d = 0; d < n; ++d)
                x[d] = static_cast<double>(idx[d]) / static_cast<double>(per_axis - 1);
            visit(x);
            std::size_t d = 0;
            while (d < n && ++idx[d] == per_axis) idx[d++] = 0;
            if (d == n) break;
        }
        return;
    }
    for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
        for (std::size_t d = 0; d < n; ++d) x[d] = (corner >> d) & 1 ? 1.0 : 0.0;
        visit(x);
    }
    Rng rng(0x4b41);  // fixed seed: the validation set is part of the contract
    for (std::size_t i = 0; i < 2048; ++i) {
        for (std::size_t d = 0; d < n; ++d) x[d] = rng.uniform01();
        visit(x);
    }
}

}  // namespace

void validate_decomposition(const KADecomposition& dec, std::size_t samples_per_axis,
                            double tol) {
    check_shape(dec);
    if (samples_per_axis < 2)
        throw ValidationError("validate_decomposition: need at least 2 samples per axis");
    double worst = 0.0;
    for_each_validation_point(dec.n, samples_per_axis, [&](const std::vector<double>& x) {
        worst = std::max(worst, std::fabs(superposition(dec, x) - dec.target(x)));
    });
    if (worst > tol)
        throw ValidationError("validate_decomposition: identity residual " + format_double(worst) +
                              " exceeds tolerance " + format_double(tol));
}

namespace {

// Sampled continuity modulus: largest window delta with sup window oscillation
// <= eps over a dense sampling of [lo, hi]. Used only when no analytic modulus
// came with the decomposition; an under-estimate is acceptable because the
// final composite grid check is the arbiter.
double sampled_modulus(const std::function<double(double)>& fn, double lo, double hi,
                       double eps) {
    const double width = hi - lo;
    if (width <= 0.0) return 1.0;  // single-point domain: any window works
    const std::size_t m = 4096;
    std::vector<double> values(m + 1);
    for (std::size_t i = 0; i <= m; ++i)
        values[i] = fn(lo + width * static_cast<double>(i) / static_cast<double>(m));

    // Oscillation within every window of k samples via monotone deques.
    auto oscillation_ok = [&](std::size_t k) {
        std::deque<std::size_t> maxq, minq;
        for (std::size_t i = 0; i <= m; ++i) {
            while (!maxq.empty() && values[maxq.back()] <= values[i]) maxq.pop_back();
            maxq.push_back(i);
            while (!minq.empty() && values[minq.back()] >= values[i]) minq.pop_back();
            minq.push_back(i);
            while (maxq.front() + k < i) maxq.pop_front();
            while (minq.front() + k < i) minq.pop_front();
            if (values[maxq.front()] - values[minq.front()] > eps) return false;
        }
        return true;
    };

    // Binary search the largest sample-window size whose oscillation fits.
    std::size_t lo_k = 0, hi_k = m;
    while (lo_k < hi_k) {
        std::size_t mid = (lo_k + hi_k + 1) / 2;
        if (oscillation_ok(mid)) lo_k = mid;
        else hi_k = mid - 1;
    }
    double delta = width * static_cast<double>(lo_k) / static_cast<double>(m);
    return std::max(delta, width / static_cast<double>(m) * 0.5);
}

}  // namespace

BudgetPlan error_budget(const KADecomposition& dec, double sigma) {
    check_shape(dec);
    if (!(sigma > 0.0)) throw ValidationError("error_budget: sigma must be positive");
    BudgetPlan plan;
    plan.sigma = sigma;
    plan.epsilon = sigma / (4.0 * static_cast<double>(dec.n) + 2.0);

    const std::size_t rows = 2 * dec.n + 1;
    plan.inner_delta.resize(rows);
    for (std::size_t q = 0; q < rows; ++q) {
        double delta;
        if (q < dec.outer_modulus.size() && dec.outer_modulus[q]) {
            delta = dec.outer_modulus[q](plan.epsilon);
        } else {
            // Reachable inner-sum interval from the exact functions.
            double lo = 0.0, hi = 0.0;
            for (std::size_t p = 0; p < dec.n; ++p) {
                double fmin = dec.inner[q][p](0.0), fmax = fmin;
                for (std::size_t i = 1; i <= 512; ++i) {
                    double v = dec.inner[q][p](static_cast<double>(i) / 512.0);
                    fmin = std::min(fmin, v);
                    fmax = std::max(fmax, v);
                }
                lo += fmin;
                hi += fmax;
            }
            delta = sampled_modulus(dec.outer[q], lo, hi, plan.epsilon);
        }
        if (!(delta > 0.0))
            throw ValidationError("error_budget: modulus for outer row " + std::to_string(q) +
                                  " returned a nonpositive window");
        plan.inner_delta[q] = delta / (static_cast<double>(dec.n) + 1.0);
    }
    return plan;
}

KANet assemble(const KADecomposition& dec, double sigma, double step) {
    check_shape(dec);
    if (!(step > 0.0)) throw ValidationError("assemble: step must be positive");
    validate_decomposition(dec);
    const BudgetPlan plan = error_budget(dec, sigma);
    const std::size_t rows = 2 * dec.n + 1;

    KANet net;
    net.decomposition_name = dec.name;
    net.n = dec.n;
    net.sigma = sigma;
    net.inner_nets.resize(rows);
    net.outer_nets.resize(rows);

    std::vector<std::vector<PiecewiseLinear>> inner_pwls(rows);
    for (std::size_t q = 0; q < rows; ++q) {
        inner_pwls[q].resize(dec.n);
        net.inner_nets[q].resize(dec.n);
    }

    // Inner stage: (2n+1) x n independent chains, each against its row budget.
    std::vector<std::string> failure(rows * dec.n);
    parallel_for(rows * dec.n, [&](std::size_t flat) {
        const std::size_t q = flat / dec.n;
        const std::size_t p = flat % dec.n;
        PiecewiseLinear raw = fit_uniform(dec.inner[q][p], 0.0, 1.0, step);
        PiecewiseLinear pwl = simplify(raw, default_slope_tol(raw));
        S3ChainNet chain = build_chain(pwl);
        double err = sup_error(chain, dec.inner[q][p], 2001);
        if (err > plan.inner_delta[q]) {
            double needed = step * std::sqrt(plan.inner_delta[q] / err) * 0.9;
            failure[flat] = "inner chain (q=" + std::to_string(q) + ", p=" + std::to_string(p + 1) +
                            ") misses its budget: error " + format_double(err) + " > " +
                            format_double(plan.inner_delta[q]) + "; try step <= " +
                            format_double(needed);
            return;
        }
        inner_pwls[q][p] = std::move(pwl);
        net.inner_nets[q][p] = std::move(chain);
    });
    for (const auto& f : failure)
        if (!f.empty()) throw ValidationError("assemble: " + f);

    // Outer stage: each chain lives on the realized inner-sum interval padded
    // by the row's total inner error allowance. Chains equal their fitted
    // piecewise targets exactly and a piecewise-linear extreme sits on a
    // breakpoint, so the interval comes straight from the fitted values.
    for (std::size_t q = 0; q < rows; ++q) {
        double lo = 0.0, hi = 0.0;
        for (std::size_t p = 0; p < dec.n; ++p) {
            const auto& vals = inner_pwls[q][p].values;
            lo += *std::min_element(vals.begin(), vals.end());
            hi += *std::max_element(vals.begin(), vals.end());
        }
        const double pad = static_cast<double>(dec.n) * plan.inner_delta[q];
        lo -= pad;
        hi += pad;
        double outer_step = std::min(step, (hi - lo) / 4.0);
        PiecewiseLinear raw = fit_uniform(dec.outer[q], lo, hi, outer_step);
        PiecewiseLinear pwl = simplify(raw, default_slope_tol(raw));
        S3ChainNet chain = build_chain(pwl);
        double err = sup_error(chain, dec.outer[q], 2001);
        if (err > plan.epsilon) {
            double needed = outer_step * std::sqrt(plan.epsilon / err) * 0.9;
            throw ValidationError("assemble: outer chain q=" + std::to_string(q) +
                                  " misses its budget: error " + format_double(err) + " > " +
                                  format_double(plan.epsilon) + "; try step <= " +
                                  format_double(needed));
        }
        net.outer_nets[q] = std::move(chain);
    }

    double worst = composite_error(net, dec);
    if (worst > sigma)
        throw ValidationError("assemble: composite error " + format_double(worst) +
                              " exceeds sigma " + format_double(sigma) +
                              "; refine the step or the budget");
    return net;
}

double forward_ka(const KANet& net, const std::vector<double>& x) {
    if (x.size() != net.n)
        throw ValidationError("forward_ka: expected " + std::to_string(net.n) +
                              " coordinates, got " + std::to_string(x.size()));
    for (double v : x)
        if (v < 0.0 || v > 1.0)
            throw ValidationError("forward_ka: coordinate " + format_double(v) +
                                  " outside [0,1]");
    double total = 0.0;
    for (std::size_t q = 0; q < net.outer_nets.size(); ++q) {
        double s = 0.0;
        for (std::size_t p = 0; p < net.n; ++p) s += chain_value(net.inner_nets[q][p], x[p]);
        // The padded outer domain contains every reachable sum; clamping only
        // absorbs float round-off at the very edges.
        const auto& dom = net.outer_nets[q].domain;
        s = std::clamp(s, dom[0], dom[1]);
        total += chain_value(net.outer_nets[q], s);
    }
    return total;
}

std::size_t width_of(const KANet& net) {
    std::size_t inner_total = 0;
    for (const auto& row : net.inner_nets) inner_total += row.size();
    return std::max(inner_total, net.outer_nets.size());
}

double composite_error(const KANet& net, const KADecomposition& dec, std::size_t grid_per_axis) {
    if (net.n != dec.n) throw ValidationError("composite_error: dimension mismatch");
    double worst = 0.0;
    for_each_validation_point(net.n, grid_per_axis, [&](const std::vector<double>& x) {
        worst = std::max(worst, std::fabs(forward_ka(net, x) - dec.target(x)));
    });
    return worst;
}

}  // namespace s3kit
