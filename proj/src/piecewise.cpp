#include "s3kit/piecewise.hpp"

#include <algorithm>
#include <cmath>

namespace s3kit {

double PiecewiseLinear::slope(std::size_t i) const {
    return (values[i + 1] - values[i]) / (breakpoints[i + 1] - breakpoints[i]);
}

std::vector<double> PiecewiseLinear::slopes() const {
    std::vector<double> m(segment_count());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = slope(i);
    return m;
}

PiecewiseLinear make_pwl(std::vector<double> breakpoints, std::vector<double> values) {
    if (breakpoints.size() < 2)
        throw ValidationError("piecewise: need at least 2 breakpoints, got " +
                              std::to_string(breakpoints.size()));
    if (breakpoints.size() != values.size())
        throw ValidationError("piecewise: breakpoints/values size mismatch (" +
                              std::to_string(breakpoints.size()) + " vs " +
                              std::to_string(values.size()) + ")");
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
        if (!std::isfinite(breakpoints[i]))
            throw ValidationError("piecewise: non-finite breakpoint at index " + std::to_string(i));
        if (!std::isfinite(values[i]))
            throw ValidationError("piecewise: non-finite value at index " + std::to_string(i));
    }
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (!(breakpoints[i] < breakpoints[i + 1]))
            throw ValidationError("piecewise: breakpoints not strictly increasing at index " +
                                  std::to_string(i + 1));
    }
    return PiecewiseLinear{std::move(breakpoints), std::move(values)};
}

PiecewiseLinear fit_uniform(const std::function<double(double)>& f, double a, double b,
                            double step) {
    if (!(b > a)) throw ValidationError("fit_uniform: interval must satisfy b > a");
    if (!(step > 0.0)) throw ValidationError("fit_uniform: step must be positive");
    if (step > b - a) throw ValidationError("fit_uniform: step exceeds interval length");

    std::vector<double> xs;
    // Walk a, a+step, ...; stop just shy of b so a rounding-level overshoot of
    // the final regular point never produces a duplicate of b itself.
    for (std::size_t k = 0;; ++k) {
        double x = a + static_cast<double>(k) * step;
        if (x >= b - 1e-12 * step) break;
        xs.push_back(x);
    }
    xs.push_back(b);

    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        ys[i] = f(xs[i]);
        if (!std::isfinite(ys[i]))
            throw ValidationError("fit_uniform: function not finite at x = " + format_double(xs[i]));
    }
    return make_pwl(std::move(xs), std::move(ys));
}

namespace {

// One merge pass: keeps a breakpoint only when the slope from the previously
// kept point differs from the immediately following original slope by more
// than tol. Returns whether anything was dropped.
bool simplify_pass(const PiecewiseLinear& in, double tol, PiecewiseLinear& out) {
    std::vector<std::size_t> keep;
    keep.push_back(0);
    for (std::size_t i = 1; i + 1 < in.breakpoints.size(); ++i) {
        double left = (in.values[i] - in.values[keep.back()]) /
                      (in.breakpoints[i] - in.breakpoints[keep.back()]);
        double right = in.slope(i);
        if (std::fabs(right - left) > tol) keep.push_back(i);
    }
    keep.push_back(in.breakpoints.size() - 1);

    out.breakpoints.clear();
    out.values.clear();
    for (std::size_t idx : keep) {
        out.breakpoints.push_back(in.breakpoints[idx]);
        out.values.push_back(in.values[idx]);
    }
    return keep.size() != in.breakpoints.size();
}

}  // namespace

PiecewiseLinear simplify(const PiecewiseLinear& pwl, double slope_tol) {
    if (slope_tol < 0.0) throw ValidationError("simplify: slope_tol must be nonnegative");
    PiecewiseLinear current = pwl;
    PiecewiseLinear next;
    // Merging changes the merged segment's slope slightly, which can expose a
    // new mergeable pair; iterate to the fixpoint so the result is idempotent
    // and no adjacent output slopes sit within tolerance of each other.
    while (simplify_pass(current, slope_tol, next)) current = next;
    return next;
}

double default_slope_tol(const PiecewiseLinear& pwl) {
    double max_slope = 0.0;
    for (double m : pwl.slopes()) max_slope = std::max(max_slope, std::fabs(m));
    return 1e-12 * (1.0 + max_slope);
}

double eval_pwl(const PiecewiseLinear& pwl, double x) {
    if (x < pwl.domain_lo() || x > pwl.domain_hi())
        throw ValidationError("eval_pwl: x = " + format_double(x) + " outside domain [" +
                              format_double(pwl.domain_lo()) + ", " +
                              format_double(pwl.domain_hi()) + "]");
    // Index of the segment containing x: the last breakpoint <= x.
    auto it = std::upper_bound(pwl.breakpoints.begin(), pwl.breakpoints.end(), x);
    std::size_t i = static_cast<std::size_t>(it - pwl.breakpoints.begin());
    if (i == pwl.breakpoints.size()) return pwl.values.back();  // x == last breakpoint
    --i;
    if (x == pwl.breakpoints[i]) return pwl.values[i];
    double t = (x - pwl.breakpoints[i]) / (pwl.breakpoints[i + 1] - pwl.breakpoints[i]);
    return pwl.values[i] * (1.0 - t) + pwl.values[i + 1] * t;
}

PiecewiseLinear random_simplified_pwl(Rng& rng, std::size_t segments) {
    if (segments == 0) throw ValidationError("random_simplified_pwl: need at least 1 segment");
    // Interior breakpoints drawn uniformly with a minimum gap of 1e-3 so the
    // slopes (values span [-5,5]) stay below ~1e4 and construction stays well
    // inside float round-off budgets.
    const double min_gap = 1e-3;
    std::vector<double> xs;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        xs.assign(1, 0.0);
        std::vector<double> interior(segments - 1);
        for (double& v : interior) v = rng.uniform(0.0, 1.0);
        std::sort(interior.begin(), interior.end());
        bool ok = true;
        double prev = 0.0;
        for (double v : interior) {
            if (v - prev < min_gap) { ok = false; break; }
            prev = v;
        }
        if (ok && 1.0 - prev < min_gap) ok = false;
        if (!ok) continue;
        xs.insert(xs.end(), interior.begin(), interior.end());
        xs.push_back(1.0);
        break;
    }
    if (xs.size() != segments + 1)
        throw ValidationError("random_simplified_pwl: could not place breakpoints with min gap");

    std::vector<double> ys(xs.size());
    for (double& v : ys) v = rng.uniform(-5.0, 5.0);
    PiecewiseLinear raw = make_pwl(std::move(xs), std::move(ys));
    return simplify(raw, default_slope_tol(raw));
}

}  // namespace s3kit
