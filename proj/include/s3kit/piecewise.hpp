#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "s3kit/common.hpp"

namespace s3kit {

// Continuous piecewise-linear function on [breakpoints.front(), breakpoints.back()],
// stored as strictly increasing abscissae plus the function values there.
// Continuity is inherent to the representation: one value per breakpoint.
struct PiecewiseLinear {
    std::vector<double> breakpoints;
    std::vector<double> values;

    std::size_t segment_count() const { return breakpoints.size() - 1; }
    double domain_lo() const { return breakpoints.front(); }
    double domain_hi() const { return breakpoints.back(); }

    // Slope of segment i, i.e. on [breakpoints[i], breakpoints[i+1]].
    double slope(std::size_t i) const;
    std::vector<double> slopes() const;
};

// Validates and assembles a PiecewiseLinear. Rejects: fewer than 2 breakpoints,
// size mismatch, non-finite entries, non-increasing abscissae.
PiecewiseLinear make_pwl(std::vector<double> breakpoints, std::vector<double> values);

// Samples f on the uniform grid a, a+step, ... and finally b itself (so the
// last sub-interval may be shorter than step). The result interpolates f
// exactly at every breakpoint.
PiecewiseLinear fit_uniform(const std::function<double(double)>& f, double a, double b,
                            double step);

// Merges adjacent segments whose slopes differ by at most slope_tol, repeating
// until no merge applies, so the result is a structural fixpoint: calling
// simplify on its own output returns it unchanged.
PiecewiseLinear simplify(const PiecewiseLinear& pwl, double slope_tol);

// Relative default tolerance for simplify: 1e-12 * (1 + max |slope|).
double default_slope_tol(const PiecewiseLinear& pwl);

// Value at x. Exact at breakpoints; between them the containing segment is
// interpolated in the value*(1-t) + value*t form. x outside the domain is an
// error, never a clamp.
double eval_pwl(const PiecewiseLinear& pwl, double x);

// Random continuous pwl target for property suites: `segments` pieces on [0,1]
// with breakpoints drawn uniformly (minimum gap enforced so slopes stay
// bounded) and values uniform in [-5, 5]; returned already simplified.
PiecewiseLinear random_simplified_pwl(Rng& rng, std::size_t segments);

}  // namespace s3kit
