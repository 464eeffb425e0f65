#pragma once

// One-spoke star. Hub and spoke are interchangeable, so the diagonal of the
// reduced map carries the whole dynamics: f(x) = 1 - (1 - a x)(1 - b x).

#include <cmath>
#include <optional>

#include "starsis/params.hpp"

namespace starsis {

inline double f_scalar(const Params& p, double x) {
    detail::require_unit(x, "x");
    return 1.0 - (1.0 - p.a() * x) * (1.0 - p.b() * x);
}

/// f'(x) = (a + b) - 2 a b x, linear and decreasing.
inline double f_scalar_prime(const Params& p, double x) { return (p.a() + p.b()) - 2.0 * p.a() * p.b() * x; }

struct ScalarReport {
    /// (a + b - 1) / (a b), present iff a + b > 1.
    std::optional<double> x_f;
    /// Point where f' = 1; equals x_f / 2.
    std::optional<double> x_c;
    double f_prime_at_0 = 0.0;
    double f_prime_at_1 = 0.0;
};

inline ScalarReport scalar_report(const Params& p) {
    const double a = p.a();
    const double b = p.b();
    ScalarReport r;
    r.f_prime_at_0 = a + b;
    r.f_prime_at_1 = a + b - 2.0 * a * b;
    if (a + b > 1.0) {
        r.x_f = (a + b - 1.0) / (a * b);
        r.x_c = (a + b - 1.0) / (2.0 * a * b);
    }
    return r;
}

struct ScalarIteration {
    double limit = 0.0;
    long iterations = 0;
    bool resolved = false;
};

/// Iterates f until the step falls below tol. `resolved` is false when the cap
/// is hit first.
inline ScalarIteration iterate_scalar(const Params& p, double x0, long max_iters = 1'000'000, double tol = 1e-10) {
    detail::require_unit(x0, "x0");
    ScalarIteration out;
    double x = x0;
    while (out.iterations < max_iters) {
        const double next = f_scalar(p, x);
        ++out.iterations;
        const double step = std::abs(next - x);
        x = next;
        if (step < tol) {
            out.resolved = true;
            break;
        }
    }
    out.limit = x;
    return out;
}

}  // namespace starsis
