#pragma once

// Reduced two-variable star system: hub probability x, common spoke
// probability y.
//
//   F(x, y) = (1 - (1 - a x)(1 - b y)^n,  1 - (1 - a y)(1 - b x))
//
// The partial-fixed-point curves are
//   phi1(y)      : x with x = f1(x, y)    (1 - (1-by)^n) / (1 - a (1-by)^n)
//   phi2_of_x(x) : y with y = f2(x, y)    b x / (1 - a + a b x)
//   phi2_of_y(y) : the same curve as x(y) (1 - a) y / (b (1 - a y))
// and the nontrivial fixed point is their intersection away from the origin.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>

#include "starsis/params.hpp"

namespace starsis {

struct State2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const State2&, const State2&) = default;
};

inline double sup_distance(const State2& p, const State2& q) noexcept {
    return std::max(std::abs(p.x - q.x), std::abs(p.y - q.y));
}

inline bool componentwise_le(const State2& p, const State2& q) noexcept { return p.x <= q.x && p.y <= q.y; }

namespace detail {

inline void require_unit(const State2& s) {
    require_unit(s.x, "x");
    require_unit(s.y, "y");
}

}  // namespace detail

inline State2 apply_F(const StarParams& sp, const State2& s) {
    detail::require_unit(s);
    const double a = sp.a();
    const double b = sp.b();
    return {1.0 - (1.0 - a * s.x) * detail::ipow(1.0 - b * s.y, sp.n()),
            1.0 - (1.0 - a * s.y) * (1.0 - b * s.x)};
}

/// Sup-norm of F(s) - s.
inline double fixed_point_residual(const StarParams& sp, const State2& s) { return sup_distance(apply_F(sp, s), s); }

/// x-coordinate of the partial-fixed-point curve of the hub equation.
inline double phi1(const StarParams& sp, double y) {
    detail::require_unit(y, "y");
    const double c = detail::ipow(1.0 - sp.b() * y, sp.n());
    return (1.0 - c) / (1.0 - sp.a() * c);
}

inline double phi2_of_x(const Params& p, double x) {
    detail::require_unit(x, "x");
    return p.b() * x / (1.0 - p.a() + p.a() * p.b() * x);
}

/// Largest y for which phi2_of_y stays inside the unit square.
inline double phi2_of_y_domain_end(const Params& p) noexcept { return p.b() / (1.0 - p.a() + p.a() * p.b()); }

namespace detail {

/// phi2_of_y without the domain check, capped at 1. When a is close to 1 the
/// factor 1 - a y loses digits and the computed value can overshoot 1 by many
/// ulps right at the domain end.
inline double phi2_of_y_capped(const Params& p, double y) noexcept {
    return std::min(1.0, (1.0 - p.a()) * y / (p.b() * (1.0 - p.a() * y)));
}

}  // namespace detail

/// Inverse of phi2_of_x. Throws std::domain_error once the curve leaves the
/// unit square, i.e. when (1 - a) y > b (1 - a y).
inline double phi2_of_y(const Params& p, double y) {
    detail::require_unit(y, "y");
    const double num = (1.0 - p.a()) * y;
    const double den = p.b() * (1.0 - p.a() * y);
    // A few ulps of slack so the domain end itself evaluates to 1.
    if (num > den * (1.0 + 8.0 * std::numeric_limits<double>::epsilon())) {
        throw std::domain_error("phi2_of_y: curve exits unit square");
    }
    return std::min(1.0, num / den);
}

struct Derivatives {
    double first;
    double second;
};

/// First and second derivatives of phi1.
///
/// With u = 1 - b y and c = u^n:
///   phi1'  =  n b (1-a) u^(n-1) / (1 - a c)^2
///   phi1'' = -n b^2 (1-a) u^(n-2) ((n-1) + a (n+1) c) / (1 - a c)^3
inline Derivatives phi1_derivatives(const StarParams& sp, double y) {
    detail::require_unit(y, "y");
    const double a = sp.a();
    const double b = sp.b();
    const int n = sp.n();
    const double u = 1.0 - b * y;
    const double c = detail::ipow(u, n);
    const double d = 1.0 - a * c;
    const double first = n * b * (1.0 - a) * detail::ipow(u, n - 1) / (d * d);
    // u^(n-2) is u^-1 when n == 1; b y < 1 keeps u positive.
    const double u_nm2 = n >= 2 ? detail::ipow(u, n - 2) : 1.0 / u;
    const double second = -n * b * b * (1.0 - a) * u_nm2 * ((n - 1) + a * (n + 1) * c) / (d * d * d);
    return {first, second};
}

inline Derivatives phi2_of_y_derivatives(const Params& p, double y) {
    detail::require_unit(y, "y");
    const double a = p.a();
    const double d = 1.0 - a * y;
    return {(1.0 - a) / (p.b() * d * d), 2.0 * a * (1.0 - a) / (p.b() * d * d * d)};
}

/// Critical infection probability (1 - a) / sqrt(n).
inline double threshold(double a, int n) {
    if (!(a > 0.0 && a < 1.0)) {
        throw std::invalid_argument("threshold: a must lie in (0, 1)");
    }
    if (n < 1) {
        throw std::invalid_argument("threshold: n must be >= 1");
    }
    return (1.0 - a) / std::sqrt(static_cast<double>(n));
}

/// Exact comparison of b with the computed threshold; Critical is measure zero.
inline Regime classify_regime(const StarParams& sp) {
    const double t = threshold(sp.a(), sp.n());
    if (sp.b() < t) {
        return Regime::Subcritical;
    }
    if (sp.b() == t) {
        return Regime::Critical;
    }
    return Regime::Supercritical;
}

struct FixedPointReport {
    State2 trivial{};
    std::optional<State2> nontrivial;
    Regime regime = Regime::Subcritical;
    double residual = 0.0;
};

struct SolverOptions {
    int scan_points = 1000;
    double bisection_tol = 1e-14;
    int max_bisection_steps = 400;
    int polish_steps = 5;
    double residual_tol = 1e-12;
};

namespace detail {

/// Newton step on G(s) = F(s) - s. Used only to polish a bracketed root.
inline State2 newton_step(const StarParams& sp, const State2& s) {
    const double a = sp.a();
    const double b = sp.b();
    const int n = sp.n();
    const double u = 1.0 - b * s.y;
    const double un1 = ipow(u, n - 1);
    const double j11 = a * un1 * u - 1.0;
    const double j12 = n * b * (1.0 - a * s.x) * un1;
    const double j21 = b * (1.0 - a * s.y);
    const double j22 = a * (1.0 - b * s.x) - 1.0;
    const State2 f = apply_F(sp, s);
    const double g1 = f.x - s.x;
    const double g2 = f.y - s.y;
    const double det = j11 * j22 - j12 * j21;
    if (det == 0.0) {
        return s;
    }
    const double dx = (g1 * j22 - g2 * j12) / det;
    const double dy = (j11 * g2 - j21 * g1) / det;
    return {std::clamp(s.x - dx, 0.0, 1.0), std::clamp(s.y - dy, 0.0, 1.0)};
}

}  // namespace detail

/// Reports the trivial fixed point and, above threshold, the unique nontrivial
/// one.
///
/// The nontrivial point is the root of h(y) = phi1(y) - phi2_of_y(y) on the
/// part of [0, 1] where phi2_of_y stays in the square. h is positive just
/// above the origin and negative at the domain end, with a single sign
/// change, so a grid scan followed by bisection always brackets it. The
/// bracketed point is then polished with a few Newton steps on F(s) - s.
inline FixedPointReport solve_fixed_points(const StarParams& sp, const SolverOptions& opt = {}) {
    FixedPointReport report;
    report.regime = classify_regime(sp);
    if (report.regime != Regime::Supercritical) {
        return report;
    }

    const Params& p = sp.params();
    const double y_end = phi2_of_y_domain_end(p);
    const auto h = [&](double y) { return phi1(sp, y) - detail::phi2_of_y_capped(p, y); };

    // First grid point where h turns negative; the previous one is positive.
    double lo = 0.0;
    double hi = y_end;
    for (int k = 1; k <= opt.scan_points; ++k) {
        const double y = y_end * k / opt.scan_points;
        if (h(y) < 0.0) {
            hi = y;
            break;
        }
        lo = y;
    }
    // The positive lobe can be narrower than one grid cell near threshold.
    if (lo == 0.0) {
        lo = hi;
        int halvings = 0;
        while (!(h(lo) > 0.0)) {
            hi = lo;
            lo *= 0.5;
            if (++halvings > 1100) {
                throw SolverError("solve_fixed_points: no positive bracket end found");
            }
        }
    }

    for (int step = 0; step < opt.max_bisection_steps; ++step) {
        if (hi - lo <= opt.bisection_tol * hi) {
            break;
        }
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        (h(mid) > 0.0 ? lo : hi) = mid;
    }

    const double y = 0.5 * (lo + hi);
    State2 best{phi1(sp, y), y};
    double best_res = fixed_point_residual(sp, best);
    State2 cur = best;
    for (int k = 0; k < opt.polish_steps; ++k) {
        cur = detail::newton_step(sp, cur);
        // Near threshold a Newton step can fall into the trivial root.
        if (!(std::abs(cur.y - y) <= 0.5 * y && std::abs(cur.x - best.x) <= 0.5 * best.x)) {
            break;
        }
        const double res = fixed_point_residual(sp, cur);
        if (res < best_res) {
            best = cur;
            best_res = res;
        }
    }
    if (!(best_res <= opt.residual_tol)) {
        throw SolverError("solve_fixed_points: residual " + std::to_string(best_res) + " above tolerance");
    }
    // x is allowed to round to 1: with many spokes and b near 1 the exact hub
    // value is within half an ulp of 1.
    if (!(best.x > 0.0 && best.x <= 1.0 && best.y > 0.0 && best.y < 1.0)) {
        throw SolverError("solve_fixed_points: nontrivial point left the open unit square");
    }
    report.nontrivial = best;
    report.residual = best_res;
    return report;
}

}  // namespace starsis
