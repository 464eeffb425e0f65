#pragma once

// Reduced dynamics of multilevel stars: one probability per level.
//
// With counts [n_1, ..., n_{l-1}] and state s_1..s_l (s_1 the hub):
//   level 1     : 1 - (1 - a s_1) (1 - b s_2)^{n_1}
//   level k     : 1 - (1 - a s_k) (1 - b s_{k-1}) (1 - b s_{k+1})^{n_k}
//   level l     : 1 - (1 - a s_l) (1 - b s_{l-1})
// Every level-k node has one parent and n_k children, so this is the per-node
// update applied to a level-homogeneous state.

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "starsis/params.hpp"
#include "starsis/reduced_map.hpp"

namespace starsis {

using StateL = std::vector<double>;

class LevelParams {
public:
    LevelParams(Params params, std::vector<int> counts) : params_(params), counts_(std::move(counts)) {
        if (counts_.empty()) {
            throw std::invalid_argument("LevelParams: need at least one spoke count");
        }
        for (int c : counts_) {
            if (c < 1) {
                throw std::invalid_argument("LevelParams: every spoke count must be >= 1");
            }
        }
    }

    [[nodiscard]] const Params& params() const noexcept { return params_; }
    [[nodiscard]] double a() const noexcept { return params_.a(); }
    [[nodiscard]] double b() const noexcept { return params_.b(); }
    [[nodiscard]] std::span<const int> counts() const noexcept { return counts_; }
    [[nodiscard]] std::size_t levels() const noexcept { return counts_.size() + 1; }
    [[nodiscard]] int total_spokes() const noexcept { return std::accumulate(counts_.begin(), counts_.end(), 0); }

private:
    Params params_;
    std::vector<int> counts_;
};

inline StateL apply_F_multilevel(const LevelParams& lp, std::span<const double> s) {
    const std::size_t l = lp.levels();
    if (s.size() != l) {
        throw std::invalid_argument("apply_F_multilevel: state has " + std::to_string(s.size()) + " levels, expected " +
                                    std::to_string(l));
    }
    for (double v : s) {
        detail::require_unit(v, "level probability");
    }
    const double a = lp.a();
    const double b = lp.b();
    const auto counts = lp.counts();
    StateL next(l);
    for (std::size_t k = 0; k < l; ++k) {
        double survive = 1.0 - a * s[k];
        if (k > 0) {
            survive *= 1.0 - b * s[k - 1];
        }
        if (k + 1 < l) {
            survive *= detail::ipow(1.0 - b * s[k + 1], counts[k]);
        }
        next[k] = 1.0 - survive;
    }
    return next;
}

inline double sup_distance(std::span<const double> p, std::span<const double> q) {
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        d = std::max(d, std::abs(p[i] - q[i]));
    }
    return d;
}

/// (1 - a) / sqrt(n1 + n2).
inline double threshold_3level(double a, int n1, int n2) {
    if (n1 < 1 || n2 < 1) {
        throw std::invalid_argument("threshold_3level: n1 and n2 must be >= 1 (use threshold for two levels)");
    }
    return threshold(a, n1 + n2);
}

/// Threshold predicted for any number of levels: (1 - a) / sqrt(n_1 + ... + n_{l-1}).
inline double conjectured_threshold(double a, std::span<const int> counts) {
    int total = 0;
    for (int c : counts) {
        if (c < 1) {
            throw std::invalid_argument("conjectured_threshold: counts must be >= 1");
        }
        total += c;
    }
    if (total == 0) {
        throw std::invalid_argument("conjectured_threshold: counts must be non-empty");
    }
    return threshold(a, total);
}

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

struct Surfaces3 {
    /// Hub partial fixed point: (1 - (1-by)^{n1}) / (1 - a (1-by)^{n1}).
    double phi1 = 0.0;
    /// Residual y - (1 - c) / (1 - a y c), c = (1-bx)(1-bz)^{n2}, of the
    /// literal level-2 relation. It has y on both sides, so only the
    /// residual is meaningful.
    double phi2_implicit_residual = 0.0;
    /// The level-2 partial fixed point solved for y: (1 - c) / (1 - a c).
    double phi2_solved = 0.0;
    /// Outer partial fixed point: b y / (1 - a + a b y).
    double phi3 = 0.0;
};

namespace detail {

inline void require_three_levels(const LevelParams& lp, const char* who) {
    if (lp.levels() != 3) {
        throw std::invalid_argument(std::string(who) + ": requires exactly three levels");
    }
}

}  // namespace detail

inline Surfaces3 surfaces_3level(const LevelParams& lp, const Point3& pt) {
    detail::require_three_levels(lp, "surfaces_3level");
    detail::require_unit(pt.x, "x");
    detail::require_unit(pt.y, "y");
    detail::require_unit(pt.z, "z");
    const double a = lp.a();
    const double b = lp.b();
    const int n1 = lp.counts()[0];
    const int n2 = lp.counts()[1];
    Surfaces3 out;
    const double c1 = detail::ipow(1.0 - b * pt.y, n1);
    out.phi1 = (1.0 - c1) / (1.0 - a * c1);
    const double c2 = (1.0 - b * pt.x) * detail::ipow(1.0 - b * pt.z, n2);
    out.phi2_implicit_residual = pt.y - (1.0 - c2) / (1.0 - a * pt.y * c2);
    out.phi2_solved = (1.0 - c2) / (1.0 - a * c2);
    out.phi3 = b * pt.y / (1.0 - a + a * b * pt.y);
    return out;
}

/// Level-2 curve after eliminating z through phi3:
///   x(y) = (y - 1) / (b (1 - a y) (1 - b^2 y / (1 - a + a b y))^{n2}) + 1 / b.
inline double reduced_curve_3level(const LevelParams& lp, double y) {
    detail::require_three_levels(lp, "reduced_curve_3level");
    detail::require_unit(y, "y");
    const double a = lp.a();
    const double b = lp.b();
    const int n2 = lp.counts()[1];
    const double inner = 1.0 - b * b * y / (1.0 - a + a * b * y);
    return (y - 1.0) / (b * (1.0 - a * y) * detail::ipow(inner, n2)) + 1.0 / b;
}

struct CurveSlopes {
    double phi1 = 0.0;
    double phi2 = 0.0;
};

/// Slopes at the origin of phi1 and the reduced level-2 curve:
/// b n1 / (1 - a) and ((1 - a)^2 - b^2 n2) / (b (1 - a)).
inline CurveSlopes curve_slopes_at_origin_3level(const LevelParams& lp) {
    detail::require_three_levels(lp, "curve_slopes_at_origin_3level");
    const double a = lp.a();
    const double b = lp.b();
    const int n1 = lp.counts()[0];
    const int n2 = lp.counts()[1];
    return {b * n1 / (1.0 - a), ((1.0 - a) * (1.0 - a) - b * b * n2) / (b * (1.0 - a))};
}

struct MultilevelSolveOptions {
    double tol = 1e-12;
    /// Limits with sup-norm at or below this count as the trivial point.
    double detection = 1e-6;
    long max_iters = 10'000'000;
};

/// Largest fixed point, found by iterating from the all-ones state.
///
/// The map is componentwise monotone, so iterates from the top element
/// decrease to the largest fixed point. Returns nothing when that limit is
/// within `detection` of zero. Because iterates only decrease, the search
/// stops as soon as the sup-norm falls to `detection`.
inline std::optional<StateL> solve_fixed_point_multilevel(const LevelParams& lp,
                                                          const MultilevelSolveOptions& opt = {}) {
    StateL cur(lp.levels(), 1.0);
    for (long it = 0; it < opt.max_iters; ++it) {
        StateL next = apply_F_multilevel(lp, cur);
        const double step = sup_distance(next, cur);
        cur = std::move(next);
        const double size = *std::max_element(cur.begin(), cur.end());
        if (size <= opt.detection) {
            return std::nullopt;
        }
        if (step < opt.tol) {
            return cur;
        }
    }
    throw SolverError("solve_fixed_point_multilevel: no convergence after " + std::to_string(opt.max_iters) +
                      " iterations");
}

struct EmpiricalThresholdOptions {
    double width = 1e-4;
    MultilevelSolveOptions solve{};
};

/// Bisects b over (0, 1) on whether solve_fixed_point_multilevel finds a
/// nontrivial point and returns the midpoint of the final bracket.
///
/// The bracket is probed off the dyadic grid so that no probe lands exactly on
/// a rational threshold such as 0.25, where convergence is only algebraic.
inline double empirical_threshold(double a, std::span<const int> counts, const EmpiricalThresholdOptions& opt = {}) {
    const std::vector<int> cs(counts.begin(), counts.end());
    const auto persists = [&](double b) {
        return solve_fixed_point_multilevel(LevelParams{Params{a, b}, cs}, opt.solve).has_value();
    };
    double lo = 1e-6;
    double hi = 1.0 - 1e-6;
    if (persists(lo) || !persists(hi)) {
        throw std::invalid_argument("empirical_threshold: predicate does not change sign over (0, 1)");
    }
    // Split at an irrational fraction instead of the midpoint.
    constexpr double kSplit = 0.5 - 1.0 / 3.0 / 3.14159265358979;
    bool flip = false;
    while (hi - lo > opt.width) {
        const double frac = flip ? 1.0 - kSplit : kSplit;
        flip = !flip;
        const double mid = lo + frac * (hi - lo);
        (persists(mid) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

inline double empirical_threshold(double a, std::initializer_list<int> counts,
                                  const EmpiricalThresholdOptions& opt = {}) {
    return empirical_threshold(a, std::span<const int>(counts.begin(), counts.size()), opt);
}

}  // namespace starsis
