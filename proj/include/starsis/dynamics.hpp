#pragma once

// Trajectories of the reduced star map, the four-region partition of the unit
// square cut out by phi1 and phi2, rectangle envelopes and the empirical
// flip/non-flip classifier for Regions II and IV.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <future>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "starsis/params.hpp"
#include "starsis/reduced_map.hpp"

namespace starsis {

enum class Region { I, II, III, IV, OnPhi1, OnPhi2, Origin };

inline const char* to_string(Region r) noexcept {
    switch (r) {
    case Region::I: return "I";
    case Region::II: return "II";
    case Region::III: return "III";
    case Region::IV: return "IV";
    case Region::OnPhi1: return "OnPhi1";
    case Region::OnPhi2: return "OnPhi2";
    case Region::Origin: return "Origin";
    }
    return "?";
}

/// Distance below which a point counts as lying on a curve.
inline constexpr double kCurveTolerance = 1e-12;

/// Region I: left of phi1 and below phi2 (x < phi1(y), y < phi2(x)).
/// Region III: both inequalities reversed. Region II: x > phi1(y), y < phi2(x).
/// Region IV: x < phi1(y), y > phi2(x). Ties go to OnPhi1 before OnPhi2.
inline Region classify_region(const StarParams& sp, const State2& s) {
    detail::require_unit(s);
    if (s.x == 0.0 && s.y == 0.0) {
        return Region::Origin;
    }
    const double d1 = s.x - phi1(sp, s.y);
    const double d2 = s.y - phi2_of_x(sp.params(), s.x);
    if (std::abs(d1) <= kCurveTolerance) {
        return Region::OnPhi1;
    }
    if (std::abs(d2) <= kCurveTolerance) {
        return Region::OnPhi2;
    }
    if (d1 < 0.0) {
        return d2 < 0.0 ? Region::I : Region::IV;
    }
    return d2 > 0.0 ? Region::III : Region::II;
}

enum class LimitKind { Trivial, Nontrivial, Unresolved };

inline const char* to_string(LimitKind k) noexcept {
    switch (k) {
    case LimitKind::Trivial: return "Trivial";
    case LimitKind::Nontrivial: return "Nontrivial";
    case LimitKind::Unresolved: return "Unresolved";
    }
    return "?";
}

struct Trajectory {
    std::vector<State2> points;
    std::optional<State2> converged_to;
    long iterations_used = 0;
    LimitKind limit_kind = LimitKind::Unresolved;
};

struct IterateOptions {
    long max_iters = 1'000'000;
    double tol = 1e-10;
    bool record_points = true;
};

/// Iterates F until both the step and the residual |F(s) - s| drop below tol,
/// then names the limit after the closest reported fixed point.
///
/// A limit matches a fixed point when it is within 10 tol, or within the
/// a-posteriori estimate 2 (residual + solver residual) / (1 - q) where q is the
/// observed ratio of the last two steps. The second test matters near
/// threshold, where q is close to 1 and a small step does not mean a small
/// distance.
inline Trajectory iterate(const StarParams& sp, const State2& s0, const IterateOptions& opt = {}) {
    detail::require_unit(s0);
    if (opt.max_iters < 1 || !(opt.tol > 0.0)) {
        throw std::invalid_argument("iterate: max_iters and tol must be positive");
    }
    Trajectory traj;
    if (opt.record_points) {
        traj.points.push_back(s0);
    }
    State2 cur = s0;
    double prev_step = 0.0;
    double step = 0.0;
    bool converged = false;
    for (long it = 0; it < opt.max_iters; ++it) {
        const State2 next = apply_F(sp, cur);
        prev_step = step;
        step = sup_distance(next, cur);
        cur = next;
        ++traj.iterations_used;
        if (opt.record_points) {
            traj.points.push_back(cur);
        }
        if (step < opt.tol && fixed_point_residual(sp, cur) < opt.tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        return traj;
    }

    const auto report = solve_fixed_points(sp);
    double reach = 10.0 * opt.tol;
    if (prev_step > 0.0 && step < prev_step) {
        // Both the limit and the solver's point are only known up to their
        // residuals, each magnified by 1 / (1 - q). The estimate is asymptotic,
        // not a bound, hence the factor 2.
        const double q = step / prev_step;
        reach = std::max(reach, 2.0 * (fixed_point_residual(sp, cur) + report.residual) / (1.0 - q));
    }
    if (sup_distance(cur, report.trivial) < reach) {
        traj.limit_kind = LimitKind::Trivial;
    } else if (report.nontrivial && sup_distance(cur, *report.nontrivial) < reach) {
        traj.limit_kind = LimitKind::Nontrivial;
    }
    if (traj.limit_kind != LimitKind::Unresolved) {
        traj.converged_to = cur;
    }
    return traj;
}

enum class StepDirection { IncreasedBoth, DecreasedBoth, Mixed };

inline const char* to_string(StepDirection d) noexcept {
    switch (d) {
    case StepDirection::IncreasedBoth: return "IncreasedBoth";
    case StepDirection::DecreasedBoth: return "DecreasedBoth";
    case StepDirection::Mixed: return "Mixed";
    }
    return "?";
}

/// Direction of one step of F from a point strictly inside Region I or III.
inline StepDirection region_step_monotonicity_check(const StarParams& sp, const State2& s) {
    const Region r = classify_region(sp, s);
    if (r != Region::I && r != Region::III) {
        throw std::invalid_argument(std::string("region_step_monotonicity_check: point is in region ") +
                                    to_string(r) + ", need I or III");
    }
    const State2 next = apply_F(sp, s);
    if (next.x > s.x && next.y > s.y) {
        return StepDirection::IncreasedBoth;
    }
    if (next.x < s.x && next.y < s.y) {
        return StepDirection::DecreasedBoth;
    }
    return StepDirection::Mixed;
}

namespace detail {

inline const State2& require_nontrivial(const FixedPointReport& report, const char* who) {
    if (!report.nontrivial) {
        throw std::invalid_argument(std::string(who) + ": requires the supercritical regime");
    }
    return *report.nontrivial;
}

/// Iterates until within tol (sup-norm) of target. Sets limit_kind to
/// Nontrivial on success.
inline Trajectory iterate_toward(const StarParams& sp, const State2& s0, const State2& target, double tol,
                                 long max_iters, bool record) {
    Trajectory traj;
    if (record) {
        traj.points.push_back(s0);
    }
    State2 cur = s0;
    while (sup_distance(cur, target) > tol) {
        if (traj.iterations_used >= max_iters) {
            return traj;
        }
        cur = apply_F(sp, cur);
        ++traj.iterations_used;
        if (record) {
            traj.points.push_back(cur);
        }
    }
    traj.converged_to = cur;
    traj.limit_kind = LimitKind::Nontrivial;
    return traj;
}

}  // namespace detail

/// Axis-aligned rectangle [lower, upper] in the unit square.
class Envelope {
public:
    Envelope(State2 lower, State2 upper) : lower_(lower), upper_(upper) {
        detail::require_unit(lower);
        detail::require_unit(upper);
        if (!componentwise_le(lower, upper)) {
            throw std::invalid_argument("Envelope: lower corner must not exceed upper corner");
        }
    }

    [[nodiscard]] const State2& lower() const noexcept { return lower_; }
    [[nodiscard]] const State2& upper() const noexcept { return upper_; }
    [[nodiscard]] bool contains(const State2& s) const noexcept {
        return componentwise_le(lower_, s) && componentwise_le(s, upper_);
    }

private:
    State2 lower_;
    State2 upper_;
};

struct EnvelopeResult {
    Trajectory lower;
    Trajectory upper;
    bool certified = false;
};

/// Smallest admissible lower-corner coordinate; the origin repels above
/// threshold and corners too close to it take arbitrarily long.
inline constexpr double kMinLowerCorner = 1e-6;

/// Iterates both corners of a rectangle whose lower corner lies in Region I
/// and upper corner in Region III. F is monotone, so every point of the
/// rectangle stays between the corner iterates; once both corners are within
/// tol of the fixed point the whole rectangle is.
inline EnvelopeResult envelope_iterate(const StarParams& sp, const Envelope& env, long max_iters = 1'000'000,
                                       double tol = 1e-10) {
    const auto report = solve_fixed_points(sp);
    const State2& fp = detail::require_nontrivial(report, "envelope_iterate");
    const bool lower_at_fp = sup_distance(env.lower(), fp) <= tol;
    const bool upper_at_fp = sup_distance(env.upper(), fp) <= tol;
    if (!lower_at_fp) {
        if (env.lower().x < kMinLowerCorner || env.lower().y < kMinLowerCorner) {
            throw std::invalid_argument("envelope_iterate: lower corner too close to the origin");
        }
        if (classify_region(sp, env.lower()) != Region::I) {
            throw std::invalid_argument("envelope_iterate: lower corner not in Region I");
        }
    }
    if (!upper_at_fp && classify_region(sp, env.upper()) != Region::III) {
        throw std::invalid_argument("envelope_iterate: upper corner not in Region III");
    }
    EnvelopeResult result;
    result.lower = detail::iterate_toward(sp, env.lower(), fp, tol, max_iters, true);
    result.upper = detail::iterate_toward(sp, env.upper(), fp, tol, max_iters, true);
    result.certified =
        result.lower.limit_kind == LimitKind::Nontrivial && result.upper.limit_kind == LimitKind::Nontrivial;
    return result;
}

/// Number of applications of F until s is within tol of the nontrivial fixed
/// point. Throws SolverError when the cap is reached.
inline long convergence_time(const StarParams& sp, const State2& s, double tol, long max_iters = 1'000'000) {
    detail::require_unit(s);
    if (s.x == 0.0 && s.y == 0.0) {
        throw std::invalid_argument("convergence_time: start must not be the origin");
    }
    const auto report = solve_fixed_points(sp);
    const State2& fp = detail::require_nontrivial(report, "convergence_time");
    const auto traj = detail::iterate_toward(sp, s, fp, tol, max_iters, false);
    if (traj.limit_kind != LimitKind::Nontrivial) {
        throw SolverError("convergence_time: not within tol after " + std::to_string(max_iters) + " iterations");
    }
    return traj.iterations_used;
}

// ---------------------------------------------------------------------------
// Flip classifier

enum class FlipLabel { Flipping, NonFlipping, Inconsistent };

inline const char* to_string(FlipLabel l) noexcept {
    switch (l) {
    case FlipLabel::Flipping: return "Flipping";
    case FlipLabel::NonFlipping: return "NonFlipping";
    case FlipLabel::Inconsistent: return "Inconsistent";
    }
    return "?";
}

/// Image-region counts for samples drawn from one source region.
/// Index order: I, II, III, IV, curve (OnPhi1/OnPhi2/Origin).
struct TransitionTally {
    std::array<long, 5> to{};
    long total = 0;

    [[nodiscard]] long count(Region r) const noexcept { return to[slot(r)]; }

    static std::size_t slot(Region r) noexcept {
        switch (r) {
        case Region::I: return 0;
        case Region::II: return 1;
        case Region::III: return 2;
        case Region::IV: return 3;
        default: return 4;
        }
    }
};

struct FlipReport {
    FlipLabel label = FlipLabel::Inconsistent;
    TransitionTally from_ii;
    TransitionTally from_iv;
    long candidates_drawn = 0;
    std::optional<State2> first_ii_to_ii;
    std::optional<State2> first_iv_to_iv;
    std::optional<State2> first_ii_to_iv;
    std::optional<State2> first_iv_to_ii;
};

/// Halton sequence value for index i in the given prime base.
inline double halton(std::uint64_t i, std::uint32_t base) noexcept {
    double f = 1.0;
    double r = 0.0;
    while (i > 0) {
        f /= base;
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

struct FlipOptions {
    /// Offset into the (2, 3) Halton sequence; equal seeds give equal labels.
    std::uint64_t seed = 0;
    /// Candidates drawn per requested sample before giving up.
    long budget_factor = 200;
    int workers = 1;
};

/// Samples `samples` points strictly inside Region II and as many inside
/// Region IV, maps each once under F and tallies where the images land.
///
/// Flipping: no II image stays in II, no IV image stays in IV, and at least
/// one II<->IV exchange occurs. NonFlipping: no II image lands in IV and no IV
/// image lands in II. Anything else is Inconsistent. Raw tallies are kept so
/// either reading of the two behaviours can be applied by the caller.
inline FlipReport flip_classifier(const StarParams& sp, long samples, const FlipOptions& opt = {}) {
    if (samples < 1) {
        throw std::invalid_argument("flip_classifier: samples must be positive");
    }
    if (classify_regime(sp) != Regime::Supercritical) {
        throw std::invalid_argument("flip_classifier: requires the supercritical regime");
    }

    FlipReport report;
    std::vector<State2> in_ii;
    std::vector<State2> in_iv;
    const long budget = samples * opt.budget_factor;
    std::uint64_t index = opt.seed + 1;
    while ((static_cast<long>(in_ii.size()) < samples || static_cast<long>(in_iv.size()) < samples) &&
           report.candidates_drawn < budget) {
        const State2 s{halton(index, 2), halton(index, 3)};
        ++index;
        ++report.candidates_drawn;
        const Region r = classify_region(sp, s);
        if (r == Region::II && static_cast<long>(in_ii.size()) < samples) {
            in_ii.push_back(s);
        } else if (r == Region::IV && static_cast<long>(in_iv.size()) < samples) {
            in_iv.push_back(s);
        }
    }
    if (static_cast<long>(in_ii.size()) < samples || static_cast<long>(in_iv.size()) < samples) {
        throw std::runtime_error("flip_classifier: too few samples found in Region II or IV (" +
                                 std::to_string(in_ii.size()) + ", " + std::to_string(in_iv.size()) + ")");
    }

    // Image regions are computed in contiguous chunks and merged in order.
    const auto image_regions = [&sp](const std::vector<State2>& pts, int workers) {
        std::vector<Region> out(pts.size());
        const auto chunk = [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                out[i] = classify_region(sp, apply_F(sp, pts[i]));
            }
        };
        const auto w = static_cast<std::size_t>(std::max(1, workers));
        std::vector<std::future<void>> jobs;
        const std::size_t step = (pts.size() + w - 1) / w;
        for (std::size_t begin = 0; begin < pts.size(); begin += step) {
            jobs.push_back(std::async(w > 1 ? std::launch::async : std::launch::deferred, chunk, begin,
                                      std::min(pts.size(), begin + step)));
        }
        for (auto& j : jobs) {
            j.get();
        }
        return out;
    };

    const auto ii_images = image_regions(in_ii, opt.workers);
    const auto iv_images = image_regions(in_iv, opt.workers);
    for (std::size_t i = 0; i < in_ii.size(); ++i) {
        ++report.from_ii.to[TransitionTally::slot(ii_images[i])];
        ++report.from_ii.total;
        if (ii_images[i] == Region::II && !report.first_ii_to_ii) {
            report.first_ii_to_ii = in_ii[i];
        }
        if (ii_images[i] == Region::IV && !report.first_ii_to_iv) {
            report.first_ii_to_iv = in_ii[i];
        }
    }
    for (std::size_t i = 0; i < in_iv.size(); ++i) {
        ++report.from_iv.to[TransitionTally::slot(iv_images[i])];
        ++report.from_iv.total;
        if (iv_images[i] == Region::IV && !report.first_iv_to_iv) {
            report.first_iv_to_iv = in_iv[i];
        }
        if (iv_images[i] == Region::II && !report.first_iv_to_ii) {
            report.first_iv_to_ii = in_iv[i];
        }
    }

    const long ii_stay = report.from_ii.count(Region::II);
    const long iv_stay = report.from_iv.count(Region::IV);
    const long ii_to_iv = report.from_ii.count(Region::IV);
    const long iv_to_ii = report.from_iv.count(Region::II);
    if (ii_stay == 0 && iv_stay == 0 && ii_to_iv + iv_to_ii > 0) {
        report.label = FlipLabel::Flipping;
    } else if (ii_to_iv == 0 && iv_to_ii == 0) {
        report.label = FlipLabel::NonFlipping;
    } else {
        report.label = FlipLabel::Inconsistent;
    }
    return report;
}

}  // namespace starsis
