// Acceptance checks for the starsis library. Prints one PASS/FAIL line per
// criterion plus indented detail lines.
//
// Usage: starsis_acceptance [--expect-fail i,j,...]
//
// Exit status is 0 when the set of failing criteria equals the expected set
// (empty by default), 1 otherwise. A criterion that exceeds its time budget
// counts as failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "starsis/starsis.hpp"
#include "support/oracles.hpp"

namespace {

using namespace starsis;

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void fail_if(bool bad, const std::string& why) {
        if (bad) {
            pass = false;
            notes.push_back("violation: " + why);
        }
    }
    void note(const std::string& s) { notes.push_back(s); }
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

// ---------------------------------------------------------------------------

Outcome threshold_dichotomy() {
    Outcome o;
    oracle::Rng rng(101);
    long runs = 0;
    long sub = 0;
    long sup = 0;
    double worst = 0.0;
    long max_iters_seen = 0;
    for (int n : {2, 3, 4, 8}) {
        for (int i = 0; i < 20; ++i) {
            for (int j = 0; j < 20; ++j) {
                const StarParams sp{(i + 0.5) / 20, (j + 0.5) / 20, n};
                const auto report = solve_fixed_points(sp);
                const State2 target = report.nontrivial.value_or(State2{});
                for (int s = 0; s < 5; ++s) {
                    const State2 s0{rng.uniform(1e-3, 1.0), rng.uniform(1e-3, 1.0)};
                    IterateOptions io;
                    io.tol = 1e-12;
                    io.record_points = false;
                    const auto t = iterate(sp, s0, io);
                    ++runs;
                    max_iters_seen = std::max(max_iters_seen, t.iterations_used);
                    const bool want_trivial = !report.nontrivial.has_value();
                    (want_trivial ? sub : sup) += 1;
                    if (!t.converged_to) {
                        o.fail_if(true, "unresolved run at a=" + num(sp.a()) + " b=" + num(sp.b()) +
                                            " n=" + std::to_string(n));
                        continue;
                    }
                    const double d = sup_distance(*t.converged_to, target);
                    worst = std::max(worst, d);
                    o.fail_if(d > 1e-8 || (t.limit_kind == LimitKind::Trivial) != want_trivial,
                              "wrong limit at a=" + num(sp.a()) + " b=" + num(sp.b()) + " n=" + std::to_string(n));
                }
            }
        }
    }
    o.note(std::to_string(runs) + " runs (" + std::to_string(sub) + " subcritical, " + std::to_string(sup) +
           " supercritical), worst sup distance " + num(worst) + ", most iterations " +
           std::to_string(max_iters_seen));
    return o;
}

Outcome reduction_equivalence() {
    Outcome o;
    double worst = 0.0;
    const std::vector<Params> params{{0.5, 0.5}, {0.2, 0.9}, {0.9, 0.05}, {0.7, 0.3}};
    for (int n : {1, 2, 4, 8}) {
        const auto g = build_star(n);
        for (const auto& p : params) {
            const StarParams sp{p, n};
            State2 reduced{0.8, 0.3};
            std::vector<double> init(static_cast<std::size_t>(n) + 1, reduced.y);
            init[0] = reduced.x;
            FullState full(init);
            for (int t = 0; t < 1000; ++t) {
                full = step_full(g, p, full);
                reduced = apply_F(sp, reduced);
                for (int i = 0; i <= n; ++i) {
                    const double d = std::abs(full[static_cast<std::size_t>(i)] - (i == 0 ? reduced.x : reduced.y));
                    worst = std::max(worst, d);
                }
            }
        }
    }
    for (const std::vector<int>& counts : {std::vector<int>{2, 2}, std::vector<int>{3, 2}}) {
        for (const auto& p : params) {
            const LevelParams lp{p, counts};
            const auto g = build_multilevel_star(counts);
            const auto sizes = level_sizes(counts);
            const auto offsets = level_offsets(counts);
            StateL reduced{0.9, 0.4, 0.1};
            std::vector<double> init;
            for (std::size_t k = 0; k < sizes.size(); ++k) {
                init.insert(init.end(), sizes[k], reduced[k]);
            }
            FullState full(init);
            for (int t = 0; t < 1000; ++t) {
                full = step_full(g, p, full);
                reduced = apply_F_multilevel(lp, reduced);
                for (std::size_t k = 0; k < sizes.size(); ++k) {
                    for (std::size_t i = 0; i < sizes[k]; ++i) {
                        worst = std::max(worst, std::abs(full[offsets[k] + i] - reduced[k]));
                    }
                }
            }
        }
    }
    o.fail_if(worst > 1e-12, "per-step discrepancy " + num(worst));
    o.note("worst per-step discrepancy " + num(worst));
    return o;
}

// The criterion factor is (1 - b p0) / (1 + delta (1 - b p0)), delta = 1 - a.
// Under the explicit update every spoke sees the same hub value, so the spread
// ratio is a (1 - b p0) instead. Both are measured; only that one is
// the criterion.
Outcome spoke_homogenization() {
    Outcome o;
    oracle::Rng rng(303);
    double worst_implicit = 0.0;
    double worst_explicit = 0.0;
    long steps = 0;
    bool decays = true;
    for (int c = 0; c < 100; ++c) {
        const Params p{rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)};
        const int n = rng.integer(2, 8);
        const auto g = build_star(n);
        std::vector<double> init(static_cast<std::size_t>(n) + 1);
        for (auto& v : init) {
            v = rng.uniform(0, 1);
        }
        FullState s(init);
        double spread = spoke_spread(g, s);
        // Ten steps keep the spread well above rounding, so the ratio is
        // resolved to about 1e-13.
        for (int t = 0; t < 10 && spread > 1e-3; ++t) {
            const double hub = s[0];
            s = step_full(g, p, s);
            const double next = spoke_spread(g, s);
            const double ratio = next / spread;
            const double u = 1.0 - p.b() * hub;
            const double implicit = u / (1.0 + (1.0 - p.a()) * u);
            worst_implicit = std::max(worst_implicit, std::abs(ratio - implicit));
            worst_explicit = std::max(worst_explicit, std::abs(ratio - spoke_spread_factor(p, hub)));
            decays = decays && next < spread;
            spread = next;
            ++steps;
        }
    }
    o.fail_if(!decays, "spread did not decrease");
    o.fail_if(worst_implicit > 1e-12, "ratio vs implicit-update factor differs by up to " + num(worst_implicit));
    o.note(std::to_string(steps) + " steps over 100 cases; spread decreasing: " + (decays ? "yes" : "no"));
    o.note("info: ratio vs a(1 - b p0) of the explicit update differs by at most " + num(worst_explicit));
    return o;
}

Outcome fixed_point_correctness() {
    Outcome o;
    oracle::Rng rng(404);
    double worst1 = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto d = rng.supercritical(1, 1, 0.01);
        const auto fp = solve_fixed_points(StarParams{d.a, d.b, 1}).nontrivial.value();
        const double exact = (d.a + d.b - 1.0) / (d.a * d.b);
        worst1 = std::max({worst1, std::abs(fp.x - exact), std::abs(fp.y - exact)});
    }
    o.fail_if(worst1 > 1e-12, "n=1 closed form off by " + num(worst1));
    double worst2 = 0.0;
    int points = 0;
    for (int i = 1; i <= 50; ++i) {
        for (int j = 1; j <= 50; ++j) {
            const Params p{i / 51.0, j / 51.0};
            if (!(p.b() > threshold(p.a(), 2))) {
                continue;
            }
            const auto fp = solve_fixed_points(StarParams{p, 2}).nontrivial.value();
            worst2 = std::max(worst2, std::abs(xf_closed_form_n2(p) - fp.x));
            ++points;
        }
    }
    o.fail_if(worst2 > 1e-9, "n=2 closed form off by " + num(worst2));
    o.note("n=1: worst " + num(worst1) + "; n=2: " + std::to_string(points) + " grid points, worst " + num(worst2));
    return o;
}

/// Rejection sample of a point in `want` inside [lo, hi].
std::optional<State2> sample_region(oracle::Rng& rng, const StarParams& sp, Region want, State2 lo, State2 hi) {
    for (int k = 0; k < 100000; ++k) {
        const State2 s{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y)};
        if (classify_region(sp, s) == want) {
            return s;
        }
    }
    return std::nullopt;
}

Outcome region_invariance() {
    Outcome o;
    oracle::Rng rng(505);
    long checked_i = 0;
    long checked_iii = 0;
    for (int c = 0; c < 20; ++c) {
        const auto d = rng.supercritical(1, 8, 0.02);
        const StarParams sp{d.a, d.b, d.n};
        const State2 fp = solve_fixed_points(sp).nontrivial.value();
        for (int k = 0; k < 50; ++k) {
            if (const auto s = sample_region(rng, sp, Region::I, {0, 0}, fp)) {
                const State2 f = apply_F(sp, *s);
                o.fail_if(!(f.x > s->x && f.y > s->y) || classify_region(sp, f) != Region::I,
                          "Region I point not mapped strictly inside I");
                ++checked_i;
            }
            if (const auto s = sample_region(rng, sp, Region::III, fp, {1, 1})) {
                const State2 f = apply_F(sp, *s);
                o.fail_if(!(f.x < s->x && f.y < s->y) || classify_region(sp, f) != Region::III,
                          "Region III point not mapped strictly inside III");
                ++checked_iii;
            }
        }
    }
    o.fail_if(checked_i < 1000 || checked_iii < 1000, "could not sample 1000 points per region");
    o.note(std::to_string(checked_i) + " Region I and " + std::to_string(checked_iii) + " Region III points");
    return o;
}

Outcome envelope_sandwich() {
    Outcome o;
    oracle::Rng rng(606);
    constexpr double tol = 1e-10;
    long interior = 0;
    long steps = 0;
    for (int c = 0; c < 50; ++c) {
        const auto d = rng.supercritical(1, 8, 0.05);
        const StarParams sp{d.a, d.b, d.n};
        const State2 fp = solve_fixed_points(sp).nontrivial.value();
        const auto lo = sample_region(rng, sp, Region::I, {kMinLowerCorner, kMinLowerCorner}, fp);
        const auto hi = sample_region(rng, sp, Region::III, fp, {1, 1});
        if (!lo || !hi) {
            o.fail_if(true, "could not place rectangle corners");
            continue;
        }
        const auto env = envelope_iterate(sp, Envelope{*lo, *hi}, 1'000'000, tol);
        o.fail_if(!env.certified, "envelope not certified");
        const long corner_time = std::max(convergence_time(sp, *lo, tol), convergence_time(sp, *hi, tol));
        for (int k = 0; k < 5; ++k) {
            State2 s{rng.uniform(lo->x, hi->x), rng.uniform(lo->y, hi->y)};
            State2 l = *lo;
            State2 u = *hi;
            bool inside = true;
            for (long t = 0; t <= corner_time; ++t) {
                inside = inside && componentwise_le(l, s) && componentwise_le(s, u);
                s = apply_F(sp, s);
                l = apply_F(sp, l);
                u = apply_F(sp, u);
                ++steps;
            }
            o.fail_if(!inside, "interior trajectory left the corner envelope");
            ++interior;
        }
        for (int k = 0; k < 5; ++k) {
            const State2 s{rng.uniform(lo->x, hi->x), rng.uniform(lo->y, hi->y)};
            o.fail_if(convergence_time(sp, s, tol) > corner_time, "interior slower than both corners");
        }
    }
    o.note(std::to_string(interior) + " interior trajectories, " + std::to_string(steps) + " sandwich checks");
    return o;
}

Outcome spectral_checks() {
    Outcome o;
    oracle::Rng rng(707);
    double worst_sub = 0.0;
    for (int c = 0; c < 50; ++c) {
        const auto d = rng.subcritical(1, 8, 0.0);
        const auto chk = subcritical_contraction_check(StarParams{d.a, d.b, d.n}, 20);
        worst_sub = std::max(worst_sub, chk.max_lambda1);
        o.fail_if(!(chk.max_lambda1 < 1.0), "subcritical grid lambda1 >= 1 at a=" + num(d.a) + " b=" + num(d.b));
    }
    double worst_origin = 0.0;
    for (int c = 0; c < 1000; ++c) {
        const double a = rng.uniform(0, 1);
        const double b = rng.uniform(0, 1);
        const int n = rng.integer(1, 50);
        const auto r = eig2(Matrix2{a, n * b, b, a});
        const double rn = std::sqrt(static_cast<double>(n));
        worst_origin = std::max({worst_origin, std::abs(r.lambda1 - (a + b * rn)), std::abs(r.lambda2 - (a - b * rn))});
    }
    o.fail_if(worst_origin > 1e-12, "origin eigenvalues off by " + num(worst_origin));
    double max_reference = 0.0;
    for (double m : reference_sweep_lines()) {
        for (const auto& r : eigen_sweep_line(m, 200)) {
            max_reference = std::max(max_reference, r.lambda1);
        }
    }
    o.fail_if(!(max_reference < 1.0), "reference sweep lambda1 reached " + num(max_reference));
    double min_gap = 1.0;
    for (const auto& r : eigen_sweep_line(near_critical_sweep_line(), 200)) {
        min_gap = std::min(min_gap, 1.0 - r.lambda1);
    }
    o.fail_if(!(min_gap > 0.0), "near-critical sweep has 1 - lambda1 <= 0");
    o.note("subcritical max lambda1 " + num(worst_sub) + "; origin eig2 error " + num(worst_origin));
    o.note("reference lines max lambda1 " + num(max_reference) + "; near-critical min 1 - lambda1 " + num(min_gap));
    return o;
}

Outcome multilevel_threshold() {
    Outcome o;
    const double three = empirical_threshold(0.5, {2, 2});
    o.fail_if(std::abs(three - 0.25) > 1e-3, "counts [2,2] threshold " + num(three));
    o.note("counts [2,2]: empirical " + num(three) + " vs 0.25");
    for (int n : {2, 4}) {
        const double emp = empirical_threshold(0.5, {n});
        const double want = 0.5 / std::sqrt(static_cast<double>(n));
        o.fail_if(std::abs(emp - want) > 1e-3, "n=" + std::to_string(n) + " threshold " + num(emp));
        o.note("n=" + std::to_string(n) + ": empirical " + num(emp) + " vs " + num(want));
    }
    const std::vector<int> four{2, 2, 2};
    o.note("info: counts [2,2,2]: empirical " + num(empirical_threshold(0.5, four)) + ", sum formula " +
           num(conjectured_threshold(0.5, four)) + ", (1-a)/rho " + num(0.5 / oracle::level_matrix_radius(four)));
    return o;
}

Outcome scalar_case() {
    Outcome o;
    oracle::Rng rng(909);
    double worst_slope = 0.0;
    double worst_limit = 0.0;
    long escapes = 0;
    for (int c = 0; c < 100; ++c) {
        double a = 0.0;
        double b = 0.0;
        do {
            a = rng.uniform(0.01, 0.99);
            b = rng.uniform(0.01, 0.99);
        } while (a + b < 1.02);
        const Params p{a, b};
        const auto rep = scalar_report(p);
        worst_slope = std::max(worst_slope, std::abs(f_scalar_prime(p, *rep.x_c) - 1.0));
        const auto it = iterate_scalar(p, 1e-6, 1'000'000, 1e-13);
        o.fail_if(!it.resolved, "scalar iteration unresolved");
        worst_limit = std::max(worst_limit, std::abs(it.limit - *rep.x_f));
        if (c == 0) {
            for (int k = 1; k <= 1000; ++k) {
                const double x = *rep.x_c * k / 1000.0;
                o.fail_if(!(f_scalar(p, x) > x), "f(x) <= x below x_c");
                ++escapes;
            }
        }
    }
    o.fail_if(worst_slope > 1e-12, "f'(x_c) off by " + num(worst_slope));
    o.fail_if(worst_limit > 1e-8, "iteration from 1e-6 off by " + num(worst_limit));
    o.note("f'(x_c) error " + num(worst_slope) + "; " + std::to_string(escapes) + " escape samples; limit error " +
           num(worst_limit));
    return o;
}

Outcome jacobian_fd() {
    Outcome o;
    oracle::Rng rng(1010);
    double worst = 0.0;
    constexpr double h = 1e-6;
    for (int n : {1, 2, 4}) {
        for (int k = 0; k < 100; ++k) {
            const StarParams sp{rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.99), n};
            const State2 s{rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.99)};
            const Matrix2 j = jacobian(sp, s);
            const State2 fxp = apply_F(sp, {s.x + h, s.y});
            const State2 fxm = apply_F(sp, {s.x - h, s.y});
            const State2 fyp = apply_F(sp, {s.x, s.y + h});
            const State2 fym = apply_F(sp, {s.x, s.y - h});
            const Matrix2 fd{(fxp.x - fxm.x) / (2 * h), (fyp.x - fym.x) / (2 * h), (fxp.y - fxm.y) / (2 * h),
                             (fyp.y - fym.y) / (2 * h)};
            worst = std::max(worst, j.max_abs_diff(fd));
        }
    }
    o.fail_if(worst > 1e-6, "Jacobian differs from finite differences by " + num(worst));
    o.note("worst entry difference " + num(worst));
    return o;
}

std::set<int> parse_expected(int argc, char** argv) {
    std::set<int> out;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--expect-fail") {
            std::stringstream ss(argv[i + 1]);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                out.insert(std::stoi(tok));
            }
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    const std::set<int> expected = parse_expected(argc, argv);
    const std::vector<Criterion> criteria{
        {1, "threshold dichotomy", 60, threshold_dichotomy},
        {2, "reduction equivalence", 5, reduction_equivalence},
        {3, "spoke homogenization factor", 5, spoke_homogenization},
        {4, "fixed-point correctness", 10, fixed_point_correctness},
        {5, "region invariance", 10, region_invariance},
        {6, "envelope sandwich", 30, envelope_sandwich},
        {7, "spectral checks", 60, spectral_checks},
        {8, "multilevel threshold", 60, multilevel_threshold},
        {9, "scalar case", 5, scalar_case},
        {10, "Jacobian vs finite differences", 1, jacobian_fd},
    };
    std::set<int> failed;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.fail_if(true, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.fail_if(secs > c.budget_s, "over time budget of " + num(c.budget_s) + " s");
        if (!out.pass) {
            failed.insert(c.id);
        }
        std::printf("[%s] %2d %s (%.2f s)\n", out.pass ? "PASS" : "FAIL", c.id, c.name, secs);
        // Violations repeat per sample; show the first few.
        int shown = 0;
        for (const auto& line : out.notes) {
            const bool violation = line.rfind("violation", 0) == 0;
            if (!violation || shown++ < 3) {
                std::printf("       %s\n", line.c_str());
            }
        }
    }
    std::printf("%zu of %zu criteria passed\n", criteria.size() - failed.size(), criteria.size());
    if (failed != expected) {
        std::printf("failing set differs from the expected set\n");
        return 1;
    }
    if (!expected.empty()) {
        std::printf("failures match the expected set\n");
    }
    return 0;
}
