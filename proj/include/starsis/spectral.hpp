#pragma once

// Jacobians and mean-value matrices of the reduced star map, closed-form 2x2
// eigenvalues, the subcritical contraction grid check, the origin
// linearization and the n = 2 fixed-point analysis with eigenvalue sweeps.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "starsis/params.hpp"
#include "starsis/reduced_map.hpp"

namespace starsis {

struct Matrix2 {
    double m11 = 0.0;
    double m12 = 0.0;
    double m21 = 0.0;
    double m22 = 0.0;

    [[nodiscard]] double trace() const noexcept { return m11 + m22; }
    [[nodiscard]] double det() const noexcept { return m11 * m22 - m12 * m21; }
    [[nodiscard]] bool finite() const noexcept {
        return std::isfinite(m11) && std::isfinite(m12) && std::isfinite(m21) && std::isfinite(m22);
    }
    [[nodiscard]] double max_abs_diff(const Matrix2& o) const noexcept {
        return std::max({std::abs(m11 - o.m11), std::abs(m12 - o.m12), std::abs(m21 - o.m21), std::abs(m22 - o.m22)});
    }
};

struct SpectralReport {
    Matrix2 matrix;
    /// Larger eigenvalue; the common real part when the pair is complex.
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    /// (m11 - m22)^2 + 4 m12 m21, equal to trace^2 - 4 det.
    double discriminant = 0.0;
    bool real = true;
    /// Both eigenvalues strictly inside the unit disc.
    bool contraction = false;
};

/// Eigenvalues from trace and determinant. The larger-magnitude root comes
/// from the quadratic formula and the other from the product, which avoids
/// cancellation when one root is tiny.
inline SpectralReport eig2(const Matrix2& mat) {
    if (!mat.finite()) {
        throw std::invalid_argument("eig2: matrix entries must be finite");
    }
    SpectralReport r;
    r.matrix = mat;
    const double tr = mat.trace();
    const double diff = mat.m11 - mat.m22;
    r.discriminant = diff * diff + 4.0 * mat.m12 * mat.m21;
    if (r.discriminant >= 0.0) {
        const double s = std::sqrt(r.discriminant);
        const double big = tr >= 0.0 ? 0.5 * (tr + s) : 0.5 * (tr - s);
        const double small = big != 0.0 ? mat.det() / big : 0.0;
        r.lambda1 = std::max(big, small);
        r.lambda2 = std::min(big, small);
        r.contraction = std::abs(r.lambda1) < 1.0 && std::abs(r.lambda2) < 1.0;
    } else {
        r.real = false;
        r.lambda1 = r.lambda2 = 0.5 * tr;
        r.contraction = mat.det() < 1.0;  // |lambda|^2 = det for a conjugate pair
    }
    return r;
}

/// Derivative of F at s.
inline Matrix2 jacobian(const StarParams& sp, const State2& s) {
    detail::require_unit(s);
    const double a = sp.a();
    const double b = sp.b();
    const int n = sp.n();
    const double u = 1.0 - b * s.y;
    const double un1 = detail::ipow(u, n - 1);
    return {a * un1 * u, n * b * (1.0 - a * s.x) * un1, b * (1.0 - a * s.y), a * (1.0 - b * s.x)};
}

/// Matrix A(t1, t2) with F(s) = A s for suitable t1, t2 in [0, 1]: row one is
/// the gradient of f1 at t1 s, row two the gradient of f2 at t2 s.
inline Matrix2 mvt_matrix(const StarParams& sp, const State2& s, double t1, double t2) {
    detail::require_unit(s);
    detail::require_unit(t1, "t1");
    detail::require_unit(t2, "t2");
    const double a = sp.a();
    const double b = sp.b();
    const int n = sp.n();
    const double u = 1.0 - b * t1 * s.y;
    const double un1 = detail::ipow(u, n - 1);
    return {a * un1 * u, n * b * (1.0 - a * t1 * s.x) * un1, b * (1.0 - a * t2 * s.y), a * (1.0 - b * t2 * s.x)};
}

/// Linearization of F at the origin: [[a, n b], [b, a]].
inline Matrix2 origin_matrix(const StarParams& sp) {
    return {sp.a(), sp.n() * sp.b(), sp.b(), sp.a()};
}

/// Coordinates of s in the origin eigenbasis (sqrt(n), 1) and (-sqrt(n), 1),
/// whose eigenvalues are a + b sqrt(n) and a - b sqrt(n).
inline std::array<double, 2> origin_eigen_coordinates(int n, const State2& s) {
    const double rn = std::sqrt(static_cast<double>(n));
    return {0.5 * s.y + s.x / (2.0 * rn), 0.5 * s.y - s.x / (2.0 * rn)};
}

struct ContractionWitness {
    double x = 0.0;
    double y = 0.0;
    double t1 = 0.0;
    double t2 = 0.0;
};

struct ContractionCheck {
    double max_lambda1 = -std::numeric_limits<double>::infinity();
    ContractionWitness witness;
    /// lambda1 <= 1 - (1 - max(alpha, delta)) a held at every grid point.
    bool bound_holds = true;
    bool contraction = false;
    long evaluations = 0;
};

/// Maximizes lambda1 of mvt_matrix over a uniform grid of (x, y, t1, t2) in
/// [0, 1]^4 with max(2, grid_resolution) points per axis, so resolution 1
/// visits only the corners.
inline ContractionCheck subcritical_contraction_check(const StarParams& sp, int grid_resolution = 20) {
    if (!(sp.b() < threshold(sp.a(), sp.n()))) {
        throw std::invalid_argument("subcritical_contraction_check: parameters are not subcritical");
    }
    if (grid_resolution < 1) {
        throw std::invalid_argument("subcritical_contraction_check: grid_resolution must be >= 1");
    }
    const int pts = std::max(2, grid_resolution);
    std::vector<double> axis(pts);
    for (int i = 0; i < pts; ++i) {
        axis[i] = static_cast<double>(i) / (pts - 1);
    }
    const double a = sp.a();
    const double b = sp.b();
    const int n = sp.n();
    ContractionCheck out;
    for (double x : axis) {
        for (double y : axis) {
            for (double t1 : axis) {
                const double alpha = detail::ipow(1.0 - b * t1 * y, n);
                for (double t2 : axis) {
                    const Matrix2 m = mvt_matrix(sp, {x, y}, t1, t2);
                    const double lambda1 = eig2(m).lambda1;
                    const double delta = 1.0 - b * t2 * x;
                    const double bound = 1.0 - (1.0 - std::max(alpha, delta)) * a;
                    // Bound is exact when alpha == delta and beta gamma == 1; allow rounding.
                    if (lambda1 > bound + 1e-15) {
                        out.bound_holds = false;
                    }
                    if (lambda1 > out.max_lambda1) {
                        out.max_lambda1 = lambda1;
                        out.witness = {x, y, t1, t2};
                    }
                    ++out.evaluations;
                }
            }
        }
    }
    out.contraction = out.max_lambda1 < 1.0;
    return out;
}

// ---------------------------------------------------------------------------
// n = 2 fixed-point analysis

namespace detail {

inline void require_supercritical_n2(const Params& p, const char* who) {
    if (!(p.b() > threshold(p.a(), 2))) {
        throw std::invalid_argument(std::string(who) + ": requires b > (1 - a) / sqrt(2)");
    }
}

}  // namespace detail

/// Closed-form hub coordinate of the nontrivial fixed point for n = 2.
/// Throws std::domain_error where the denominator vanishes (the line
/// b = a + sqrt(a)); use solve_fixed_points there.
inline double xf_closed_form_n2(const Params& p) {
    detail::require_supercritical_n2(p, "xf_closed_form_n2");
    const double a = p.a();
    const double b = p.b();
    const double den = 2.0 * a * b * (a * a + b * b - a * (1.0 + 2.0 * b));
    if (std::abs(den) <= 1e-14) {
        throw std::domain_error("xf_closed_form_n2: closed form singular here; use numeric solver");
    }
    const double root = std::sqrt(b * b * b * b + 4.0 * a * (1.0 - b) * (a - 1.0 - b) * (a - 1.0 - b));
    const double num =
        2.0 * a * a * a + b * b * b - 2.0 * a * a * (2.0 + b) + a * (2.0 + 2.0 * b - 2.0 * b * b) - b * root;
    return num / den;
}

/// Nontrivial n = 2 fixed point from the closed form, with y from phi2.
inline State2 fixed_point_closed_form_n2(const Params& p) {
    const double x = xf_closed_form_n2(p);
    return {x, phi2_of_x(p, std::clamp(x, 0.0, 1.0))};
}

/// Jacobian at the nontrivial n = 2 fixed point:
/// [[a (1 - b y)^2, 2 b (1 - a x)(1 - b y)], [b (1 - a y), a (1 - b x)]].
inline Matrix2 fixed_point_matrix_n2(const Params& p) {
    const State2 fp = fixed_point_closed_form_n2(p);
    const double a = p.a();
    const double b = p.b();
    const double u = 1.0 - b * fp.y;
    return {a * u * u, 2.0 * b * (1.0 - a * fp.x) * u, b * (1.0 - a * fp.y), a * (1.0 - b * fp.x)};
}

struct RadicalCheck {
    /// The quoted radical expression, evaluated literally; NaN when its
    /// radicand is negative.
    double printed = 0.0;
    /// Same radical with the diagonal entry a (1 - b x_f) and the squared
    /// difference under the root, i.e. the trace/determinant formula.
    double corrected = 0.0;
    /// lambda1 of fixed_point_matrix_n2 from eig2.
    double from_eig2 = 0.0;
    double printed_discrepancy = 0.0;
    double corrected_discrepancy = 0.0;
    bool printed_agrees = false;
    bool corrected_agrees = false;
};

/// Compares the quoted lambda1(a, b) radical for n = 2 against eig2 of the
/// fixed-point matrix. Disagreement is reported, never resolved silently.
inline RadicalCheck lambda1_radical_check(const Params& p, double tolerance = 1e-10) {
    const State2 fp = fixed_point_closed_form_n2(p);
    const double a = p.a();
    const double b = p.b();
    const double u = 1.0 - b * fp.y;
    const double one_ax = 1.0 - a * fp.x;
    const double one_ay = 1.0 - a * fp.y;
    const double one_bx = 1.0 - b * fp.x;

    RadicalCheck c;
    const double printed_radicand = (u * u - one_ax) * a * a + 8.0 * b * b * u * one_ax * one_ay;
    c.printed = (u * u + one_ax) * a / 2.0 +
                (printed_radicand >= 0.0 ? std::sqrt(printed_radicand) / 2.0 : std::numeric_limits<double>::quiet_NaN());
    const double diff = u * u - one_bx;
    c.corrected = (u * u + one_bx) * a / 2.0 + std::sqrt(diff * diff * a * a + 8.0 * b * b * u * one_ax * one_ay) / 2.0;
    c.from_eig2 = eig2(fixed_point_matrix_n2(p)).lambda1;
    c.printed_discrepancy = std::isnan(c.printed) ? std::numeric_limits<double>::infinity()
                                                  : std::abs(c.printed - c.from_eig2);
    c.corrected_discrepancy = std::abs(c.corrected - c.from_eig2);
    c.printed_agrees = c.printed_discrepancy <= tolerance;
    c.corrected_agrees = c.corrected_discrepancy <= tolerance;
    return c;
}

struct SweepRecord {
    double m = 0.0;
    double a = 0.0;
    double b = 0.0;
    double x_f = 0.0;
    double y_f = 0.0;
    double lambda1 = 0.0;
};

/// Samples `steps` values of a strictly inside (max(0, m - sqrt(2)), 1), sets
/// b = (m - a) / sqrt(2) and records the numeric n = 2 fixed point and the
/// largest eigenvalue of the Jacobian there.
inline std::vector<SweepRecord> eigen_sweep_line(double m, int steps) {
    constexpr double sqrt2 = std::numbers::sqrt2;
    if (!(m > 1.0 && m < 1.0 + sqrt2)) {
        throw std::invalid_argument("eigen_sweep_line: m must lie in (1, 1 + sqrt(2))");
    }
    if (steps < 2) {
        throw std::invalid_argument("eigen_sweep_line: steps must be >= 2");
    }
    const double lo = std::max(0.0, m - sqrt2);
    if (!(lo < 1.0)) {
        throw std::invalid_argument("eigen_sweep_line: empty parameter range");
    }
    std::vector<SweepRecord> out;
    out.reserve(static_cast<std::size_t>(steps));
    for (int k = 0; k < steps; ++k) {
        const double a = lo + (1.0 - lo) * (k + 1) / (steps + 1);
        const double b = (m - a) / sqrt2;
        const StarParams sp{a, b, 2};
        const auto report = solve_fixed_points(sp);
        if (!report.nontrivial) {
            throw SolverError("eigen_sweep_line: no nontrivial fixed point at a = " + std::to_string(a));
        }
        const State2 fp = *report.nontrivial;
        out.push_back({m, a, b, fp.x, fp.y, eig2(jacobian(sp, fp)).lambda1});
    }
    return out;
}

/// The line parameters of the reference eigenvalue sweeps:
/// 1 + k sqrt(2) / 6 for k = 1..5.
inline std::array<double, 5> reference_sweep_lines() {
    std::array<double, 5> ms{};
    for (int k = 1; k <= 5; ++k) {
        ms[k - 1] = 1.0 + k * std::numbers::sqrt2 / 6.0;
    }
    return ms;
}

/// Line parameter closest to threshold among the reference sweeps.
inline double near_critical_sweep_line() { return 1.0 + std::numbers::sqrt2 / 100.0; }

}  // namespace starsis
