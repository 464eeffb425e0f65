#pragma once

// Test-only reference computations. Everything here is written from the
// defining formulas with std::pow and plain loops, and shares no code with
// the library paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

struct XY {
    double x;
    double y;
};

inline XY F(double a, double b, int n, double x, double y) {
    return {1.0 - (1.0 - a * x) * std::pow(1.0 - b * y, n), 1.0 - (1.0 - a * y) * (1.0 - b * x)};
}

inline double phi1(double a, double b, int n, double y) {
    const double c = std::pow(1.0 - b * y, n);
    return (1.0 - c) / (1.0 - a * c);
}

inline double phi2_inverse(double a, double b, double y) { return (1.0 - a) * y / (b * (1.0 - a * y)); }

/// Nontrivial fixed point by 200 plain bisection steps on
/// h(y) = phi1(y) - phi2_inverse(y) over (0, b / (1 - a + a b)].
inline XY bisection_fixed_point(double a, double b, int n) {
    double lo = 0.0;
    double hi = b / (1.0 - a + a * b);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (phi1(a, b, n, mid) - phi2_inverse(a, b, mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double y = 0.5 * (lo + hi);
    return {phi1(a, b, n, y), y};
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double second_difference(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

/// Bisection for a root of a continuous f with f(lo), f(hi) of opposite sign.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int steps = 200) {
    const bool lo_negative = f(lo) < 0.0;
    for (int i = 0; i < steps; ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((f(mid) < 0.0) == lo_negative) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Spectral radius of the level-linearization a I + b M of a multilevel star,
/// where M has ones below the diagonal and the spoke counts above it, by
/// power iteration (M is nonnegative and irreducible).
template <class Counts>
inline double level_matrix_radius(const Counts& counts) {
    const std::size_t l = counts.size() + 1;
    std::vector<double> v(l, 1.0);
    double lambda = 0.0;
    for (int it = 0; it < 20000; ++it) {
        std::vector<double> w(l, 0.0);
        for (std::size_t k = 0; k < l; ++k) {
            // Shift by the identity to avoid the +-lambda oscillation of a bipartite matrix.
            w[k] = v[k];
            if (k > 0) {
                w[k] += v[k - 1];
            }
            if (k + 1 < l) {
                w[k] += counts[k] * v[k + 1];
            }
        }
        double norm = 0.0;
        for (double e : w) {
            norm = std::max(norm, std::abs(e));
        }
        for (auto& e : w) {
            e /= norm;
        }
        v = std::move(w);
        lambda = norm - 1.0;
    }
    return lambda;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }

    /// (a, b, n) with b strictly above threshold by at least `margin`.
    struct Draw {
        double a;
        double b;
        int n;
    };
    Draw supercritical(int n_lo, int n_hi, double margin = 0.02) {
        for (;;) {
            const int n = integer(n_lo, n_hi);
            const double a = uniform(0.01, 0.99);
            const double t = (1.0 - a) / std::sqrt(static_cast<double>(n));
            if (t + margin >= 0.99) {
                continue;
            }
            return {a, uniform(t + margin, 0.99), n};
        }
    }
    Draw subcritical(int n_lo, int n_hi, double margin = 0.0) {
        for (;;) {
            const int n = integer(n_lo, n_hi);
            const double a = uniform(0.01, 0.99);
            const double t = (1.0 - a) / std::sqrt(static_cast<double>(n));
            if (t - margin <= 0.01) {
                continue;
            }
            return {a, uniform(0.01, t - margin), n};
        }
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace oracle
