#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace starsis {

/// Thrown when an iterative solver exhausts its iteration cap. This signals a
/// numerical problem, not bad user input.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Infection parameters of the discrete-time SIS update.
///
/// `a` is the survival probability of an infection over one step
/// (one minus the cure probability) and `b` the per-contact infection
/// probability. Both must lie strictly inside (0, 1).
class Params {
public:
    Params(double a, double b) : a_(a), b_(b) {
        if (!(a > 0.0 && a < 1.0)) {
            throw std::invalid_argument("Params: a must lie in (0, 1), got " + std::to_string(a));
        }
        if (!(b > 0.0 && b < 1.0)) {
            throw std::invalid_argument("Params: b must lie in (0, 1), got " + std::to_string(b));
        }
    }

    static Params from_rates(double cure, double infect) { return {1.0 - cure, infect}; }

    [[nodiscard]] double a() const noexcept { return a_; }
    [[nodiscard]] double b() const noexcept { return b_; }
    [[nodiscard]] double cure() const noexcept { return 1.0 - a_; }

private:
    double a_;
    double b_;
};

/// Parameters of the reduced hub/spoke system of a star with `n` spokes.
class StarParams {
public:
    StarParams(Params params, int n) : params_(params), n_(n) {
        if (n < 1) {
            throw std::invalid_argument("StarParams: spoke count must be >= 1");
        }
    }
    StarParams(double a, double b, int n) : StarParams(Params{a, b}, n) {}

    [[nodiscard]] const Params& params() const noexcept { return params_; }
    [[nodiscard]] double a() const noexcept { return params_.a(); }
    [[nodiscard]] double b() const noexcept { return params_.b(); }
    [[nodiscard]] int n() const noexcept { return n_; }

private:
    Params params_;
    int n_;
};

enum class Regime { Subcritical, Critical, Supercritical };

inline const char* to_string(Regime r) noexcept {
    switch (r) {
    case Regime::Subcritical: return "Subcritical";
    case Regime::Critical: return "Critical";
    case Regime::Supercritical: return "Supercritical";
    }
    return "?";
}

namespace detail {

inline void require_unit(double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument(std::string(what) + " must lie in [0, 1], got " + std::to_string(v));
    }
}

/// Integer power by repeated multiplication; spoke counts are small.
inline double ipow(double base, int e) noexcept {
    double r = 1.0;
    for (int i = 0; i < e; ++i) {
        r *= base;
    }
    return r;
}

}  // namespace detail

}  // namespace starsis
